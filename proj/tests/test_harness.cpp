#include "etdrk/harness.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace etdrk;

namespace {

RunConfig small_gl() {
    RunConfig c;
    c.nx = c.ny = 32;
    c.tau = 0.05;
    c.t_end = 0.5;
    return c;
}

RunConfig small_fh() {
    RunConfig c;
    c.nx = c.ny = 64;
    c.potential.kind = "fh";
    c.initial.kind = "random";
    c.tau = 1.0;
    return c;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("etdrk_harness_" + name)).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(StepCount, Rounding) {
    EXPECT_EQ(step_count(0.0, 0.1), 0);
    EXPECT_EQ(step_count(1.0, 0.1), 10);
    EXPECT_EQ(step_count(1.05, 0.1), 11);
    EXPECT_EQ(step_count(20.0, 0.01), 2000);
}

TEST(HalvingTaus, Values) {
    EXPECT_EQ(halving_taus(0.1, 3), (std::vector<double>{0.1, 0.05, 0.025}));
}

TEST(RunTrajectory, ZeroEndTimeKeepsInitialRecordOnly) {
    RunConfig c = small_gl();
    c.t_end = 0.0;
    const RunResult res = run_trajectory(c);
    ASSERT_EQ(res.report.series.size(), 1u);
    EXPECT_EQ(res.report.series[0].n, 0);
}

TEST(RunTrajectory, ConstantSteadyState) {
    RunConfig c = small_gl();
    c.initial.kind = "constant";
    c.initial.value = 1.0;
    for (int r : {1, 3, 5}) {
        c.order = r;
        const RunResult res = run_trajectory(c);
        for (std::size_t k = 0; k < res.final_u.size(); ++k) {
            ASSERT_NEAR(res.final_u[k], 1.0, 1e-10);
        }
    }
}

TEST(RunTrajectory, ShortLastStepReachesEndTime) {
    RunConfig c = small_gl();
    c.t_end = 0.12;
    const RunResult res = run_trajectory(c);
    ASSERT_EQ(res.report.series.size(), 4u);
    EXPECT_EQ(res.report.series.back().t, 0.12);
    EXPECT_NEAR(res.report.series[2].t, 0.1, 1e-15);
}

TEST(RunTrajectory, RecordsEveryStep) {
    const RunResult res = run_trajectory(small_gl());
    ASSERT_EQ(res.report.series.size(), 11u);
    for (std::size_t n = 0; n < res.report.series.size(); ++n) {
        EXPECT_EQ(res.report.series[n].n, static_cast<long>(n));
        EXPECT_TRUE(res.report.series[n].mbp_ok);
        EXPECT_TRUE(res.report.series[n].dissipation_ok);
    }
}

TEST(RunTrajectory, ConfigErrors) {
    RunConfig c = small_gl();
    c.kappa = 1.0;
    EXPECT_THROW(run_trajectory(c), ConfigError);
    c = small_gl();
    c.tau = 0.0;
    EXPECT_THROW(run_trajectory(c), ConfigError);
    c = small_gl();
    c.order = 11;
    EXPECT_THROW(run_trajectory(c), ConfigError);
    c = small_gl();
    c.initial.kind = "gaussian";
    EXPECT_THROW(run_trajectory(c), ConfigError);
    c = small_fh();
    c.potential.theta = 2.0;
    EXPECT_THROW(run_trajectory(c), ConfigError);
}

TEST(RunTrajectory, FloryHugginsRescaledStaysInBound) {
    RunConfig c = small_fh();
    c.order = 5;
    c.t_end = 100.0;
    c.initial.seed = 42;
    const RunResult res = run_trajectory(c);
    const RunSummary s = res.report.summary();
    EXPECT_EQ(s.mbp_violations, 0);
    EXPECT_LE(s.max_norm_peak, Potential::flory_huggins(0.8, 1.6).beta + 1e-12);
    EXPECT_EQ(res.report.series.size(), 101u);
}

TEST(RunTrajectory, FailureIsRecordedWhenTolerated) {
    RunConfig c = small_gl();
    c.initial.kind = "constant";
    c.initial.value = 1e200;
    EXPECT_THROW(run_trajectory(c), NumericalFailure);
    const RunResult res = run_trajectory(c, true);
    EXPECT_TRUE(res.failure.has_value());
    EXPECT_EQ(res.failed_step, 1);
}

TEST(Convergence, SelfComparisonHasZeroError) {
    RunConfig c = small_gl();
    c.t_end = 0.2;
    const std::vector<double> taus{0.05, 0.05, 0.05};
    const auto rows = convergence_study(c, taus, {ReferenceKind::SelfFiner, 1});
    for (const auto& row : rows) {
        EXPECT_EQ(row.linf_err, 0.0);
        EXPECT_EQ(row.l2_err, 0.0);
    }
}

TEST(Convergence, ErrorsShrinkAtTheSchemeOrder) {
    RunConfig c = small_gl();
    c.t_end = 0.4;
    c.order = 2;
    const auto rows = convergence_study(c, halving_taus(0.1, 4), {ReferenceKind::SelfFiner, 8});
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_FALSE(rows[0].linf_rate);
    EXPECT_GT(*rows.back().linf_rate, 1.75);
    EXPECT_GT(*rows.back().l2_rate, 1.75);
}

TEST(Convergence, RejectsBadStudies) {
    const RunConfig c = small_gl();
    EXPECT_THROW(convergence_study(c, {0.1, 0.05}), ConfigError);
    EXPECT_THROW(convergence_study(c, {0.1, 0.05, 0.03}), ConfigError);
    EXPECT_THROW(convergence_study(c, {0.1, 0.05, 0.025}, {ReferenceKind::SelfFiner, 0}), ConfigError);
}

TEST(Config, JsonRoundTrip) {
    RunConfig c = small_fh();
    c.kappa = 9.0;
    c.order = 6;
    c.nodes = NodeKind::ChebyshevLobatto;
    c.initial.seed = 7;
    const RunConfig back = config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
    EXPECT_EQ(back.kappa, 9.0);
    EXPECT_EQ(back.nodes, NodeKind::ChebyshevLobatto);
}

TEST(Config, BadJson) {
    const std::string path = temp_path("bad.json");
    {
        std::ofstream out(path);
        out << "{\"tau\": ";
    }
    RunConfig c;
    EXPECT_THROW(merge_json_file(c, path), ConfigError);
    {
        std::ofstream out(path);
        out << R"({"tau": "fast"})";
    }
    EXPECT_THROW(merge_json_file(c, path), ConfigError);
    {
        std::ofstream out(path);
        out << R"({"scheme": {"nodes": "gauss"}})";
    }
    EXPECT_THROW(merge_json_file(c, path), ConfigError);
    EXPECT_THROW(merge_json_file(c, temp_path("missing.json")), ConfigError);
}

TEST(Config, FileOverridesDefaults) {
    const std::string path = temp_path("good.json");
    {
        std::ofstream out(path);
        out << R"({"grid": {"nx": 16}, "scheme": {"order": 4, "rescaled": false}, "tau": 0.2})";
    }
    RunConfig c;
    merge_json_file(c, path);
    EXPECT_EQ(c.nx, 16);
    EXPECT_EQ(c.ny, 128);
    EXPECT_EQ(c.order, 4);
    EXPECT_FALSE(c.rescaled);
    EXPECT_EQ(c.tau, 0.2);
}

TEST(Config, RandomFieldIsPortableAndInBound) {
    const Mesh2D m = Mesh2D::square_2pi(16);
    const Field a = random_field(m, 42, 0.9);
    const Field b = random_field(m, 42, 0.9);
    std::mt19937_64 rng(42);
    const double first = -(0.9 - 1e-12) + 2.0 * (0.9 - 1e-12) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    EXPECT_EQ(a[0], first);
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k], b[k]);
        EXPECT_LT(std::abs(a[k]), 0.9);
    }
}

TEST(Studies, MbpStudyRescaledRowsClean) {
    RunConfig c = small_fh();
    c.nx = c.ny = 32;
    const auto rows = mbp_study(c, {3, 5}, 20);
    ASSERT_EQ(rows.size(), 4u);
    for (const auto& row : rows) {
        if (row.rescaled) {
            EXPECT_EQ(row.mbp_violations, 0);
            EXPECT_EQ(row.failed_step, -1);
            EXPECT_EQ(row.report.series.size(), 21u);
        }
    }
}

TEST(Studies, EnergyStudySharesInitialEnergy) {
    RunConfig c = small_fh();
    c.nx = c.ny = 32;
    c.t_end = 1.0;
    const auto rows = energy_study(c, {3, 4}, {0.2, 0.1});
    ASSERT_EQ(rows.size(), 4u);
    for (const auto& row : rows) {
        EXPECT_EQ(row.initial_energy, rows[0].initial_energy);
        EXPECT_EQ(row.dissipation_violations, 0);
        EXPECT_EQ(row.tau_max, tau_max(row.order, Potential::flory_huggins(0.8, 1.6).kappa_min, NodeKind::Uniform, true));
    }
}

TEST(Studies, CsvOutputIsDeterministic) {
    RunConfig c = small_fh();
    c.nx = c.ny = 32;
    c.t_end = 3.0;
    const std::string a = temp_path("det_a.csv");
    const std::string b = temp_path("det_b.csv");
    write_csv(run_trajectory(c).report, a);
    write_csv(run_trajectory(c).report, b);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_FALSE(slurp(a).empty());
}

TEST(Tables, Shapes) {
    const auto sigma = sigma_table();
    EXPECT_EQ(sigma.size(), 20u);
    const auto taus = tau_max_table(2.0);
    std::ostringstream out;
    write_tau_max_csv(taus, out);
    EXPECT_NE(out.str().find("1,2,standard,inf"), std::string::npos);
    EXPECT_NE(out.str().find("2,2,standard,1.250e-01"), std::string::npos);
}
