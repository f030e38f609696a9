// Command-line driver: single runs, the convergence / maximum-bound / energy
// studies, and the singular-value and step-bound tables.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include "etdrk/etdrk.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace etdrk;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

// Flag values; unset optionals leave the JSON / template value alone.
struct Overrides {
    std::string config_path;
    std::optional<int> order;
    std::optional<bool> rescaled;
    std::optional<double> tau;
    std::optional<double> t_end;
    std::optional<int> grid;
    std::optional<double> eps;
    std::optional<std::string> potential;
    std::optional<double> theta;
    std::optional<double> theta_c;
    std::optional<double> kappa;
    std::optional<std::string> nodes;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool paper_scale = false;
    bool dump_config = false;
};

void add_common_options(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config_path, "JSON configuration file");
    app->add_option("--order", o.order, "scheme order r");
    app->add_option("--rescaled", o.rescaled, "apply the rescaling post-process (true|false)");
    app->add_option("--tau", o.tau, "time step");
    app->add_option("--t-end", o.t_end, "final time");
    app->add_option("--grid", o.grid, "cells per dimension");
    app->add_option("--eps", o.eps, "interfacial width");
    app->add_option("--potential", o.potential, "gl|fh")->check(CLI::IsMember({"gl", "fh"}));
    app->add_option("--theta", o.theta, "Flory-Huggins theta");
    app->add_option("--theta-c", o.theta_c, "Flory-Huggins theta_c");
    app->add_option("--kappa", o.kappa, "stabilizer (must be >= its minimum)");
    app->add_option("--nodes", o.nodes, "uniform|chebyshev")->check(CLI::IsMember({"uniform", "chebyshev"}));
    app->add_option("--seed", o.seed, "seed for random initial data");
    app->add_option("--out", o.out, "output directory");
    app->add_flag("--paper-scale", o.paper_scale, "use a 512x512 grid");
    app->add_flag("--dump-config", o.dump_config, "print the resolved configuration and exit");
}

RunConfig resolve(RunConfig c, const Overrides& o) {
    if (!o.config_path.empty()) {
        merge_json_file(c, o.config_path);
    }
    if (o.paper_scale) {
        c.nx = c.ny = 512;
    }
    if (o.order) c.order = *o.order;
    if (o.rescaled) c.rescaled = *o.rescaled;
    if (o.tau) c.tau = *o.tau;
    if (o.t_end) c.t_end = *o.t_end;
    if (o.grid) c.nx = c.ny = *o.grid;
    if (o.eps) c.eps = *o.eps;
    if (o.potential) c.potential.kind = *o.potential;
    if (o.theta) c.potential.theta = *o.theta;
    if (o.theta_c) c.potential.theta_c = *o.theta_c;
    if (o.kappa) c.kappa = *o.kappa;
    if (o.nodes) c.nodes = parse_node_kind(*o.nodes);
    if (o.seed) c.initial.seed = *o.seed;
    if (o.out) c.out_dir = *o.out;
    c.validate();
    return c;
}

fs::path prepare_out(const RunConfig& c) {
    fs::path dir(c.out_dir);
    fs::create_directories(dir);
    return dir;
}

std::string tau_tag(double tau) {
    std::ostringstream s;
    s << tau;
    return s.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structure-preserving ETDRK solver for the 2D Allen-Cahn equation"};
    app.require_subcommand(1);

    Overrides run_o, conv_o, mbp_o, energy_o;
    auto* run = app.add_subcommand("run", "integrate one configuration");
    add_common_options(run, run_o);

    auto* conv = app.add_subcommand("converge", "temporal convergence study");
    add_common_options(conv, conv_o);
    std::vector<double> conv_taus;
    int conv_levels = 6;
    std::string reference = "self_finer";
    int ref_factor = 8;
    conv->add_option("--taus", conv_taus, "explicit step sizes (default: tau * 2^-k)");
    conv->add_option("--levels", conv_levels, "number of halvings of --tau when --taus is absent");
    conv->add_option("--reference", reference, "self_finer|order_up")
        ->check(CLI::IsMember({"self_finer", "order_up"}));
    conv->add_option("--ref-factor", ref_factor, "reference step = finest / factor");

    auto* mbp = app.add_subcommand("mbp-test", "maximum-norm series, standard vs rescaled");
    add_common_options(mbp, mbp_o);
    std::vector<int> mbp_orders{3, 5, 7};
    long mbp_steps = 100;
    mbp->add_option("--orders", mbp_orders, "scheme orders");
    mbp->add_option("--steps", mbp_steps, "number of steps");

    auto* energy = app.add_subcommand("energy-test", "energy series of rescaled schemes");
    add_common_options(energy, energy_o);
    std::vector<int> energy_orders{3, 4, 5, 6};
    std::vector<double> energy_taus{0.2, 0.1, 0.01};
    energy->add_option("--orders", energy_orders, "scheme orders");
    energy->add_option("--taus", energy_taus, "time steps");

    auto* tables = app.add_subcommand("tables", "minimum singular values and step bounds");
    std::string tables_out;
    double tables_kappa = 2.0;
    tables->add_option("--out", tables_out, "also write sigma_min.csv / tau_max.csv here");
    tables->add_option("--kappa", tables_kappa, "stabilizer for the step-bound table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) {
            const RunConfig c = resolve(RunConfig{}, run_o);
            if (run_o.dump_config) {
                std::cout << to_json(c).dump(2) << '\n';
                return 0;
            }
            const RunResult res = run_trajectory(c);
            const fs::path dir = prepare_out(c);
            write_csv(res.report, (dir / "diagnostics.csv").string());
            write_field_csv(res.final_u, (dir / "final_field.csv").string());
            const RunSummary s = res.report.summary();
            std::cout << "steps " << res.report.series.size() - 1 << ", final energy " << s.final_energy
                      << ", peak max norm " << s.max_norm_peak << ", dissipation violations "
                      << s.dissipation_violations << ", bound violations " << s.mbp_violations << '\n';
        } else if (*conv) {
            RunConfig base;
            base.tau = 0.1;
            const RunConfig c = resolve(base, conv_o);
            if (conv_o.dump_config) {
                std::cout << to_json(c).dump(2) << '\n';
                return 0;
            }
            const std::vector<double> taus = conv_taus.empty() ? halving_taus(c.tau, conv_levels) : conv_taus;
            const ReferenceSpec ref{reference == "order_up" ? ReferenceKind::OrderUp : ReferenceKind::SelfFiner,
                                    ref_factor};
            const auto rows = convergence_study(c, taus, ref);
            const fs::path dir = prepare_out(c);
            const std::string path = (dir / ("convergence_r" + std::to_string(c.order) + ".csv")).string();
            write_convergence_csv(rows, path);
            std::cout << std::ifstream(path).rdbuf();
        } else if (*mbp) {
            RunConfig base;
            base.potential.kind = "fh";
            base.initial.kind = "random";
            base.tau = 1.0;
            const RunConfig c = resolve(base, mbp_o);
            if (mbp_o.dump_config) {
                std::cout << to_json(c).dump(2) << '\n';
                return 0;
            }
            const auto rows = mbp_study(c, mbp_orders, mbp_steps);
            const fs::path dir = prepare_out(c);
            for (const auto& row : rows) {
                write_csv(row.report, (dir / ("mbp_r" + std::to_string(row.order) + "_" +
                                              (row.rescaled ? "rescaled" : "standard") + ".csv"))
                                          .string());
            }
            const std::string path = (dir / "mbp_summary.csv").string();
            write_mbp_summary_csv(rows, path);
            std::cout << std::ifstream(path).rdbuf();
        } else if (*energy) {
            RunConfig base;
            base.potential.kind = "fh";
            base.t_end = 20.0;
            const RunConfig c = resolve(base, energy_o);
            if (energy_o.dump_config) {
                std::cout << to_json(c).dump(2) << '\n';
                return 0;
            }
            const auto rows = energy_study(c, energy_orders, energy_taus);
            const fs::path dir = prepare_out(c);
            for (const auto& row : rows) {
                write_csv(row.report, (dir / ("energy_r" + std::to_string(row.order) + "_tau" + tau_tag(row.tau) +
                                              ".csv"))
                                          .string());
            }
            const std::string path = (dir / "energy_summary.csv").string();
            write_energy_summary_csv(rows, path);
            std::cout << std::ifstream(path).rdbuf();
        } else if (*tables) {
            const auto sigma = sigma_table();
            const auto taus = tau_max_table(tables_kappa);
            write_sigma_csv(sigma, std::cout);
            std::cout << '\n';
            write_tau_max_csv(taus, std::cout);
            if (!tables_out.empty()) {
                fs::create_directories(tables_out);
                std::ofstream t1(fs::path(tables_out) / "sigma_min.csv");
                write_sigma_csv(sigma, t1);
                std::ofstream t2(fs::path(tables_out) / "tau_max.csv");
                write_tau_max_csv(taus, t2);
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure at step " << e.step_index << ": " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
