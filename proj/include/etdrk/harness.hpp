#pragma once

// Trajectory driver and the experiment studies behind the command-line tool:
// plain runs, temporal convergence, maximum-bound and energy monitoring, and
// the singular-value / step-bound tables.

#include "etdrk/config.hpp"
#include "etdrk/diagnostics.hpp"
#include "etdrk/grid.hpp"
#include "etdrk/scheme.hpp"
#include "etdrk/spectral.hpp"
#include "etdrk/stepper.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace etdrk {

struct RunResult {
    RunReport report;
    Field final_u;
    /// Set when the trajectory stopped early on a numerical failure and the
    /// caller asked to tolerate it.
    std::optional<std::string> failure;
    long failed_step = -1;
};

/// Number of steps to reach t_end with step tau; the last step may be shorter.
inline long step_count(double t_end, double tau) {
    if (t_end <= 0.0) {
        return 0;
    }
    return static_cast<long>(std::ceil(t_end / tau - 1e-9));
}

/// Integrates config from t = 0 to t_end. Numerical failures propagate with
/// their step index unless tolerate_failure is set, in which case the run
/// stops and the failure is recorded in the result.
inline RunResult run_trajectory(const RunConfig& config, bool tolerate_failure = false) {
    config.validate();
    const Potential potential = config.potential.build();
    const double kappa = config.resolved_kappa(potential);
    const Mesh2D mesh = config.mesh();
    auto plan = std::make_shared<const SpectralPlan>(mesh, config.eps, kappa);
    auto spec = std::make_shared<const SchemeSpec>(config.order, config.nodes);

    Field u = build_initial(config, potential);
    RunResult result{RunReport{to_json(config).dump(), {}}, u, std::nullopt, -1};
    result.report.append(record(0, 0.0, u, config.eps, potential, std::nullopt));

    const long steps = step_count(config.t_end, config.tau);
    if (steps == 0) {
        return result;
    }
    const StepContext full(plan, potential, spec, config.tau, config.rescaled);
    std::optional<StepContext> last;
    const double tau_last = config.t_end - static_cast<double>(steps - 1) * config.tau;
    if (std::abs(tau_last - config.tau) > 1e-12 * config.tau) {
        last.emplace(plan, potential, spec, tau_last, config.rescaled);
    }

    for (long n = 1; n <= steps; ++n) {
        const StepContext& ctx = (n == steps && last) ? *last : full;
        const double t = n == steps ? config.t_end : static_cast<double>(n) * config.tau;
        try {
            StepResult step = ctx.step(u);
            u = std::move(step.u);
            const double prev = result.report.series.back().energy;
            result.report.append(record(n, t, u, config.eps, potential, prev, step.alpha_min));
        } catch (NumericalFailure& e) {
            e.step_index = n;
            if (!tolerate_failure) {
                throw;
            }
            result.failure = e.what();
            result.failed_step = n;
            break;
        }
    }
    result.final_u = u;
    return result;
}

/// Runs the jobs on up to hardware_concurrency threads.
inline void run_concurrently(std::vector<std::function<void()>> jobs) {
    const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                             static_cast<unsigned>(jobs.size())));
    if (workers <= 1) {
        for (auto& job : jobs) {
            job();
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(jobs.size());
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < jobs.size(); k = next++) {
                try {
                    jobs[k]();
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

// ---------------------------------------------------------------------------
// Convergence

enum class ReferenceKind {
    /// Same scheme at tau_finest / factor.
    SelfFiner,
    /// Scheme of order + 1 at tau_finest / factor.
    OrderUp,
};

struct ReferenceSpec {
    ReferenceKind kind = ReferenceKind::SelfFiner;
    int factor = 8;
};

struct ConvergenceRow {
    double tau = 0.0;
    double linf_err = 0.0;
    double l2_err = 0.0;
    std::optional<double> linf_rate;
    std::optional<double> l2_rate;
};

/// Relative errors (max |u - ref| / max |ref|, ||u - ref|| / ||ref||).
inline std::pair<double, double> relative_errors(const Field& u, const Field& ref) {
    require_same_mesh(u.mesh(), ref.mesh());
    Field diff(u.mesh());
    for (std::size_t k = 0; k < u.size(); ++k) {
        diff[k] = u[k] - ref[k];
    }
    return {max_norm(diff) / max_norm(ref), l2_norm(diff) / l2_norm(ref)};
}

inline std::vector<double> halving_taus(double tau0, int count) {
    std::vector<double> taus;
    for (int k = 0; k < count; ++k) {
        taus.push_back(tau0 * std::ldexp(1.0, -k));
    }
    return taus;
}

inline std::vector<ConvergenceRow> convergence_study(const RunConfig& base, const std::vector<double>& taus,
                                                     ReferenceSpec reference = {}) {
    if (taus.size() < 3) {
        throw ConfigError("a convergence study needs at least three step sizes");
    }
    for (double tau : taus) {
        const double steps = base.t_end / tau;
        if (!(tau > 0.0) || std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
            throw ConfigError("every tau must divide t_end into an integer number of steps");
        }
    }
    if (reference.factor < 1) {
        throw ConfigError("reference refinement factor must be >= 1");
    }
    const double finest = *std::min_element(taus.begin(), taus.end());

    RunConfig ref_cfg = base;
    ref_cfg.tau = finest / reference.factor;
    if (reference.kind == ReferenceKind::OrderUp) {
        ref_cfg.order = base.order + 1;
    }

    std::vector<std::optional<Field>> finals(taus.size());
    std::optional<Field> ref_final;
    std::vector<std::function<void()>> jobs;
    jobs.emplace_back([&] { ref_final = run_trajectory(ref_cfg).final_u; });
    for (std::size_t k = 0; k < taus.size(); ++k) {
        jobs.emplace_back([&, k] {
            RunConfig c = base;
            c.tau = taus[k];
            finals[k] = run_trajectory(c).final_u;
        });
    }
    run_concurrently(std::move(jobs));

    std::vector<ConvergenceRow> rows;
    for (std::size_t k = 0; k < taus.size(); ++k) {
        const auto [linf, l2] = relative_errors(*finals[k], *ref_final);
        ConvergenceRow row{taus[k], linf, l2, std::nullopt, std::nullopt};
        if (k > 0) {
            const double ratio = std::log(taus[k - 1] / taus[k]);
            row.linf_rate = std::log(rows.back().linf_err / linf) / ratio;
            row.l2_rate = std::log(rows.back().l2_err / l2) / ratio;
        }
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Maximum-bound and energy studies

struct MbpRow {
    int order = 0;
    bool rescaled = false;
    double beta = 0.0;
    double max_norm_peak = 0.0;
    long mbp_violations = 0;
    std::optional<long> first_violation;
    /// Step at which a stage left the potential's domain (standard scheme).
    long failed_step = -1;
    RunReport report;
};

/// Standard and rescaled runs of every order from the same initial data.
inline std::vector<MbpRow> mbp_study(const RunConfig& base, const std::vector<int>& orders, long steps) {
    const Potential potential = base.potential.build();
    std::vector<MbpRow> rows;
    for (int r : orders) {
        for (bool rescaled : {false, true}) {
            rows.push_back(MbpRow{r, rescaled, potential.beta, 0.0, 0, std::nullopt, -1, {}});
        }
    }
    std::vector<std::function<void()>> jobs;
    for (auto& row : rows) {
        jobs.emplace_back([&] {
            RunConfig c = base;
            c.order = row.order;
            c.rescaled = row.rescaled;
            c.t_end = static_cast<double>(steps) * base.tau;
            RunResult res = run_trajectory(c, /*tolerate_failure=*/true);
            const RunSummary s = res.report.summary();
            row.max_norm_peak = s.max_norm_peak;
            row.mbp_violations = s.mbp_violations;
            row.first_violation = s.first_mbp_violation;
            row.failed_step = res.failed_step;
            if (res.failure && !row.first_violation) {
                row.first_violation = res.failed_step;
            }
            row.report = std::move(res.report);
        });
    }
    run_concurrently(std::move(jobs));
    return rows;
}

struct EnergyRow {
    int order = 0;
    double tau = 0.0;
    double tau_max = 0.0;
    long dissipation_violations = 0;
    std::optional<long> first_violation;
    double initial_energy = 0.0;
    double final_energy = 0.0;
    RunReport report;
};

inline std::vector<EnergyRow> energy_study(const RunConfig& base, const std::vector<int>& orders,
                                           const std::vector<double>& taus) {
    const Potential potential = base.potential.build();
    const double kappa = base.resolved_kappa(potential);
    std::vector<EnergyRow> rows;
    for (double tau : taus) {
        for (int r : orders) {
            rows.push_back(EnergyRow{r, tau, tau_max(r, kappa, base.nodes, base.rescaled), 0, std::nullopt, 0.0, 0.0, {}});
        }
    }
    std::vector<std::function<void()>> jobs;
    for (auto& row : rows) {
        jobs.emplace_back([&] {
            RunConfig c = base;
            c.order = row.order;
            c.tau = row.tau;
            RunResult res = run_trajectory(c);
            const RunSummary s = res.report.summary();
            row.dissipation_violations = s.dissipation_violations;
            row.first_violation = s.first_dissipation_violation;
            row.initial_energy = res.report.series.front().energy;
            row.final_energy = s.final_energy;
            row.report = std::move(res.report);
        });
    }
    run_concurrently(std::move(jobs));
    return rows;
}

// ---------------------------------------------------------------------------
// Tables

struct SigmaRow {
    int r = 0;
    NodeKind kind = NodeKind::Uniform;
    double sigma_min = 0.0;
};

struct TauMaxRow {
    int r = 0;
    double kappa = 0.0;
    bool rescaled = false;
    double tau_max = 0.0;
};

inline std::vector<SigmaRow> sigma_table(int max_r = 10) {
    std::vector<SigmaRow> rows;
    for (NodeKind kind : {NodeKind::Uniform, NodeKind::ChebyshevLobatto}) {
        for (int r = 1; r <= max_r; ++r) {
            rows.push_back({r, kind, sigma_min(Vandermonde(make_nodes(r, kind)))});
        }
    }
    return rows;
}

inline std::vector<TauMaxRow> tau_max_table(double kappa = 2.0, int max_r = 10, NodeKind kind = NodeKind::Uniform) {
    std::vector<TauMaxRow> rows;
    for (bool rescaled : {false, true}) {
        for (int r = 1; r <= max_r; ++r) {
            rows.push_back({r, kappa, rescaled, tau_max(r, kappa, kind, rescaled)});
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// CSV output

namespace detail {

inline std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    return out;
}

inline std::string opt_str(const std::optional<long>& v) { return v ? std::to_string(*v) : ""; }

inline std::string opt_str(const std::optional<double>& v) { return v ? format_g17(*v) : ""; }

}  // namespace detail

inline void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::string& path) {
    auto out = detail::open_csv(path);
    out << "tau,linf_err,linf_rate,l2_err,l2_rate\n";
    for (const auto& r : rows) {
        out << detail::format_g17(r.tau) << ',' << detail::format_g17(r.linf_err) << ','
            << detail::opt_str(r.linf_rate) << ',' << detail::format_g17(r.l2_err) << ','
            << detail::opt_str(r.l2_rate) << '\n';
    }
}

inline void write_sigma_csv(const std::vector<SigmaRow>& rows, std::ostream& out) {
    out << "r,kind,sigma_min\n";
    char buf[64];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%.3e", row.sigma_min);
        out << row.r << ',' << to_string(row.kind) << ',' << buf << '\n';
    }
}

inline void write_tau_max_csv(const std::vector<TauMaxRow>& rows, std::ostream& out) {
    out << "r,kappa,variant,tau_max\n";
    char buf[64];
    for (const auto& row : rows) {
        if (std::isinf(row.tau_max)) {
            std::snprintf(buf, sizeof buf, "inf");
        } else {
            std::snprintf(buf, sizeof buf, "%.3e", row.tau_max);
        }
        out << row.r << ',' << detail::format_g17(row.kappa) << ',' << (row.rescaled ? "rescaled" : "standard")
            << ',' << buf << '\n';
    }
}

inline void write_mbp_summary_csv(const std::vector<MbpRow>& rows, const std::string& path) {
    auto out = detail::open_csv(path);
    out << "order,variant,beta,max_norm_peak,mbp_violations,first_violation,failed_step\n";
    for (const auto& r : rows) {
        out << r.order << ',' << (r.rescaled ? "rescaled" : "standard") << ',' << detail::format_g17(r.beta) << ','
            << detail::format_g17(r.max_norm_peak) << ',' << r.mbp_violations << ','
            << detail::opt_str(r.first_violation) << ',' << (r.failed_step >= 0 ? std::to_string(r.failed_step) : "")
            << '\n';
    }
}

inline void write_energy_summary_csv(const std::vector<EnergyRow>& rows, const std::string& path) {
    auto out = detail::open_csv(path);
    out << "order,tau,tau_max,dissipation_violations,first_violation,initial_energy,final_energy\n";
    for (const auto& r : rows) {
        out << r.order << ',' << detail::format_g17(r.tau) << ',' << detail::format_g17(r.tau_max) << ','
            << r.dissipation_violations << ',' << detail::opt_str(r.first_violation) << ','
            << detail::format_g17(r.initial_energy) << ',' << detail::format_g17(r.final_energy) << '\n';
    }
}

}  // namespace etdrk
