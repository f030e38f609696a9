#pragma once

// One step of the order-r exponential time differencing Runge-Kutta scheme
// for u_t = L_kappa u + N(u), N = f + kappa I.
//
// The scheme is built as a cascade. Level 0 is the constant interpolant
// P_0 = N(u^n) (ETDRK1). Level j >= 1 evaluates the level-(j-1) solution
//   w_j(s) = e^{sL} u^n + s phi_1(sL) N(u^n)
//            + tau sum_{m=1}^{j-1} m! (s/tau)^{m+1} phi_{m+1}(sL) c_{j-1,m}
// at the nodes a_{j,k} tau, k = 1..j, and solves V_j c_j = d_j with
// d_{j,k} = N(w_j(a_{j,k} tau)) - N(u^n). The new step is w_r(tau).
//
// With rescaling, every level's polynomial P_j(sigma) = N(u^n) + sum c_{j,m}
// sigma^m is multiplied pointwise by alpha_j = min(kappa beta / max|P_j|, 1),
// which bounds it by kappa beta and keeps every stage inside [-beta, beta].

#include "etdrk/errors.hpp"
#include "etdrk/grid.hpp"
#include "etdrk/phi.hpp"
#include "etdrk/polynomial.hpp"
#include "etdrk/potentials.hpp"
#include "etdrk/scheme.hpp"
#include "etdrk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace etdrk {

/// N(u) = f(u) + kappa u.
inline double stabilized_nonlinearity(const Potential& p, double kappa, double u) { return f(p, u) + kappa * u; }

/// Bernstein coefficients of sum_k c_k sigma^k on [0, 1].
inline void to_bernstein(std::span<const double> c, std::span<double> b) {
    const std::size_t d = c.size() - 1;
    // binom[i][k] computed on the fly; d <= 10.
    for (std::size_t i = 0; i <= d; ++i) {
        double acc = 0.0;
        double ratio = 1.0;  // C(i,k) / C(d,k)
        for (std::size_t k = 0; k <= i; ++k) {
            acc += ratio * c[k];
            ratio *= static_cast<double>(i - k) / static_cast<double>(d - k);
        }
        b[i] = acc;
    }
}

/// Pointwise scaling factor alpha = min(kappa_beta / max_{sigma in [0,1]} |P|, 1)
/// for P = n0 + sum_m coeffs[m-1] sigma^m.
///
/// A Bernstein-coefficient bound settles most points without root finding:
/// it is an upper bound on max|P| and equals it when the largest coefficient
/// sits at an endpoint.
template <class FieldLike>
std::vector<double> rescale_factor(const FieldLike& n0, const std::vector<FieldLike>& coeffs, double kappa_beta) {
    const std::size_t n = n0.size();
    const std::size_t deg = coeffs.size();
    std::vector<double> alpha(n, 1.0);
    std::vector<double> c(deg + 1);
    std::vector<double> b(deg + 1);
    for (std::size_t x = 0; x < n; ++x) {
        c[0] = n0[x];
        for (std::size_t m = 0; m < deg; ++m) {
            c[m + 1] = coeffs[m][x];
        }
        double peak = 0.0;
        if (deg == 0) {
            peak = std::abs(c[0]);
        } else {
            to_bernstein(c, b);
            double bound = 0.0;
            for (double v : b) {
                bound = std::max(bound, std::abs(v));
            }
            if (bound <= kappa_beta) {
                continue;
            }
            const double ends = std::max(std::abs(c[0]), std::abs(horner(c, 1.0)));
            peak = bound <= ends ? ends : polynomial_abs_max(c).value;
        }
        if (peak > kappa_beta) {
            alpha[x] = kappa_beta / peak;
        }
    }
    return alpha;
}

/// Frozen polynomial of one cascade level together with its spectral data.
struct StageState {
    /// Polynomial degree; level 0 is the ETDRK1 constant.
    int level = 0;
    Field u;                      // u^n
    Field n0;                     // N(u^n), unscaled
    std::vector<Field> coeffs;    // c_{level,1..level}, unscaled
    std::vector<double> alpha;    // empty means alpha == 1 everywhere
    std::vector<double> u_hat;    // transforms of u^n, alpha*N(u^n), alpha*c_m
    std::vector<double> n0_hat;
    std::vector<std::vector<double>> coeff_hat;

    double alpha_min() const {
        return alpha.empty() ? 1.0 : *std::min_element(alpha.begin(), alpha.end());
    }
};

struct StepResult {
    Field u;
    /// min over the grid of alpha at the last level (1 without rescaling).
    double alpha_min = 1.0;
    /// min alpha of every level 1..r-1.
    std::vector<double> level_alpha_min;
};

class StepContext {
public:
    StepContext(std::shared_ptr<const SpectralPlan> plan, Potential potential,
                std::shared_ptr<const SchemeSpec> spec, double tau, bool rescaled)
        : plan_(std::move(plan)), potential_(potential), spec_(std::move(spec)), tau_(tau), rescaled_(rescaled) {
        if (!plan_ || !spec_) {
            throw std::invalid_argument("StepContext needs a plan and a scheme");
        }
        if (!(tau > 0.0) || !std::isfinite(tau)) {
            throw ConfigError("time step must be positive and finite");
        }
        if (plan_->kappa() < potential_.kappa_min * (1.0 - 1e-12)) {
            throw ConfigError("kappa = " + std::to_string(plan_->kappa()) +
                              " is below the stabilizer minimum " + std::to_string(potential_.kappa_min));
        }
        const int r = spec_->order();
        stage_kernels_.resize(r);
        for (int level = 1; level < r; ++level) {
            const NodeSet& nodes = spec_->nodes(level);
            for (int k = 1; k <= level; ++k) {
                // Stage values at level `level` come from the level-1 polynomial.
                stage_kernels_[level].push_back(make_kernel(level - 1, nodes.nodes[k] * tau_));
            }
        }
        final_kernel_ = make_kernel(r - 1, tau_);
    }

    const SpectralPlan& plan() const { return *plan_; }
    std::shared_ptr<const SpectralPlan> plan_ptr() const { return plan_; }
    const Potential& potential() const { return potential_; }
    const SchemeSpec& spec() const { return *spec_; }
    std::shared_ptr<const SchemeSpec> spec_ptr() const { return spec_; }
    double tau() const { return tau_; }
    bool rescaled() const { return rescaled_; }
    double kappa() const { return plan_->kappa(); }
    double kappa_beta() const { return plan_->kappa() * potential_.beta; }

    /// Level-0 state (constant interpolant) for u^n.
    StageState initial_state(const Field& u) const {
        require_same_mesh(u.mesh(), plan_->mesh());
        StageState st{0, u, nonlinearity(u, 0, 0), {}, {}, {}, {}, {}};
        st.u_hat = transform(u.values());
        st.n0_hat = transform(st.n0.values());
        return st;
    }

    /// Builds the level-(prev.level+1) polynomial from stage values of prev.
    StageState advance_level(const StageState& prev) const {
        const int level = prev.level + 1;
        if (level >= spec_->order()) {
            throw std::logic_error("cascade already at the scheme order");
        }
        std::vector<Field> d;
        d.reserve(level);
        for (int k = 1; k <= level; ++k) {
            const Field w = evaluate(prev, stage_kernels_[level][k - 1]);
            check_finite(w, level, k);
            Field nd = nonlinearity(w, level, k);
            for (std::size_t x = 0; x < nd.size(); ++x) {
                nd[x] -= prev.n0[x];
            }
            d.push_back(std::move(nd));
        }
        StageState st{level, prev.u, prev.n0, spec_->vandermonde(level).solve_fields(d), {}, prev.u_hat, {}, {}};
        if (rescaled_) {
            st.alpha = rescale_factor(st.n0, st.coeffs, kappa_beta());
            if (std::all_of(st.alpha.begin(), st.alpha.end(), [](double a) { return a == 1.0; })) {
                st.alpha.clear();
            }
        }
        if (st.alpha.empty()) {
            st.n0_hat = prev.alpha.empty() ? prev.n0_hat : transform(st.n0.values());
            for (const Field& c : st.coeffs) {
                st.coeff_hat.push_back(transform(c.values()));
            }
        } else {
            st.n0_hat = transform(scaled(st.n0, st.alpha));
            for (const Field& c : st.coeffs) {
                st.coeff_hat.push_back(transform(scaled(c, st.alpha)));
            }
        }
        return st;
    }

    /// w_{state.level+1}(s) for s in (0, tau].
    Field evaluate_stage(const StageState& state, double s) const {
        if (!(s > 0.0) || s > tau_ * (1.0 + 1e-14)) {
            throw std::invalid_argument("stage time must lie in (0, tau]");
        }
        return evaluate(state, make_kernel(state.level, s));
    }

    StepResult step(const Field& u) const {
        if (!u.all_finite()) {
            throw NumericalBlowup("non-finite input to step");
        }
        StageState st = initial_state(u);
        StepResult result{u, 1.0, {}};
        for (int level = 1; level < spec_->order(); ++level) {
            st = advance_level(st);
            result.level_alpha_min.push_back(st.alpha_min());
        }
        result.u = evaluate(st, final_kernel_);
        check_finite(result.u, spec_->order(), 0);
        result.alpha_min = st.alpha_min();
        return result;
    }

private:
    // Per-mode weights of the increment w(s) - u for a polynomial of the given
    // degree: weights[0] = e^{s lam} - 1 = s lam phi_1(s lam), weights[1] = s phi_1(s lam),
    // weights[m+1] = tau m! (s/tau)^{m+1} phi_{m+1}(s lam).
    struct Kernel {
        double s = 0.0;
        std::vector<std::vector<double>> weights;
    };

    Kernel make_kernel(int degree, double s) const {
        const auto lam = plan_->eigenvalues();
        Kernel k{s, std::vector<std::vector<double>>(degree + 2, std::vector<double>(lam.size()))};
        const double ratio = s / tau_;
        for (int m = 0; m <= degree + 1; ++m) {
            double scale = 1.0;
            if (m == 1) {
                scale = s;
            } else if (m >= 2) {
                double fact = 1.0;
                for (int q = 2; q < m; ++q) {
                    fact *= q;
                }
                scale = tau_ * fact * std::pow(ratio, m);
            }
            for (std::size_t x = 0; x < lam.size(); ++x) {
                k.weights[m][x] = m == 0 ? s * lam[x] * phi(1, s * lam[x]) : scale * phi(m, s * lam[x]);
            }
        }
        return k;
    }

    Field evaluate(const StageState& st, const Kernel& k) const {
        const std::size_t n = st.u_hat.size();
        std::vector<double> acc(n);
        const auto& w = k.weights;
        for (std::size_t x = 0; x < n; ++x) {
            acc[x] = w[0][x] * st.u_hat[x] + w[1][x] * st.n0_hat[x];
        }
        for (std::size_t m = 0; m < st.coeff_hat.size(); ++m) {
            const auto& wm = w[m + 2];
            const auto& cm = st.coeff_hat[m];
            for (std::size_t x = 0; x < n; ++x) {
                acc[x] += wm[x] * cm[x];
            }
        }
        Field out(plan_->mesh());
        plan_->inverse_destructive(acc, out.values());
        for (std::size_t x = 0; x < out.size(); ++x) {
            out[x] += st.u[x];
        }
        return out;
    }

    std::vector<double> transform(std::span<const double> v) const {
        std::vector<double> out(v.size());
        plan_->forward(v, out);
        return out;
    }

    static std::vector<double> scaled(const Field& v, const std::vector<double>& alpha) {
        std::vector<double> out(v.size());
        for (std::size_t x = 0; x < out.size(); ++x) {
            out[x] = alpha[x] * v[x];
        }
        return out;
    }

    Field nonlinearity(const Field& w, int level, int stage) const {
        Field out(w.mesh());
        const double kappa = plan_->kappa();
        try {
            for (std::size_t x = 0; x < w.size(); ++x) {
                out[x] = stabilized_nonlinearity(potential_, kappa, w[x]);
            }
        } catch (const DomainError& e) {
            throw BoundExceeded(level, stage,
                                "stage value left the potential's domain at level " + std::to_string(level) +
                                    ", stage " + std::to_string(stage) + ": " + e.what());
        }
        return out;
    }

    static void check_finite(const Field& w, int level, int stage) {
        if (!w.all_finite()) {
            throw NumericalBlowup("non-finite value at level " + std::to_string(level) + ", stage " +
                                  std::to_string(stage));
        }
    }

    std::shared_ptr<const SpectralPlan> plan_;
    Potential potential_;
    std::shared_ptr<const SchemeSpec> spec_;
    double tau_;
    bool rescaled_;
    std::vector<std::vector<Kernel>> stage_kernels_;
    Kernel final_kernel_;
};

}  // namespace etdrk
