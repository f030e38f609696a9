#pragma once

// Nonlinearities of the Allen-Cahn equation u_t = eps^2 Lap u + f(u), with
// f = -F'. Each potential carries its maximum bound beta and the minimal
// stabilizer kappa_min = max_{|xi| <= beta} |f'(xi)|.

#include "etdrk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace etdrk {

enum class PotentialKind {
    GinzburgLandau,
    FloryHuggins,
    /// f(u) = -slope * u. Makes N = f + slope*I vanish identically; used to
    /// check that the stepper collapses to the linear semigroup.
    Linear,
};

struct Potential {
    PotentialKind kind = PotentialKind::GinzburgLandau;
    double theta = 0.0;
    double theta_c = 0.0;
    double slope = 0.0;
    double beta = 1.0;
    double kappa_min = 2.0;

    static Potential ginzburg_landau();
    static Potential flory_huggins(double theta, double theta_c);
    static Potential linear(double slope);

    std::string name() const;
};

namespace detail {

inline void require_fh_domain(double u) {
    if (!(std::abs(u) < 1.0)) {
        throw DomainError("Flory-Huggins potential evaluated at u = " + std::to_string(u) +
                          " outside (-1, 1)");
    }
}

}  // namespace detail

/// Nonlinear reaction term f(u).
inline double f(const Potential& p, double u) {
    switch (p.kind) {
    case PotentialKind::GinzburgLandau:
        return u - u * u * u;
    case PotentialKind::FloryHuggins:
        detail::require_fh_domain(u);
        return 0.5 * p.theta * std::log((1.0 - u) / (1.0 + u)) + p.theta_c * u;
    case PotentialKind::Linear:
        return -p.slope * u;
    }
    return 0.0;
}

/// Potential F with f = -F'.
inline double F(const Potential& p, double u) {
    switch (p.kind) {
    case PotentialKind::GinzburgLandau: {
        const double w = 1.0 - u * u;
        return 0.25 * w * w;
    }
    case PotentialKind::FloryHuggins:
        detail::require_fh_domain(u);
        return 0.5 * p.theta * ((1.0 + u) * std::log1p(u) + (1.0 - u) * std::log1p(-u)) -
               0.5 * p.theta_c * u * u;
    case PotentialKind::Linear:
        return 0.5 * p.slope * u * u;
    }
    return 0.0;
}

inline double f_prime(const Potential& p, double u) {
    switch (p.kind) {
    case PotentialKind::GinzburgLandau:
        return 1.0 - 3.0 * u * u;
    case PotentialKind::FloryHuggins:
        detail::require_fh_domain(u);
        return -p.theta / (1.0 - u * u) + p.theta_c;
    case PotentialKind::Linear:
        return -p.slope;
    }
    return 0.0;
}

/// Positive root of f (Flory-Huggins) or the well location (Ginzburg-Landau).
///
/// The Flory-Huggins root is bracketed in [1e-12, 1 - 1e-12], bisected to a
/// width of 1e-10 and polished by three Newton steps.
inline double compute_beta(const Potential& p) {
    switch (p.kind) {
    case PotentialKind::GinzburgLandau:
        return 1.0;
    case PotentialKind::Linear:
        return p.beta;
    case PotentialKind::FloryHuggins:
        break;
    }

    double lo = 1e-12;
    double hi = 1.0 - 1e-12;
    const double f_lo = f(p, lo);
    const double f_hi = f(p, hi);
    if (!(f_lo > 0.0 && f_hi < 0.0)) {
        throw ConfigError("Flory-Huggins f has no sign change on (0, 1); need 0 < theta < theta_c");
    }
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (f(p, mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {
        x -= f(p, x) / f_prime(p, x);
    }
    return x;
}

/// max_{|xi| <= beta} |f'(xi)|, evaluated analytically. For both double
/// wells f' is even with its only interior stationary point at 0, so the
/// maximum sits at 0 or at +-beta.
inline double compute_kappa_min(const Potential& p) {
    switch (p.kind) {
    case PotentialKind::GinzburgLandau:
    case PotentialKind::FloryHuggins:
        return std::max(std::abs(f_prime(p, 0.0)), std::abs(f_prime(p, p.beta)));
    case PotentialKind::Linear:
        return std::abs(p.slope);
    }
    return 0.0;
}

inline Potential Potential::ginzburg_landau() {
    Potential p;
    p.kind = PotentialKind::GinzburgLandau;
    p.beta = compute_beta(p);
    p.kappa_min = compute_kappa_min(p);
    return p;
}

inline Potential Potential::flory_huggins(double theta, double theta_c) {
    if (!(theta > 0.0 && theta < theta_c)) {
        throw ConfigError("Flory-Huggins requires 0 < theta < theta_c");
    }
    Potential p;
    p.kind = PotentialKind::FloryHuggins;
    p.theta = theta;
    p.theta_c = theta_c;
    p.beta = compute_beta(p);
    p.kappa_min = compute_kappa_min(p);
    return p;
}

inline Potential Potential::linear(double slope) {
    if (!(slope > 0.0)) {
        throw ConfigError("linear test potential requires slope > 0");
    }
    Potential p;
    p.kind = PotentialKind::Linear;
    p.slope = slope;
    p.beta = 1.0;
    p.kappa_min = slope;
    return p;
}

inline std::string Potential::name() const {
    switch (kind) {
    case PotentialKind::GinzburgLandau:
        return "gl";
    case PotentialKind::FloryHuggins:
        return "fh";
    case PotentialKind::Linear:
        return "linear";
    }
    return "?";
}

}  // namespace etdrk
