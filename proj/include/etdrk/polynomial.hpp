#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace etdrk {

struct AbsMax {
    double value = 0.0;
    /// Location in [0, 1] (fraction of the step) where |P| peaks.
    double at = 0.0;
};

inline double horner(std::span<const double> c, double x) {
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) {
        v = v * x + c[k];
    }
    return v;
}

/// Real roots of sum_k c_k x^k inside the open interval (0, 1), from the
/// eigenvalues of the companion matrix. A root counts as real when
/// |imag| <= 1e-10 (1 + |real|); accepted roots get two Newton polishes.
inline std::vector<double> real_roots_in_unit_interval(std::span<const double> c) {
    std::size_t deg = c.size();
    while (deg > 0 && c[deg - 1] == 0.0) {
        --deg;
    }
    std::vector<double> roots;
    if (deg < 2) {
        return roots;
    }
    const int n = static_cast<int>(deg) - 1;
    const double lead = c[deg - 1];
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        companion(i, i - 1) = 1.0;
    }
    for (int i = 0; i < n; ++i) {
        companion(i, n - 1) = -c[i] / lead;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    const auto& ev = solver.eigenvalues();

    std::vector<double> dc(deg > 1 ? deg - 1 : 0);
    for (std::size_t k = 1; k < deg; ++k) {
        dc[k - 1] = static_cast<double>(k) * c[k];
    }
    const std::span<const double> poly = c.first(deg);
    for (int i = 0; i < n; ++i) {
        const double re = ev(i).real();
        if (std::abs(ev(i).imag()) > 1e-10 * (1.0 + std::abs(re))) {
            continue;
        }
        if (re <= -1e-8 || re >= 1.0 + 1e-8) {
            continue;
        }
        double x = re;
        for (int it = 0; it < 2; ++it) {
            const double d = horner(dc, x);
            if (d == 0.0) {
                break;
            }
            const double next = x - horner(poly, x) / d;
            if (!std::isfinite(next) || std::abs(next - x) > 1e-6) {
                break;
            }
            x = next;
        }
        if (x > 0.0 && x < 1.0) {
            roots.push_back(x);
        }
    }
    return roots;
}

/// max_{sigma in [0,1]} |c_0 + c_1 sigma + ... + c_d sigma^d| and its argmax.
/// Candidates are both endpoints plus the real critical points in (0, 1).
inline AbsMax polynomial_abs_max(std::span<const double> c) {
    if (c.size() > 10) {
        throw std::invalid_argument("polynomial_abs_max supports degree <= 9");
    }
    AbsMax best;
    if (c.empty()) {
        return best;
    }
    auto consider = [&](double x) {
        const double v = std::abs(horner(c, x));
        if (v > best.value) {
            best = {v, x};
        }
    };
    consider(0.0);
    consider(1.0);
    std::vector<double> dc(c.size() > 1 ? c.size() - 1 : 0);
    for (std::size_t k = 1; k < c.size(); ++k) {
        dc[k - 1] = static_cast<double>(k) * c[k];
    }
    for (double x : real_roots_in_unit_interval(dc)) {
        consider(x);
    }
    return best;
}

}  // namespace etdrk
