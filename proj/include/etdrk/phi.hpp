#pragma once

// phi-functions of non-positive real arguments:
//   phi_0(z) = e^z,  phi_j(z) = (e^z - sum_{k<j} z^k/k!) / z^j,  phi_j(0) = 1/j!.

#include "etdrk/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace etdrk {

/// Evaluation parameters. For index j the Taylor branch covers
/// |z| <= max(small_arg_threshold, j / 2); beyond that the value comes from
/// the upward recurrence phi_{k+1} = (phi_k - 1/k!) / z seeded with
/// expm1(z)/z, which is cancellation-free once |z| is comparable to j.
struct PhiTable {
    int max_index = 10;
    double small_arg_threshold = 0.5;
    int taylor_terms = 200;

    double taylor_radius(int j) const { return std::max(small_arg_threshold, 0.5 * j); }
};

inline constexpr PhiTable kDefaultPhiTable{};

namespace detail {

inline double inv_factorial(int j) {
    double v = 1.0;
    for (int k = 2; k <= j; ++k) {
        v /= k;
    }
    return v;
}

}  // namespace detail

/// Series sum_{k>=0} z^k / (k+j)!. Stops once a term no longer changes the sum.
inline double phi_taylor(int j, double z, int max_terms = kDefaultPhiTable.taylor_terms) {
    double term = detail::inv_factorial(j);
    double sum = 0.0;
    for (int k = 0; k < max_terms; ++k) {
        const double next = sum + term;
        if (next == sum) {
            break;
        }
        sum = next;
        term *= z / (k + 1 + j);
    }
    return sum;
}

/// Upward recurrence from phi_1 = expm1(z)/z. Requires z != 0.
inline double phi_recurrence(int j, double z) {
    if (j == 0) {
        return std::exp(z);
    }
    double p = std::expm1(z) / z;
    double fact = 1.0;
    for (int k = 1; k < j; ++k) {
        fact *= k;
        p = (p - 1.0 / fact) / z;
    }
    return p;
}

inline double phi(int j, double z, const PhiTable& table = kDefaultPhiTable) {
    if (j < 0) {
        throw std::invalid_argument("phi index must be non-negative");
    }
    if (z > 0.0 || std::isnan(z)) {
        throw DomainError("phi is only defined here for z <= 0 (got " + std::to_string(z) + ")");
    }
    if (j == 0) {
        return std::exp(z);
    }
    if (-z <= table.taylor_radius(j)) {
        return phi_taylor(j, z, table.taylor_terms);
    }
    return phi_recurrence(j, z);
}

inline std::vector<double> phi_batch(int j, std::span<const double> zs, const PhiTable& table = kDefaultPhiTable) {
    std::vector<double> out;
    out.reserve(zs.size());
    for (double z : zs) {
        out.push_back(phi(j, z, table));
    }
    return out;
}

}  // namespace etdrk
