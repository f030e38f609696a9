#include "etdrk/spectral.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace etdrk;

namespace {

Field random_field(const Mesh2D& m, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Field u(m);
    for (std::size_t k = 0; k < u.size(); ++k) {
        u[k] = dist(rng);
    }
    return u;
}

double max_abs_diff(const Field& a, const Field& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        d = std::max(d, std::abs(a[k] - b[k]));
    }
    return d;
}

double factorial(int j) {
    double v = 1.0;
    for (int k = 2; k <= j; ++k) {
        v *= k;
    }
    return v;
}

}  // namespace

TEST(SpectralPlan, EigenvaluesBelowMinusKappa) {
    const SpectralPlan plan(Mesh2D::square_2pi(16), 0.1, 2.0);
    const auto lam = plan.eigenvalues();
    EXPECT_EQ(lam[0], -2.0);
    for (double l : lam) {
        EXPECT_LE(l, -2.0);
    }
}

TEST(SpectralPlan, RejectsBadParameters) {
    EXPECT_THROW(SpectralPlan(Mesh2D::square_2pi(8), 0.0, 2.0), ConfigError);
    EXPECT_THROW(SpectralPlan(Mesh2D::square_2pi(8), 0.1, 0.0), ConfigError);
}

TEST(SpectralPlan, EigenvaluesMatchDenseOperator) {
    const Mesh2D m(2.0, 3.0, 6, 5);
    const SpectralPlan plan(m, 0.4, 1.5);
    const oracle::DenseOperator op(m, 0.4, 1.5);
    std::vector<double> ours(plan.eigenvalues().begin(), plan.eigenvalues().end());
    std::sort(ours.begin(), ours.end());
    for (std::size_t k = 0; k < ours.size(); ++k) {
        EXPECT_NEAR(ours[k], op.lam(static_cast<Eigen::Index>(k)), 1e-12);
    }
}

TEST(Transform, ConstantMapsToDcMode) {
    for (auto backend : {TransformBackend::Fast, TransformBackend::Dense}) {
        const Mesh2D m = Mesh2D::square_2pi(16);
        const SpectralPlan plan(m, 0.1, 2.0, backend);
        const SpectralField uh = plan.to_spectral(Field(m, 3.0));
        // Isometry: the DC coefficient carries the whole h-weighted norm.
        EXPECT_NEAR(uh.coeffs[0], 3.0 * 2.0 * std::numbers::pi, 1e-12);
        for (std::size_t k = 1; k < uh.coeffs.size(); ++k) {
            EXPECT_NEAR(uh.coeffs[k], 0.0, 1e-12);
        }
    }
}

TEST(Transform, RoundTrip) {
    for (int n : {8, 33, 64, 128}) {
        const Mesh2D m(1.5, 2.5, n, n + 3);
        const SpectralPlan plan(m, 0.1, 2.0);
        const Field u = random_field(m, static_cast<unsigned>(n));
        const Field back = plan.from_spectral(plan.to_spectral(u));
        EXPECT_LT(max_abs_diff(u, back), 1e-13 * max_norm(u)) << n;
    }
}

TEST(Transform, IsometryInWeightedNorm) {
    const Mesh2D m(1.5, 2.5, 40, 24);
    const SpectralPlan plan(m, 0.1, 2.0);
    const Field u = random_field(m, 3);
    const SpectralField uh = plan.to_spectral(u);
    double s = 0.0;
    for (double c : uh.coeffs) {
        s += c * c;
    }
    EXPECT_NEAR(std::sqrt(s), l2_norm(u), 1e-12 * l2_norm(u));
}

TEST(Transform, MatchesExplicitCosineMatrix) {
    const Mesh2D m = Mesh2D::square_2pi(8);
    const SpectralPlan plan(m, 0.1, 2.0, TransformBackend::Fast);
    const Field u = random_field(m, 4);
    const SpectralField uh = plan.to_spectral(u);
    const int n = 8;
    auto basis = [&](int p, int i) {
        const double s = p == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
        return s * std::cos(p * std::numbers::pi * (i + 0.5) / n);
    };
    const double w = std::sqrt(m.cell_area());
    for (int q = 0; q < n; ++q) {
        for (int p = 0; p < n; ++p) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) {
                for (int i = 0; i < n; ++i) {
                    acc += basis(p, i) * basis(q, j) * u(i, j);
                }
            }
            EXPECT_NEAR(uh.coeffs[m.index(p, q)], w * acc, 1e-12);
        }
    }
}

TEST(Transform, FastAndDenseAgree) {
    const Mesh2D m(3.0, 2.0, 24, 17);
    const SpectralPlan fast(m, 0.1, 2.0, TransformBackend::Fast);
    const SpectralPlan dense(m, 0.1, 2.0, TransformBackend::Dense);
    const Field u = random_field(m, 5);
    const auto a = fast.to_spectral(u);
    const auto b = dense.to_spectral(u);
    for (std::size_t k = 0; k < a.coeffs.size(); ++k) {
        EXPECT_NEAR(a.coeffs[k], b.coeffs[k], 1e-12);
    }
    EXPECT_LT(max_abs_diff(fast.from_spectral(a), dense.from_spectral(a)), 1e-12);
}

TEST(Transform, MeshMismatchThrows) {
    const SpectralPlan plan(Mesh2D::square_2pi(8), 0.1, 2.0);
    EXPECT_THROW(plan.to_spectral(Field(Mesh2D::square_2pi(16))), MeshMismatch);
}

TEST(ApplyPhi, ConstantDecays) {
    const Mesh2D m = Mesh2D::square_2pi(16);
    const SpectralPlan plan(m, 0.1, 2.0);
    const Field out = plan.apply_phi(0, 0.3, Field(m, 1.0));
    for (std::size_t k = 0; k < out.size(); ++k) {
        EXPECT_NEAR(out[k], std::exp(-0.6), 1e-14);
    }
}

TEST(ApplyPhi, SmallTimeLimit) {
    const Mesh2D m = Mesh2D::square_2pi(16);
    const SpectralPlan plan(m, 0.1, 2.0);
    const Field v = random_field(m, 6);
    const Field out = plan.apply_phi(2, 1e-12, v);
    for (std::size_t k = 0; k < out.size(); ++k) {
        EXPECT_NEAR(out[k], 0.5 * v[k], 1e-9);
    }
}

TEST(ApplyPhi, MatchesDenseEigendecomposition) {
    const Mesh2D m = Mesh2D::square_2pi(8);
    for (auto backend : {TransformBackend::Fast, TransformBackend::Dense}) {
        const SpectralPlan plan(m, 0.3, 2.0, backend);
        const oracle::DenseOperator op(m, 0.3, 2.0);
        const Field v = random_field(m, 7);
        for (int j = 0; j <= 5; ++j) {
            for (double s : {0.01, 0.5, 3.0}) {
                const Eigen::VectorXd ref = op.phi(j, s, oracle::to_vec(v));
                const Eigen::VectorXd got = oracle::to_vec(plan.apply_phi(j, s, v));
                EXPECT_LT(oracle::rel_l2(got, ref), 1e-10) << "j=" << j << " s=" << s;
            }
        }
    }
}

TEST(ApplyPhi, RejectsNonPositiveTime) {
    const Mesh2D m = Mesh2D::square_2pi(8);
    const SpectralPlan plan(m, 0.1, 2.0);
    EXPECT_THROW(plan.apply_phi(1, 0.0, Field(m)), std::invalid_argument);
}

TEST(ApplyPhi, NormBoundAndMonotonicity) {
    const Mesh2D m = Mesh2D::square_2pi(32);
    const SpectralPlan plan(m, 0.1, 2.0);
    for (unsigned seed = 0; seed < 5; ++seed) {
        const Field v = random_field(m, seed);
        const double nv = l2_norm(v);
        for (int k = 0; k <= 6; ++k) {
            for (double t : {0.01, 0.1, 1.0}) {
                const double base = l2_norm(plan.apply_phi(k, t, v));
                EXPECT_LE(base, nv / factorial(k) + 1e-12);
                if (k == 0) {
                    // lambda -> e^{lambda t L} grows as lambda shrinks; the
                    // monotonicity holds for k >= 1 only.
                    continue;
                }
                for (double lambda : {0.1, 0.5, 0.9}) {
                    const double scaled = std::pow(lambda, k) * l2_norm(plan.apply_phi(k, lambda * t, v));
                    EXPECT_LE(scaled, base + 1e-12);
                }
            }
        }
    }
}

TEST(ApplyPhi, MaxNormContraction) {
    const Mesh2D m = Mesh2D::square_2pi(32);
    const SpectralPlan plan(m, 0.5, 2.0);
    for (unsigned seed = 0; seed < 5; ++seed) {
        const Field v = random_field(m, seed);
        for (double t : {0.01, 0.1, 1.0, 10.0}) {
            EXPECT_LE(max_norm(plan.apply_phi(0, t, v)), std::exp(-2.0 * t) * max_norm(v) + 1e-12);
        }
    }
}

TEST(ApplyPhi, Linear) {
    const Mesh2D m = Mesh2D::square_2pi(32);
    const SpectralPlan plan(m, 0.1, 2.0);
    const Field v = random_field(m, 1);
    const Field w = random_field(m, 2);
    Field comb(m);
    for (std::size_t k = 0; k < comb.size(); ++k) {
        comb[k] = 1.5 * v[k] - 0.25 * w[k];
    }
    for (int j = 0; j <= 3; ++j) {
        const Field lhs = plan.apply_phi(j, 0.7, comb);
        const Field a = plan.apply_phi(j, 0.7, v);
        const Field b = plan.apply_phi(j, 0.7, w);
        for (std::size_t k = 0; k < lhs.size(); ++k) {
            EXPECT_NEAR(lhs[k], 1.5 * a[k] - 0.25 * b[k], 1e-12);
        }
    }
}

TEST(ApplyPhi, SemigroupProperty) {
    const Mesh2D m = Mesh2D::square_2pi(48);
    const SpectralPlan plan(m, 0.2, 2.0);
    const Field v = random_field(m, 8);
    const Field twice = plan.apply_phi(0, 0.3, plan.apply_phi(0, 0.2, v));
    const Field once = plan.apply_phi(0, 0.5, v);
    EXPECT_LT(max_abs_diff(twice, once), 1e-13);
}
