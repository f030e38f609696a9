#pragma once

// Stabilized linear operator L_kappa = eps^2 Lap_h - kappa I with the
// cell-centered, homogeneous-Neumann 5-point Laplacian. The operator is
// diagonal in the 2D cosine (DCT-II) basis, so functions of it are applied
// exactly: phi_j(s L) v = C^T diag(phi_j(s lambda)) C v.
//
// Spectral coefficients carry a sqrt(hx*hy) factor, which makes the forward
// transform an isometry from the h-weighted L2 inner product to the plain
// Euclidean one.

#include "etdrk/errors.hpp"
#include "etdrk/grid.hpp"
#include "etdrk/phi.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace etdrk {

enum class TransformBackend {
    /// FFTW for large grids, dense for nx, ny <= 32.
    Auto,
    /// O(n log n) DCT through FFTW (REDFT10 / REDFT01).
    Fast,
    /// Explicit orthonormal cosine matrices; only meant for small grids.
    Dense,
};

struct SpectralField {
    Mesh2D mesh;
    std::vector<double> coeffs;  // index p + nx * q
};

namespace detail {

// FFTW's planner is not thread-safe; execution with new arrays is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwPlanDeleter {
    void operator()(fftw_plan_s* plan) const {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
};

using FftwPlanPtr = std::unique_ptr<fftw_plan_s, FftwPlanDeleter>;

/// Orthonormal DCT-II matrix: C[p][i] = s_p cos(p pi (i + 1/2) / n).
inline std::vector<double> cosine_matrix(int n) {
    std::vector<double> c(static_cast<std::size_t>(n) * n);
    for (int p = 0; p < n; ++p) {
        const double scale = p == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
        for (int i = 0; i < n; ++i) {
            c[static_cast<std::size_t>(p) * n + i] = scale * std::cos(std::numbers::pi * p * (i + 0.5) / n);
        }
    }
    return c;
}

}  // namespace detail

class SpectralPlan {
public:
    SpectralPlan(const Mesh2D& mesh, double eps, double kappa, TransformBackend backend = TransformBackend::Auto)
        : mesh_(mesh), eps_(eps), kappa_(kappa) {
        if (!(eps > 0.0) || !(kappa > 0.0)) {
            throw ConfigError("SpectralPlan needs eps > 0 and kappa > 0");
        }
        const int nx = mesh.nx();
        const int ny = mesh.ny();
        if (backend == TransformBackend::Auto) {
            backend = (nx <= 32 && ny <= 32) ? TransformBackend::Dense : TransformBackend::Fast;
        }
        backend_ = backend;

        std::vector<double> mux(nx);
        std::vector<double> muy(ny);
        for (int p = 0; p < nx; ++p) {
            const double sn = std::sin(p * std::numbers::pi / (2.0 * nx));
            mux[p] = -4.0 / (mesh.hx() * mesh.hx()) * sn * sn;
        }
        for (int q = 0; q < ny; ++q) {
            const double sn = std::sin(q * std::numbers::pi / (2.0 * ny));
            muy[q] = -4.0 / (mesh.hy() * mesh.hy()) * sn * sn;
        }
        eigvals_.resize(mesh.size());
        for (int q = 0; q < ny; ++q) {
            for (int p = 0; p < nx; ++p) {
                eigvals_[mesh.index(p, q)] = eps * eps * (mux[p] + muy[q]) - kappa;
            }
        }

        // Per-dimension scalings turning FFTW's unnormalized transforms into
        // the orthonormal pair, folded together with the sqrt(hx*hy) weight.
        const double weight = std::sqrt(mesh.cell_area());
        fwd_scale_x_.resize(nx);
        inv_scale_x_.resize(nx);
        fwd_scale_y_.resize(ny);
        inv_scale_y_.resize(ny);
        for (int p = 0; p < nx; ++p) {
            fwd_scale_x_[p] = p == 0 ? std::sqrt(1.0 / (4.0 * nx)) : std::sqrt(1.0 / (2.0 * nx));
            inv_scale_x_[p] = p == 0 ? std::sqrt(1.0 / nx) : std::sqrt(1.0 / (2.0 * nx));
        }
        for (int q = 0; q < ny; ++q) {
            fwd_scale_y_[q] = (q == 0 ? std::sqrt(1.0 / (4.0 * ny)) : std::sqrt(1.0 / (2.0 * ny))) * weight;
            inv_scale_y_[q] = (q == 0 ? std::sqrt(1.0 / ny) : std::sqrt(1.0 / (2.0 * ny))) / weight;
        }

        if (backend_ == TransformBackend::Fast) {
            std::vector<double> a(mesh.size());
            std::vector<double> b(mesh.size());
            const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT;
            std::lock_guard lock(detail::fftw_planner_mutex());
            // Row-major with i fastest, so the slow FFTW dimension is y.
            forward_plan_.reset(fftw_plan_r2r_2d(ny, nx, a.data(), b.data(), FFTW_REDFT10, FFTW_REDFT10, flags));
            inverse_plan_.reset(fftw_plan_r2r_2d(ny, nx, a.data(), b.data(), FFTW_REDFT01, FFTW_REDFT01, flags));
            if (!forward_plan_ || !inverse_plan_) {
                throw std::runtime_error("FFTW failed to create a DCT plan");
            }
        } else {
            cx_ = detail::cosine_matrix(nx);
            cy_ = detail::cosine_matrix(ny);
        }
    }

    const Mesh2D& mesh() const { return mesh_; }
    double eps() const { return eps_; }
    double kappa() const { return kappa_; }
    TransformBackend backend() const { return backend_; }

    /// Eigenvalues of L_kappa, indexed like spectral coefficients.
    std::span<const double> eigenvalues() const { return eigvals_; }

    /// Raw transforms on contiguous buffers of mesh().size() entries.
    /// `in` and `out` must not alias.
    void forward(std::span<const double> in, std::span<double> out) const {
        check_size(in.size(), out.size());
        if (backend_ == TransformBackend::Fast) {
            fftw_execute_r2r(forward_plan_.get(), const_cast<double*>(in.data()), out.data());
            scale(out, fwd_scale_x_, fwd_scale_y_);
        } else {
            dense_apply(in, out, /*transpose=*/false);
            scale(out, std::vector<double>(mesh_.nx(), 1.0), dense_weight(true));
        }
    }

    void inverse(std::span<const double> in, std::span<double> out) const {
        check_size(in.size(), out.size());
        if (backend_ == TransformBackend::Fast) {
            std::vector<double> scaled(in.begin(), in.end());
            scale(scaled, inv_scale_x_, inv_scale_y_);
            fftw_execute_r2r(inverse_plan_.get(), scaled.data(), out.data());
        } else {
            dense_apply(in, out, /*transpose=*/true);
            scale(out, std::vector<double>(mesh_.nx(), 1.0), dense_weight(false));
        }
    }

    /// Same as inverse() but scales `in` in place, saving a copy. Used by the
    /// stepper on its own scratch buffers.
    void inverse_destructive(std::span<double> in, std::span<double> out) const {
        check_size(in.size(), out.size());
        if (backend_ == TransformBackend::Fast) {
            scale(in, inv_scale_x_, inv_scale_y_);
            fftw_execute_r2r(inverse_plan_.get(), in.data(), out.data());
        } else {
            inverse(in, out);
        }
    }

    SpectralField to_spectral(const Field& u) const {
        require_same_mesh(u.mesh(), mesh_);
        SpectralField out{mesh_, std::vector<double>(mesh_.size())};
        forward(u.values(), out.coeffs);
        return out;
    }

    Field from_spectral(const SpectralField& uh) const {
        require_same_mesh(uh.mesh, mesh_);
        Field out(mesh_);
        inverse(uh.coeffs, out.values());
        return out;
    }

    /// phi_j(s L_kappa) v. With j = 0 this is the semigroup e^{s L_kappa}.
    Field apply_phi(int j, double s, const Field& v) const {
        if (!(s > 0.0)) {
            throw std::invalid_argument("apply_phi needs s > 0");
        }
        SpectralField vh = to_spectral(v);
        for (std::size_t k = 0; k < vh.coeffs.size(); ++k) {
            vh.coeffs[k] *= phi(j, s * eigvals_[k]);
        }
        return from_spectral(vh);
    }

private:
    void check_size(std::size_t a, std::size_t b) const {
        if (a != mesh_.size() || b != mesh_.size()) {
            throw MeshMismatch("transform buffer size does not match the plan's mesh");
        }
    }

    void scale(std::span<double> buf, const std::vector<double>& sx, const std::vector<double>& sy) const {
        const int nx = mesh_.nx();
        for (int q = 0; q < mesh_.ny(); ++q) {
            double* row = buf.data() + static_cast<std::size_t>(q) * nx;
            for (int p = 0; p < nx; ++p) {
                row[p] *= sx[p] * sy[q];
            }
        }
    }

    std::vector<double> dense_weight(bool forward) const {
        const double w = std::sqrt(mesh_.cell_area());
        return std::vector<double>(mesh_.ny(), forward ? w : 1.0 / w);
    }

    // out = (Cy kron Cx) in, or its transpose.
    void dense_apply(std::span<const double> in, std::span<double> out, bool transpose) const {
        const int nx = mesh_.nx();
        const int ny = mesh_.ny();
        auto cx = [&](int a, int b) { return transpose ? cx_[static_cast<std::size_t>(b) * nx + a] : cx_[static_cast<std::size_t>(a) * nx + b]; };
        auto cy = [&](int a, int b) { return transpose ? cy_[static_cast<std::size_t>(b) * ny + a] : cy_[static_cast<std::size_t>(a) * ny + b]; };
        std::vector<double> tmp(mesh_.size(), 0.0);
        for (int j = 0; j < ny; ++j) {
            for (int p = 0; p < nx; ++p) {
                double s = 0.0;
                for (int i = 0; i < nx; ++i) {
                    s += cx(p, i) * in[static_cast<std::size_t>(j) * nx + i];
                }
                tmp[static_cast<std::size_t>(j) * nx + p] = s;
            }
        }
        for (int q = 0; q < ny; ++q) {
            for (int p = 0; p < nx; ++p) {
                double s = 0.0;
                for (int j = 0; j < ny; ++j) {
                    s += cy(q, j) * tmp[static_cast<std::size_t>(j) * nx + p];
                }
                out[static_cast<std::size_t>(q) * nx + p] = s;
            }
        }
    }

    Mesh2D mesh_;
    double eps_;
    double kappa_;
    TransformBackend backend_ = TransformBackend::Fast;
    std::vector<double> eigvals_;
    std::vector<double> fwd_scale_x_, fwd_scale_y_, inv_scale_x_, inv_scale_y_;
    detail::FftwPlanPtr forward_plan_;
    detail::FftwPlanPtr inverse_plan_;
    std::vector<double> cx_, cy_;
};

}  // namespace etdrk
