#pragma once

// Uniform cell-centered mesh on [0, lx] x [0, ly], grid functions, discrete
// norms and the discrete Allen-Cahn energy.

#include "etdrk/errors.hpp"
#include "etdrk/potentials.hpp"

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace etdrk {

class Mesh2D {
public:
    Mesh2D(double lx, double ly, int nx, int ny) : lx_(lx), ly_(ly), nx_(nx), ny_(ny) {
        if (nx < 2 || ny < 2) {
            throw ConfigError("mesh needs at least 2 cells per dimension");
        }
        if (!(lx > 0.0 && ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
            throw ConfigError("mesh edge lengths must be positive and finite");
        }
    }

    /// Square (0, 2 pi)^2 domain with n cells per side.
    static Mesh2D square_2pi(int n) { return Mesh2D(2.0 * std::numbers::pi, 2.0 * std::numbers::pi, n, n); }

    double lx() const { return lx_; }
    double ly() const { return ly_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double hx() const { return lx_ / nx_; }
    double hy() const { return ly_ / ny_; }
    double cell_area() const { return hx() * hy(); }
    std::size_t size() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_); }

    double x(int i) const { return (i + 0.5) * hx(); }
    double y(int j) const { return (j + 0.5) * hy(); }

    /// Storage is i-fastest: index = i + nx * j.
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx_) * static_cast<std::size_t>(j);
    }

    bool operator==(const Mesh2D&) const = default;

private:
    double lx_;
    double ly_;
    int nx_;
    int ny_;
};

class Field {
public:
    explicit Field(const Mesh2D& mesh, double value = 0.0) : mesh_(mesh), values_(mesh.size(), value) {}

    Field(const Mesh2D& mesh, std::vector<double> values) : mesh_(mesh), values_(std::move(values)) {
        if (values_.size() != mesh_.size()) {
            throw MeshMismatch("field value count does not match mesh size");
        }
    }

    /// Samples fn at cell centers.
    static Field sample(const Mesh2D& mesh, const std::function<double(double, double)>& fn) {
        Field u(mesh);
        for (int j = 0; j < mesh.ny(); ++j) {
            for (int i = 0; i < mesh.nx(); ++i) {
                u(i, j) = fn(mesh.x(i), mesh.y(j));
            }
        }
        return u;
    }

    const Mesh2D& mesh() const { return mesh_; }
    std::size_t size() const { return values_.size(); }

    double& operator[](std::size_t k) { return values_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }
    double& operator()(int i, int j) { return values_[mesh_.index(i, j)]; }
    double operator()(int i, int j) const { return values_[mesh_.index(i, j)]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }

    bool all_finite() const {
        for (double v : values_) {
            if (!std::isfinite(v)) {
                return false;
            }
        }
        return true;
    }

private:
    Mesh2D mesh_;
    std::vector<double> values_;
};

inline void require_same_mesh(const Mesh2D& a, const Mesh2D& b) {
    if (!(a == b)) {
        throw MeshMismatch("fields live on different meshes");
    }
}

/// Pairwise (cascade) summation of term(0) + ... + term(n-1). The split is
/// fixed by n alone, so results are reproducible bit for bit.
template <class Term>
double pairwise_sum(std::size_t begin, std::size_t end, const Term& term) {
    constexpr std::size_t kBlock = 16;
    if (end - begin <= kBlock) {
        double s = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            s += term(k);
        }
        return s;
    }
    const std::size_t mid = begin + (end - begin) / 2;
    return pairwise_sum(begin, mid, term) + pairwise_sum(mid, end, term);
}

inline double pairwise_sum(std::span<const double> xs) {
    return pairwise_sum(0, xs.size(), [&](std::size_t k) { return xs[k]; });
}

inline double max_norm(const Field& u) {
    double m = 0.0;
    for (double v : u.values()) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

inline double inner(const Field& u, const Field& v) {
    require_same_mesh(u.mesh(), v.mesh());
    return u.mesh().cell_area() * pairwise_sum(0, u.size(), [&](std::size_t k) { return u[k] * v[k]; });
}

inline double l2_norm(const Field& u) { return std::sqrt(inner(u, u)); }

/// h-weighted sum of (eps^2/2)|grad_h u|^2 + F(u). Gradients are forward
/// differences on interior faces; boundary faces carry zero flux.
///
/// Throws DomainError when F is undefined at some cell value.
inline double discrete_energy(const Field& u, double eps, const Potential& p) {
    const Mesh2D& m = u.mesh();
    const int nx = m.nx();
    const int ny = m.ny();
    const double ihx2 = 1.0 / (m.hx() * m.hx());
    const double ihy2 = 1.0 / (m.hy() * m.hy());

    // One term per cell: the face to its right, the face above it and F(u).
    const double sum = pairwise_sum(0, u.size(), [&](std::size_t k) {
        const int i = static_cast<int>(k % static_cast<std::size_t>(nx));
        const int j = static_cast<int>(k / static_cast<std::size_t>(nx));
        double grad = 0.0;
        if (i + 1 < nx) {
            const double d = u[k + 1] - u[k];
            grad += d * d * ihx2;
        }
        if (j + 1 < ny) {
            const double d = u[k + static_cast<std::size_t>(nx)] - u[k];
            grad += d * d * ihy2;
        }
        return 0.5 * eps * eps * grad + F(p, u[k]);
    });
    return m.cell_area() * sum;
}

/// Writes `i,j,x,y,u` rows in storage order.
inline void write_field_csv(const Field& u, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out << "i,j,x,y,u\n";
    const Mesh2D& m = u.mesh();
    char line[160];
    for (int j = 0; j < m.ny(); ++j) {
        for (int i = 0; i < m.nx(); ++i) {
            std::snprintf(line, sizeof line, "%d,%d,%.17g,%.17g,%.17g\n", i, j, m.x(i), m.y(j), u(i, j));
            out << line;
        }
    }
    if (!out) {
        throw std::runtime_error("write failed for " + path);
    }
}

/// Reads a snapshot written by write_field_csv onto the given mesh.
inline Field read_field_csv(const std::string& path, const Mesh2D& mesh) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open field file " + path);
    }
    std::string line;
    std::getline(in, line);
    if (line.rfind("i,j,x,y,u", 0) != 0) {
        throw ConfigError(path + ": expected header i,j,x,y,u");
    }
    Field u(mesh, std::numeric_limits<double>::quiet_NaN());
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        int i = 0;
        int j = 0;
        double x = 0.0;
        double y = 0.0;
        double v = 0.0;
        if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf", &i, &j, &x, &y, &v) != 5 || i < 0 ||
            j < 0 || i >= mesh.nx() || j >= mesh.ny()) {
            throw ConfigError(path + ": malformed row '" + line + "'");
        }
        u(i, j) = v;
        ++rows;
    }
    if (rows != mesh.size() || !u.all_finite()) {
        throw ConfigError(path + ": field does not cover the mesh");
    }
    return u;
}

}  // namespace etdrk
