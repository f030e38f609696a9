#pragma once

// Interpolation nodes, the Vandermonde systems that turn stage values into
// polynomial coefficients, and the energy-stability step bounds derived from
// their minimum singular values.

#include "etdrk/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace etdrk {

enum class NodeKind { Uniform, ChebyshevLobatto };

inline std::string to_string(NodeKind kind) { return kind == NodeKind::Uniform ? "uniform" : "chebyshev"; }

inline NodeKind parse_node_kind(const std::string& s) {
    if (s == "uniform") {
        return NodeKind::Uniform;
    }
    if (s == "chebyshev" || s == "chebyshev-lobatto") {
        return NodeKind::ChebyshevLobatto;
    }
    throw ConfigError("unknown node kind '" + s + "' (expected uniform|chebyshev)");
}

/// Nodes 0 = a_0 < a_1 < ... < a_r <= 1 for a degree-r interpolant.
struct NodeSet {
    int degree = 0;
    NodeKind kind = NodeKind::Uniform;
    std::vector<double> nodes;
};

/// Uniform nodes k/r, or Chebyshev-Gauss-Lobatto points mapped to [0, 1],
/// (1 - cos(k pi / r)) / 2. Both endpoints are pinned exactly.
inline NodeSet make_nodes(int r, NodeKind kind) {
    if (r < 0) {
        throw std::invalid_argument("node degree must be >= 0");
    }
    NodeSet set{r, kind, std::vector<double>(static_cast<std::size_t>(r) + 1, 0.0)};
    for (int k = 1; k <= r; ++k) {
        if (k == r) {
            set.nodes[k] = 1.0;
        } else if (kind == NodeKind::Uniform) {
            set.nodes[k] = static_cast<double>(k) / r;
        } else {
            // cos(k pi / r) written as a sine so that the midpoint is exactly 1/2.
            set.nodes[k] = 0.5 - 0.5 * std::sin((r - 2 * k) * std::numbers::pi / (2.0 * r));
        }
    }
    return set;
}

/// V[i][j] = a_i^j for i, j = 1..r (node 0 dropped), LU-factorized.
class Vandermonde {
public:
    explicit Vandermonde(const NodeSet& nodes) : degree_(nodes.degree) {
        if (degree_ < 1) {
            throw std::invalid_argument("Vandermonde system needs degree >= 1");
        }
        const int r = degree_;
        matrix_.resize(r, r);
        for (int i = 0; i < r; ++i) {
            double power = 1.0;
            for (int j = 0; j < r; ++j) {
                power *= nodes.nodes[i + 1];
                matrix_(i, j) = power;
            }
        }
        lu_.compute(matrix_);
        if (!(lu_.rcond() > std::numeric_limits<double>::epsilon())) {
            throw std::runtime_error("Vandermonde matrix is singular to working precision");
        }
        // Row permutation as an index map: (P d)[i] = d[perm_[i]].
        const auto& p = lu_.permutationP().indices();
        perm_.assign(r, 0);
        for (int i = 0; i < r; ++i) {
            perm_[p(i)] = i;
        }
    }

    int degree() const { return degree_; }
    const Eigen::MatrixXd& matrix() const { return matrix_; }

    Eigen::VectorXd solve(const Eigen::VectorXd& d) const { return lu_.solve(d); }

    /// Solves V c = d where every entry of d and c is a grid field of length n.
    /// The LU factors are shared; the triangular solves run pointwise.
    template <class FieldLike>
    std::vector<FieldLike> solve_fields(const std::vector<FieldLike>& d) const {
        const int r = degree_;
        if (static_cast<int>(d.size()) != r) {
            throw std::invalid_argument("right-hand side count does not match Vandermonde degree");
        }
        const std::size_t n = d.front().size();
        const auto& lu = lu_.matrixLU();
        std::vector<FieldLike> y;
        y.reserve(r);
        for (int i = 0; i < r; ++i) {
            y.push_back(d[perm_[i]]);
        }
        for (int i = 1; i < r; ++i) {
            for (int k = 0; k < i; ++k) {
                const double l = lu(i, k);
                for (std::size_t x = 0; x < n; ++x) {
                    y[i][x] -= l * y[k][x];
                }
            }
        }
        for (int i = r - 1; i >= 0; --i) {
            for (int k = i + 1; k < r; ++k) {
                const double u = lu(i, k);
                for (std::size_t x = 0; x < n; ++x) {
                    y[i][x] -= u * y[k][x];
                }
            }
            const double inv = 1.0 / lu(i, i);
            for (std::size_t x = 0; x < n; ++x) {
                y[i][x] *= inv;
            }
        }
        return y;
    }

private:
    int degree_;
    Eigen::MatrixXd matrix_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    std::vector<int> perm_;
};

inline double sigma_min(const Eigen::MatrixXd& m) {
    if (m.rows() == 0 || m.cols() == 0) {
        throw std::invalid_argument("sigma_min of an empty matrix");
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues().minCoeff();
}

inline double sigma_min(const Vandermonde& v) { return sigma_min(v.matrix()); }

/// Energy-stability step bound
///   tau_max = (1 / (c kappa)) min_{k=1..r-1} sigma_min(V_k) / k,
/// with c = 4 for the standard scheme and c = 10 with rescaling; +inf for r = 1.
inline double tau_max(int r, double kappa, NodeKind kind, bool rescaled) {
    if (r < 1 || !(kappa > 0.0)) {
        throw std::invalid_argument("tau_max needs r >= 1 and kappa > 0");
    }
    if (r == 1) {
        return std::numeric_limits<double>::infinity();
    }
    double best = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= r - 1; ++k) {
        best = std::min(best, sigma_min(Vandermonde(make_nodes(k, kind))) / k);
    }
    const double c = rescaled ? 10.0 : 4.0;
    return best / (c * kappa);
}

/// Everything an order-r scheme needs from the interpolation side: for each
/// cascade level k = 1..r-1 its node set and factorized V_k.
class SchemeSpec {
public:
    SchemeSpec(int order, NodeKind kind) : order_(order), kind_(kind) {
        if (order < 1) {
            throw ConfigError("scheme order must be >= 1");
        }
        if (order > 10) {
            throw ConfigError("scheme order above 10 is not supported");
        }
        for (int k = 1; k < order; ++k) {
            nodes_.push_back(make_nodes(k, kind));
            systems_.emplace_back(nodes_.back());
            sigma_.push_back(sigma_min(systems_.back()));
        }
    }

    int order() const { return order_; }
    NodeKind kind() const { return kind_; }

    /// Node set and Vandermonde system of level k (1 <= k <= order-1).
    const NodeSet& nodes(int level) const { return nodes_.at(level - 1); }
    const Vandermonde& vandermonde(int level) const { return systems_.at(level - 1); }
    double sigma(int level) const { return sigma_.at(level - 1); }

    double tau_max(double kappa, bool rescaled) const { return etdrk::tau_max(order_, kappa, kind_, rescaled); }

private:
    int order_;
    NodeKind kind_;
    std::vector<NodeSet> nodes_;
    std::vector<Vandermonde> systems_;
    std::vector<double> sigma_;
};

}  // namespace etdrk
