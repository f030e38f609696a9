#pragma once

// Run configuration: JSON schema, validation and initial-condition builders.
//
// {
//   "domain":    {"lx": 6.283185307179586, "ly": 6.283185307179586},
//   "grid":      {"nx": 128, "ny": 128},
//   "eps":       0.1,
//   "potential": {"kind": "gl"}  |  {"kind": "fh", "theta": 0.8, "theta_c": 1.6},
//   "kappa":     null,
//   "scheme":    {"order": 3, "nodes": "uniform", "rescaled": true},
//   "tau":       0.01,
//   "t_end":     2.0,
//   "initial":   {"kind": "sinprod", "amplitude": 0.5}
//              | {"kind": "random", "seed": 42, "fraction": 1.0}
//              | {"kind": "constant", "value": 1.0}
//              | {"kind": "csv", "path": "u0.csv"},
//   "output":    {"dir": "out"}
// }

#include "etdrk/errors.hpp"
#include "etdrk/grid.hpp"
#include "etdrk/potentials.hpp"
#include "etdrk/scheme.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <string>

namespace etdrk {

struct PotentialSpec {
    std::string kind = "gl";
    double theta = 0.8;
    double theta_c = 1.6;

    Potential build() const {
        if (kind == "gl") {
            return Potential::ginzburg_landau();
        }
        if (kind == "fh") {
            return Potential::flory_huggins(theta, theta_c);
        }
        throw ConfigError("unknown potential kind '" + kind + "' (expected gl|fh)");
    }
};

struct InitialSpec {
    std::string kind = "sinprod";
    double amplitude = 0.5;
    std::uint64_t seed = 42;
    /// Random data fills (-fraction*beta, fraction*beta).
    double fraction = 1.0;
    double value = 0.0;
    std::string path;
};

struct RunConfig {
    double lx = 2.0 * std::numbers::pi;
    double ly = 2.0 * std::numbers::pi;
    int nx = 128;
    int ny = 128;
    double eps = 0.1;
    PotentialSpec potential;
    std::optional<double> kappa;
    int order = 3;
    NodeKind nodes = NodeKind::Uniform;
    bool rescaled = true;
    double tau = 0.01;
    double t_end = 2.0;
    InitialSpec initial;
    std::string out_dir = "out";

    Mesh2D mesh() const { return Mesh2D(lx, ly, nx, ny); }

    /// Stabilizer actually used: the override if present, else kappa_min.
    double resolved_kappa(const Potential& p) const {
        if (!kappa) {
            return p.kappa_min;
        }
        if (*kappa < p.kappa_min * (1.0 - 1e-12)) {
            throw ConfigError("kappa " + std::to_string(*kappa) + " is below the minimum " +
                              std::to_string(p.kappa_min) + " for this potential");
        }
        return *kappa;
    }

    void validate() const {
        (void)mesh();
        if (!(eps > 0.0)) {
            throw ConfigError("eps must be positive");
        }
        if (order < 1 || order > 10) {
            throw ConfigError("order must be in 1..10");
        }
        if (!(tau > 0.0) || !std::isfinite(tau)) {
            throw ConfigError("tau must be positive");
        }
        if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
            throw ConfigError("t_end must be non-negative");
        }
        const Potential p = potential.build();
        (void)resolved_kappa(p);
        if (initial.kind == "random" && !(initial.fraction > 0.0 && initial.fraction <= 1.0)) {
            throw ConfigError("random initial fraction must lie in (0, 1]");
        }
        if (initial.kind != "sinprod" && initial.kind != "random" && initial.kind != "constant" &&
            initial.kind != "csv") {
            throw ConfigError("unknown initial kind '" + initial.kind + "'");
        }
    }
};

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["domain"] = {{"lx", c.lx}, {"ly", c.ly}};
    j["grid"] = {{"nx", c.nx}, {"ny", c.ny}};
    j["eps"] = c.eps;
    if (c.potential.kind == "fh") {
        j["potential"] = {{"kind", "fh"}, {"theta", c.potential.theta}, {"theta_c", c.potential.theta_c}};
    } else {
        j["potential"] = {{"kind", c.potential.kind}};
    }
    j["kappa"] = c.kappa ? nlohmann::json(*c.kappa) : nlohmann::json(nullptr);
    j["scheme"] = {{"order", c.order}, {"nodes", to_string(c.nodes)}, {"rescaled", c.rescaled}};
    j["tau"] = c.tau;
    j["t_end"] = c.t_end;
    nlohmann::json init = {{"kind", c.initial.kind}};
    if (c.initial.kind == "sinprod") {
        init["amplitude"] = c.initial.amplitude;
    } else if (c.initial.kind == "random") {
        init["seed"] = c.initial.seed;
        init["fraction"] = c.initial.fraction;
    } else if (c.initial.kind == "constant") {
        init["value"] = c.initial.value;
    } else {
        init["path"] = c.initial.path;
    }
    j["initial"] = init;
    j["output"] = {{"dir", c.out_dir}};
    return j;
}

/// Overlays the keys present in `j` onto `c`.
inline void merge_json(RunConfig& c, const nlohmann::json& j) {
    try {
        if (j.contains("domain")) {
            c.lx = j["domain"].value("lx", c.lx);
            c.ly = j["domain"].value("ly", c.ly);
        }
        if (j.contains("grid")) {
            c.nx = j["grid"].value("nx", c.nx);
            c.ny = j["grid"].value("ny", c.ny);
        }
        c.eps = j.value("eps", c.eps);
        if (j.contains("potential")) {
            const auto& p = j["potential"];
            c.potential.kind = p.value("kind", c.potential.kind);
            c.potential.theta = p.value("theta", c.potential.theta);
            c.potential.theta_c = p.value("theta_c", c.potential.theta_c);
        }
        if (j.contains("kappa")) {
            if (j["kappa"].is_null()) {
                c.kappa.reset();
            } else {
                c.kappa = j["kappa"].get<double>();
            }
        }
        if (j.contains("scheme")) {
            const auto& s = j["scheme"];
            c.order = s.value("order", c.order);
            if (s.contains("nodes")) {
                c.nodes = parse_node_kind(s["nodes"].get<std::string>());
            }
            c.rescaled = s.value("rescaled", c.rescaled);
        }
        c.tau = j.value("tau", c.tau);
        c.t_end = j.value("t_end", c.t_end);
        if (j.contains("initial")) {
            const auto& i = j["initial"];
            c.initial.kind = i.value("kind", c.initial.kind);
            c.initial.amplitude = i.value("amplitude", c.initial.amplitude);
            c.initial.seed = i.value("seed", c.initial.seed);
            c.initial.fraction = i.value("fraction", c.initial.fraction);
            c.initial.value = i.value("value", c.initial.value);
            c.initial.path = i.value("path", c.initial.path);
        }
        if (j.contains("output")) {
            c.out_dir = j["output"].value("dir", c.out_dir);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
}

/// Reads a JSON file and merges it into c.
inline void merge_json_file(RunConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    merge_json(c, j);
}

inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig c;
    merge_json(c, j);
    return c;
}

/// Uniform doubles in [0, 1) from the top 53 bits of mt19937_64 output.
/// The engine's sequence is fixed by the C++ standard, so the field is the
/// same on every platform (std::uniform_real_distribution is not).
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// i.i.d. values in (-fraction*beta + 1e-12, fraction*beta - 1e-12).
inline Field random_field(const Mesh2D& mesh, std::uint64_t seed, double beta, double fraction = 1.0) {
    constexpr double kMargin = 1e-12;
    const double half = fraction * beta - kMargin;
    std::mt19937_64 rng(seed);
    Field u(mesh);
    for (std::size_t k = 0; k < u.size(); ++k) {
        u[k] = -half + 2.0 * half * unit_uniform(rng);
    }
    return u;
}

inline Field build_initial(const RunConfig& c, const Potential& p) {
    const Mesh2D mesh = c.mesh();
    const InitialSpec& init = c.initial;
    if (init.kind == "sinprod") {
        const double a = init.amplitude;
        return Field::sample(mesh, [a](double x, double y) { return a * std::sin(x) * std::sin(y); });
    }
    if (init.kind == "random") {
        return random_field(mesh, init.seed, p.beta, init.fraction);
    }
    if (init.kind == "constant") {
        return Field(mesh, init.value);
    }
    if (init.kind == "csv") {
        return read_field_csv(init.path, mesh);
    }
    throw ConfigError("unknown initial kind '" + init.kind + "'");
}

}  // namespace etdrk
