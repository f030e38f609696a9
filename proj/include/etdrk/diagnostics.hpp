#pragma once

// Per-step monitoring of the two structural properties: the discrete energy
// must not increase and the maximum norm must stay below beta.

#include "etdrk/errors.hpp"
#include "etdrk/grid.hpp"
#include "etdrk/potentials.hpp"

#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace etdrk {

inline constexpr double kBoundTolerance = 1e-12;

inline double dissipation_tolerance(double energy) { return 1e-10 * (1.0 + std::abs(energy)); }

struct StepDiagnostics {
    long n = 0;
    double t = 0.0;
    double energy = 0.0;
    double max_norm = 0.0;
    double alpha_min = 1.0;
    bool dissipation_ok = true;
    bool mbp_ok = true;

    bool operator==(const StepDiagnostics&) const = default;
};

/// Energy, maximum norm and the two flags for state u at step n.
/// `prev_energy` is empty for the initial record. Out-of-domain
/// Flory-Huggins states get energy +inf instead of an exception.
inline StepDiagnostics record(long n, double t, const Field& u, double eps, const Potential& p,
                              std::optional<double> prev_energy, double alpha_min = 1.0) {
    StepDiagnostics d;
    d.n = n;
    d.t = t;
    d.alpha_min = alpha_min;
    d.max_norm = max_norm(u);
    d.mbp_ok = d.max_norm <= p.beta + kBoundTolerance;
    try {
        d.energy = discrete_energy(u, eps, p);
    } catch (const DomainError&) {
        d.energy = std::numeric_limits<double>::infinity();
        d.mbp_ok = false;
    }
    if (prev_energy) {
        d.dissipation_ok = d.energy <= *prev_energy + dissipation_tolerance(*prev_energy);
        if (std::isinf(*prev_energy) && std::isinf(d.energy)) {
            d.dissipation_ok = false;
        }
    }
    return d;
}

struct RunSummary {
    std::optional<long> first_dissipation_violation;
    std::optional<long> first_mbp_violation;
    long dissipation_violations = 0;
    long mbp_violations = 0;
    double final_energy = 0.0;
    double max_norm_peak = 0.0;
    double alpha_min = 1.0;
};

struct RunReport {
    std::string config_json;
    std::vector<StepDiagnostics> series;

    void append(const StepDiagnostics& d) { series.push_back(d); }

    RunSummary summary() const {
        RunSummary s;
        for (const auto& d : series) {
            if (!d.dissipation_ok) {
                ++s.dissipation_violations;
                if (!s.first_dissipation_violation) {
                    s.first_dissipation_violation = d.n;
                }
            }
            if (!d.mbp_ok) {
                ++s.mbp_violations;
                if (!s.first_mbp_violation) {
                    s.first_mbp_violation = d.n;
                }
            }
            s.max_norm_peak = std::max(s.max_norm_peak, d.max_norm);
            s.alpha_min = std::min(s.alpha_min, d.alpha_min);
        }
        if (!series.empty()) {
            s.final_energy = series.back().energy;
        }
        return s;
    }
};

inline constexpr const char* kDiagnosticsHeader = "n,t,energy,max_norm,alpha_min,dissipation_ok,mbp_ok";

namespace detail {

inline std::string format_g17(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s) {
    if (s == "inf") {
        return std::numeric_limits<double>::infinity();
    }
    if (s == "-inf") {
        return -std::numeric_limits<double>::infinity();
    }
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw std::invalid_argument("malformed number '" + s + "'");
    }
    return v;
}

}  // namespace detail

inline std::string to_csv_line(const StepDiagnostics& d) {
    using detail::format_g17;
    return std::to_string(d.n) + "," + format_g17(d.t) + "," + format_g17(d.energy) + "," + format_g17(d.max_norm) +
           "," + format_g17(d.alpha_min) + "," + (d.dissipation_ok ? "1" : "0") + "," + (d.mbp_ok ? "1" : "0");
}

inline void write_csv(const RunReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out << kDiagnosticsHeader << '\n';
    for (const auto& d : report.series) {
        out << to_csv_line(d) << '\n';
    }
    out.flush();
    if (!out) {
        throw std::runtime_error("write failed for " + path);
    }
}

inline std::vector<StepDiagnostics> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line) || line != kDiagnosticsHeader) {
        throw std::runtime_error(path + ": unexpected diagnostics header");
    }
    std::vector<StepDiagnostics> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != 7) {
            throw std::runtime_error(path + ": malformed row '" + line + "'");
        }
        StepDiagnostics d;
        d.n = std::stol(cells[0]);
        d.t = detail::parse_double(cells[1]);
        d.energy = detail::parse_double(cells[2]);
        d.max_norm = detail::parse_double(cells[3]);
        d.alpha_min = detail::parse_double(cells[4]);
        d.dissipation_ok = cells[5] == "1";
        d.mbp_ok = cells[6] == "1";
        rows.push_back(d);
    }
    return rows;
}

}  // namespace etdrk
