#pragma once

#include <stdexcept>
#include <string>

namespace etdrk {

/// Invalid user configuration (bad flag value, kappa below the stabilizer
/// minimum, malformed JSON, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function, e.g. the
/// Flory-Huggins potential evaluated at |u| >= 1.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Two fields (or a field and a plan) built on different meshes.
class MeshMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Base for failures raised while advancing a trajectory.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    long step_index = -1;
};

/// A stage value left the domain of the nonlinearity. Only the standard
/// (non-rescaled) scheme can trigger this.
class BoundExceeded : public NumericalFailure {
public:
    BoundExceeded(int level, int stage, const std::string& what)
        : NumericalFailure(what), level(level), stage(stage) {}
    int level;
    int stage;
};

class NumericalBlowup : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

}  // namespace etdrk
