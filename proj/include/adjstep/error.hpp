#pragma once

#include <stdexcept>
#include <string>

namespace adjstep {

/// Invalid argument to a builder or operation (bad sizes, degenerate geometry).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A conserved state left the admissible set (non-positive density or pressure).
class StateError : public std::runtime_error {
 public:
  StateError(const std::string& what, int cell = -1)
      : std::runtime_error(what), cell_(cell) {}
  int cell() const { return cell_; }

 private:
  int cell_;
};

/// Newton or pseudo-time iteration failed to reach its tolerance.
class NonconvergenceError : public std::runtime_error {
 public:
  NonconvergenceError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

/// Missing or malformed configuration (boundary data, config keys).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// On-disk artifact is corrupt, has the wrong version or belongs to another mesh.
class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace adjstep
