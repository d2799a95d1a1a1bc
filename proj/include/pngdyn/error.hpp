#pragma once

#include <stdexcept>
#include <string>

namespace pngdyn {

// Dimension mismatch between interacting objects (matrices, policies, games).
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Parameter outside its documented range (t < 1, negative sd, bad damping, ...).
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Lookup of an unknown named resource (builtin game, subcommand, config key).
struct NotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Required input missing or inconsistent (e.g. a neighbor policy not supplied).
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Non-finite values where finite ones are required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sampling/initialization failure (e.g. truncated-normal rejection cap hit).
struct InitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Random-graph generation failure (connectivity not achievable).
struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical integration or iteration produced a non-finite state.
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, long step_index, double time)
      : std::runtime_error(what), step(step_index), t(time) {}
  long step;
  double t;
};

}  // namespace pngdyn
