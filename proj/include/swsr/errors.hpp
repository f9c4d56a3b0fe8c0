#pragma once

#include <stdexcept>
#include <string>

namespace swsr {

/// Error families map to distinct CLI exit codes (see tools/).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Time step too large for the current state; names the limiting grid row.
struct CflError : std::runtime_error {
  CflError(const std::string& msg, int row, double dx_min, double dt_max)
      : std::runtime_error(msg), limiting_row(row), dx_min(dx_min), dt_max(dt_max) {}
  int limiting_row;
  double dx_min;
  double dt_max;
};

/// Non-finite or non-positive fields after a step.
struct InstabilityError : std::runtime_error {
  InstabilityError(const std::string& msg, long step_index, double t)
      : std::runtime_error(msg), step_index(step_index), sim_time(t) {}
  long step_index;
  double sim_time;
};

struct QuadratureError : std::runtime_error {
  QuadratureError(const std::string& msg, double last, double prev)
      : std::runtime_error(msg), last_estimate(last), prev_estimate(prev) {}
  double last_estimate;
  double prev_estimate;
};

struct CoverageError : std::runtime_error {
  explicit CoverageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CheckpointError : std::runtime_error {
  explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

struct TrainingError : std::runtime_error {
  TrainingError(const std::string& msg, long iteration)
      : std::runtime_error(msg), iteration(iteration) {}
  long iteration;
};

}  // namespace swsr
