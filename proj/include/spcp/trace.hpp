#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spcp/matcore.hpp"

namespace spcp {

struct TraceRow {
  Index iter = 0;
  double seconds = 0.0;
  double objective = 0.0;
  double residual = 0.0;
  std::optional<double> rel_error;
};

/// Per-iteration history of a solve plus its termination status.
struct SolveTrace {
  std::vector<TraceRow> rows;
  bool converged = false;
  std::string status;

  [[nodiscard]] bool has_error_column() const;
  /// Wall time of the first row whose error is at or below `threshold`.
  [[nodiscard]] std::optional<double> time_to_error(double threshold) const;
  /// Header `iter,seconds,objective,residual,rel_error`; the error cell is empty
  /// when no reference was supplied.
  void write_csv(const std::filesystem::path& path) const;
};

/// Collects trace rows with a wall clock that excludes the time spent
/// evaluating the error against a reference.
class TraceRecorder {
 public:
  /// Maps the solver's flat primal point to an error value.
  using ErrorFn = std::function<double(const Vector&)>;

  TraceRecorder();
  explicit TraceRecorder(ErrorFn error_fn);

  void record(double objective, double residual, const Vector* primal = nullptr);
  [[nodiscard]] double elapsed_seconds() const;
  [[nodiscard]] bool tracks_error() const { return static_cast<bool>(error_fn_); }
  /// Requests a stop once a recorded error is at or below `threshold`.
  void stop_at_error(double threshold) { stop_error_ = threshold; }
  /// True once the time limit has passed or the stop error has been reached.
  [[nodiscard]] bool should_stop(double time_limit) const {
    return stop_reached_ || elapsed_seconds() > time_limit;
  }
  [[nodiscard]] const SolveTrace& trace() const { return trace_; }
  SolveTrace& trace() { return trace_; }

 private:
  using Clock = std::chrono::steady_clock;
  ErrorFn error_fn_;
  Clock::time_point start_;
  Clock::duration excluded_{};
  Index next_iter_ = 0;
  double stop_error_ = -1.0;
  bool stop_reached_ = false;
  SolveTrace trace_;
};

}  // namespace spcp
