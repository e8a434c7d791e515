#include "spcp/trace.hpp"

#include <fstream>

#include "spcp/errors.hpp"

namespace spcp {

bool SolveTrace::has_error_column() const {
  return !rows.empty() && rows.front().rel_error.has_value();
}

std::optional<double> SolveTrace::time_to_error(double threshold) const {
  for (const auto& r : rows) {
    if (r.rel_error && *r.rel_error <= threshold) return r.seconds;
  }
  return std::nullopt;
}

void SolveTrace::write_csv(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for writing: " + path.string());
  os.precision(12);
  os << "iter,seconds,objective,residual,rel_error\n";
  for (const auto& r : rows) {
    os << r.iter << ',' << r.seconds << ',' << r.objective << ',' << r.residual << ',';
    if (r.rel_error) os << *r.rel_error;
    os << '\n';
  }
}

TraceRecorder::TraceRecorder() : start_(Clock::now()) {}

TraceRecorder::TraceRecorder(ErrorFn error_fn) : error_fn_(std::move(error_fn)), start_(Clock::now()) {}

double TraceRecorder::elapsed_seconds() const {
  return std::chrono::duration<double>(Clock::now() - start_ - excluded_).count();
}

void TraceRecorder::record(double objective, double residual, const Vector* primal) {
  TraceRow row;
  row.iter = next_iter_++;
  row.seconds = elapsed_seconds();
  row.objective = objective;
  row.residual = residual;
  if (error_fn_ && primal) {
    const auto t0 = Clock::now();
    row.rel_error = error_fn_(*primal);
    excluded_ += Clock::now() - t0;
    if (*row.rel_error <= stop_error_) stop_reached_ = true;
  }
  trace_.rows.push_back(row);
}

}  // namespace spcp
