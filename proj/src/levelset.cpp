#include "spcp/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spcp/errors.hpp"

namespace spcp {

LevelSetResult solve_levelset(const GaugeSpec& gauge, const PenaltySpec& penalty, const LinearOp& op,
                              const Vector& data, Index rows, Index cols, double eps,
                              const LevelSetOptions& opts) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw InputError("solve_levelset: eps must be finite and >= 0");
  if (!data.allFinite()) throw InputError("solve_levelset: data contains non-finite entries");

  TraceRecorder local;
  TraceRecorder& rec = opts.recorder ? *opts.recorder : local;

  FlipProblem p;
  p.gauge = gauge;
  p.penalty = penalty;
  p.op = op;
  p.data = data;
  p.rows = rows;
  p.cols = cols;

  const bool use_qn = opts.inner == InnerSolver::qn ||
                      (opts.inner == InnerSolver::automatic && gauge.combiner == Combiner::max);
  auto subsolve = [&](double tau, double tol, const SubsolverMemory* warm) {
    p.tau = tau;
    SubsolverOptions so = opts.sub;
    so.tol = tol;
    so.recorder = &rec;
    return use_qn ? solve_flip_qn(p, so, warm) : solve_flip_spg(p, so, warm);
  };

  LevelSetResult res;
  const double accept = opts.tol * std::max(1.0, eps);
  const LowSparsePair zero = LowSparsePair::zeros(rows, cols);
  const double v0 = penalty.value(-data);

  res.pair = zero;
  res.value = v0;
  if (eps >= v0) {
    rec.record(v0, 0.0);
    res.converged = true;
    res.trace = rec.trace();
    res.trace.converged = true;
    res.trace.status = "zero pair feasible";
    return res;
  }

  double tau = 0.0;
  double v = v0;
  double slope = value_fn_derivative(gauge, penalty, op, zero, data);
  res.history.push_back({0.0, v, slope, 0, false});

  double lo = 0.0;  // v(lo) > eps
  double hi = std::numeric_limits<double>::infinity();  // v(hi) < eps
  bool overshoot = false;
  SubsolverMemory memory;
  LowSparsePair lo_pair = zero;

  for (Index k = 0; k < opts.max_newton; ++k) {
    if (std::abs(v - eps) <= accept) {
      res.converged = true;
      break;
    }
    double next;
    bool bisect = false;
    if (overshoot) {
      next = 0.5 * (lo + hi);
      bisect = true;
    } else {
      if (!(slope < -1e-14)) {
        throw DriverError("constraint inactive or tau beyond Pareto range (flat value function)");
      }
      next = tau - (v - eps) / slope;
      if (!(next > lo && next < hi)) {
        next = std::isfinite(hi) ? 0.5 * (lo + hi) : std::max(2.0 * lo, next);
        bisect = true;
      }
    }

    const double inner_tol = std::max(opts.inner_tol, 0.1 * std::abs(v - eps) / std::max(1.0, v0));
    SubsolveResult sub = subsolve(next, inner_tol, memory.valid ? &memory : nullptr);
    memory = sub.memory;
    res.inner_iterations += sub.iterations;
    ++res.newton_iterations;

    tau = next;
    v = sub.objective;
    slope = value_fn_derivative(gauge, penalty, op, sub.pair, data);
    res.history.push_back({tau, v, slope, sub.iterations, bisect});
    res.pair = sub.pair;
    res.tau = tau;
    res.value = v;

    if (rec.should_stop(opts.sub.time_limit)) break;
    overshoot = v < eps - accept;
    if (overshoot) {
      hi = tau;
      // Restart the next subsolve from the left end of the bracket.
      memory.pair = lo_pair;
      memory.previous = lo_pair;
    } else if (v > eps) {
      lo = tau;
      lo_pair = sub.pair;
    }
  }
  if (!res.converged && std::abs(v - eps) <= accept) res.converged = true;

  res.trace = rec.trace();
  res.trace.converged = res.converged;
  res.trace.status = res.converged ? "converged" : "newton iteration limit reached";
  return res;
}

LevelSetResult solve_spcp_levelset(const GaugeSpec& gauge, const Matrix& a, double eps_frobenius,
                                   const LevelSetOptions& opts) {
  require_finite(a, "solve_spcp_levelset");
  if (!(eps_frobenius >= 0.0)) throw InputError("solve_spcp_levelset: eps must be >= 0");
  return solve_levelset(gauge, PenaltySpec::least_squares(), op_sum_identity(a.rows(), a.cols()), vec(a),
                        a.rows(), a.cols(), 0.5 * eps_frobenius * eps_frobenius, opts);
}

}  // namespace spcp
