#pragma once

#include <limits>
#include <optional>

#include "spcp/matcore.hpp"
#include "spcp/prox.hpp"
#include "spcp/trace.hpp"

namespace spcp {

struct PdhgOptions {
  /// tau / sigma; the product is pinned at 0.99 / ||L||^2.
  double ratio = 1.0;
  /// Explicit steps override the ratio; they must satisfy tau * sigma < 1 / ||L||^2.
  std::optional<double> tau_step;
  std::optional<double> sigma_step;
  /// Stop once the relative change of (x, z) stays below tol for `window` iterations.
  double tol = 1e-8;
  Index window = 10;
  Index max_iters = 20000;
  std::optional<Vector> x0;
  std::optional<Vector> z0;
  /// Record psi0(x) + psi1(Lx - b) in the trace (infinite off the domain).
  bool trace_objective = false;
  double time_limit = std::numeric_limits<double>::infinity();
  TraceRecorder* recorder = nullptr;
};

struct PdhgResult {
  Vector x;
  Vector z;
  double tau_step = 0.0;
  double sigma_step = 0.0;
  Index iterations = 0;
  bool converged = false;
  SolveTrace trace;
};

/// Chambolle-Pock iteration for min psi0(x) + psi1(L x - b):
///   z+ = prox_{sigma psi1*}(z + sigma L xbar), x+ = prox_{tau psi0}(x - tau L^T z+),
///   xbar = 2 x+ - x.
PdhgResult solve_pdhg(const ProxHandle& psi0, const ProxHandle& psi1, const LinearOp& op, const Vector& b,
                      const PdhgOptions& opts = {});

}  // namespace spcp
