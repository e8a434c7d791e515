#pragma once

#include <vector>

#include "spcp/gauges.hpp"
#include "spcp/subsolvers.hpp"

namespace spcp {

enum class InnerSolver { automatic, spg, qn };

struct LevelSetOptions {
  /// Stop when |rho - eps| <= tol * max(1, eps).
  double tol = 1e-6;
  Index max_newton = 30;
  /// automatic: quasi-Newton for the max combiner, SPG for the sum combiner.
  InnerSolver inner = InnerSolver::automatic;
  /// Floor of the inner tolerance schedule (relative to the data norm).
  double inner_tol = 1e-8;
  /// Template for the subsolves; its tol and recorder are managed by the driver.
  SubsolverOptions sub;
  TraceRecorder* recorder = nullptr;
};

/// One Newton iteration: the subproblem at tau and the resulting v(tau), v'(tau).
struct LevelSetStep {
  double tau = 0.0;
  double value = 0.0;
  double slope = 0.0;
  Index inner_iterations = 0;
  bool bisection = false;
};

struct LevelSetResult {
  LowSparsePair pair;
  double tau = 0.0;
  double value = 0.0;
  Index newton_iterations = 0;
  Index inner_iterations = 0;
  bool converged = false;
  std::vector<LevelSetStep> history;
  SolveTrace trace;
};

/// Solves min phi(L, S) s.t. rho(op(L, S) - data) <= eps by Newton's method on
/// the value function of the flipped problem. `eps` is in the units of rho
/// (0.5 ||r||^2 for least squares).
LevelSetResult solve_levelset(const GaugeSpec& gauge, const PenaltySpec& penalty, const LinearOp& op,
                              const Vector& data, Index rows, Index cols, double eps,
                              const LevelSetOptions& opts = {});

/// Residual-constrained SPCP with op = [I I]: ||L + S - A||_F <= eps_frobenius.
LevelSetResult solve_spcp_levelset(const GaugeSpec& gauge, const Matrix& a, double eps_frobenius,
                                   const LevelSetOptions& opts = {});

}  // namespace spcp
