#pragma once

#include <limits>
#include <optional>

#include "spcp/gauges.hpp"
#include "spcp/matcore.hpp"
#include "spcp/trace.hpp"

namespace spcp {

/// minimize rho(op(L, S) - data) subject to phi(L, S) <= tau.
struct FlipProblem {
  GaugeSpec gauge;
  double tau = 0.0;
  PenaltySpec penalty;
  LinearOp op;
  Vector data;
  Index rows = 0;
  Index cols = 0;
};

/// The usual instance: op = [I I], data = vec(A).
FlipProblem make_flip_problem(const GaugeSpec& gauge, double tau, const Matrix& a,
                              const PenaltySpec& penalty = PenaltySpec::least_squares());

/// minimize lambda_L ||L||_* + lambda_S ||S||_1 + 0.5 ||L + S - A||_F^2.
struct LagProblem {
  double lambda_L = 1.0;
  double lambda_S = 1.0;
  Matrix A;
};

struct SubsolverOptions {
  double tol = 1e-6;
  Index max_iters = 10000;
  /// Scale of the second-order cross term in the quasi-Newton step.
  double qn_scale = 1.25;
  /// Use randomized partial SVDs instead of dense ones (inexact early on).
  bool partial_svd = false;
  /// Number of singular values kept on the first two iterations in partial mode.
  Index initial_rank_limit = 10;
  double time_limit = std::numeric_limits<double>::infinity();
  /// Shared recorder; a private one is used when null.
  TraceRecorder* recorder = nullptr;
};

/// State carried from one subsolve to the next (warm start).
struct SubsolverMemory {
  LowSparsePair pair;
  LowSparsePair previous;
  double bb_step = 0.0;
  bool valid = false;
};

struct SubsolveResult {
  LowSparsePair pair;
  double objective = 0.0;
  /// Projected (proximal) gradient residual ||x - T(x)|| with step 1/Lipschitz.
  double certificate = 0.0;
  Index iterations = 0;
  bool converged = false;
  /// Set when the quasi-Newton divergence guard replaced a step.
  bool fallback_used = false;
  SubsolverMemory memory;
  SolveTrace trace;
};

double flip_objective(const FlipProblem& p, const LowSparsePair& pair);
/// ||x - P(x - grad f(x) / Lip)||.
double flip_certificate(const FlipProblem& p, const LowSparsePair& pair);
double lag_objective(const LagProblem& p, const LowSparsePair& pair);
/// ||x - prox_{h/2}(x - grad f(x) / 2)|| for the Lagrangian problem.
double lag_certificate(const LagProblem& p, const LowSparsePair& pair);

/// Spectral projected gradient (Barzilai-Borwein, nonmonotone line search).
SubsolveResult solve_flip_spg(const FlipProblem& p, const SubsolverOptions& opts = {},
                              const SubsolverMemory* warm = nullptr);
/// Quasi-Newton Gauss-Seidel scheme; requires the max combiner (separable constraint).
SubsolveResult solve_flip_qn(const FlipProblem& p, const SubsolverOptions& opts = {},
                             const SubsolverMemory* warm = nullptr);
/// Quasi-Newton Gauss-Seidel scheme with svt / soft-thresholding steps.
SubsolveResult solve_lag_qn(const LagProblem& p, const SubsolverOptions& opts = {},
                            const SubsolverMemory* warm = nullptr);

}  // namespace spcp
