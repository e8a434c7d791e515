#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "spcp/matcore.hpp"
#include "spcp/prox.hpp"
#include "spcp/trace.hpp"

namespace spcp {

/// psi(op(x) - offset); an empty offset means zero.
struct CompositeTerm {
  ProxHandle psi;
  LinearOp op;
  Vector offset;
};

/// psi0(x) + sum_i psi_i(L_i x - b_i) + omega(x).
struct CompositeModel {
  ProxHandle psi0;
  std::vector<CompositeTerm> terms;
  /// Optional extra term acting on x directly; handled as one more term with
  /// the identity operator.
  std::optional<ProxHandle> omega;
  /// Primal dimension; inferred from the operators when zero.
  Index dim = 0;

  [[nodiscard]] Index primal_dim() const;
  [[nodiscard]] Index dual_dim() const;
  /// sum_i ||L_i||^2 (an upper bound on ||L||^2 for the stacked operator).
  [[nodiscard]] double stacked_norm_sq() const;
};

/// Offsets folded into the handles (x -> psi(x - b)) and omega appended as a term.
CompositeModel canonical_model(const CompositeModel& model);
/// Rescales every operator to unit norm bound, compensating inside its handle.
CompositeModel normalize_blocks(const CompositeModel& model);

/// psi0(x) + sum_i psi_i(L_i x - b_i) (+infinity outside the domain).
double composite_objective(const CompositeModel& model, const Vector& x);
/// Stacked L x and L^T w.
Vector stacked_apply(const CompositeModel& model, const Vector& x);
Vector stacked_adjoint(const CompositeModel& model, const Vector& w);

/// x~ = prox_{psi0/mu}(y + L^T w / mu), the gradient of Phi* at L^T w where
/// Phi = psi0 + (mu/2)||. - y||^2.
Vector dual_gradient(const CompositeModel& model, const Vector& y, double mu, const Vector& w);
/// q(z) = Phi*(L^T z) + sum_i psi_i*(-z_i) for a canonical model.
double dual_objective(const CompositeModel& model, const Vector& y, double mu, const Vector& z);

struct FistaOptions {
  double tol = 1e-8;
  Index max_iters = 5000;
  /// Keep t_k = 1 (plain proximal gradient on the dual).
  bool force_t1 = false;
  /// Reset momentum when the step direction opposes the momentum direction.
  bool restart = true;
  /// Dual step bound; 0 selects sum_i ||L_i||^2 / mu.
  double lipschitz = 0.0;
  std::optional<Vector> z0;
  /// Record the primal objective in the trace (costs one extra evaluation per iteration).
  bool trace_objective = false;
  double time_limit = std::numeric_limits<double>::infinity();
  TraceRecorder* recorder = nullptr;
  /// Called after each iteration with (k, z_k, w_{k+1}).
  std::function<void(Index, const Vector&, const Vector&)> on_iterate;
};

struct FistaResult {
  /// x_k = grad Phi*(L^T z_k).
  Vector x;
  /// Last x~ (used for stopping tests).
  Vector x_tilde;
  Vector z;
  Vector w;
  /// ||L x~ - u|| where u are the prox points of the terms (zero when feasible).
  double feasibility_gap = 0.0;
  double lipschitz = 0.0;
  Index iterations = 0;
  Index restarts = 0;
  bool converged = false;
  SolveTrace trace;
};

/// Accelerated proximal gradient on the dual of the smoothed problem
/// min psi0(x) + (mu/2)||x - y||^2 + sum_i psi_i(L_i x - b_i).
FistaResult fista_dual(const CompositeModel& model, const Vector& y, double mu,
                       const FistaOptions& opts = {});

/// d = L^T z + sum_i L_i^T g_i, an element of the subdifferential of the smoothed
/// objective at x = grad Phi*(L^T z) (for a canonical model). g_i is the handle
/// subgradient for finite terms and -z_i for terms with a restricted domain.
/// Throws ConfigError when a finite term has no subgradient.
Vector smoothed_subgradient(const CompositeModel& model, const Vector& x, const Vector& z);

struct ProximalPointOptions {
  /// mu_k; the last entry repeats.
  std::vector<double> mu_schedule{1.0};
  double outer_tol = 1e-6;
  Index max_outer = 200;
  Index inner_max_iters = 5000;
  /// Inner tolerance eps_k = inner_tol0 * 2^-k (summable).
  double inner_tol0 = 1e-3;
  double inner_tol_floor = 1e-13;
  bool normalize = true;
  bool restart = true;
  std::optional<Vector> x0;
  double time_limit = std::numeric_limits<double>::infinity();
  TraceRecorder* recorder = nullptr;
};

struct OuterStep {
  double mu = 0.0;
  double inner_tol = 0.0;
  /// ||d|| / mu, the distance bound to the exact proximal point.
  double certificate = 0.0;
  double feasibility_gap = 0.0;
  double step = 0.0;
  Index inner_iterations = 0;
  bool inner_converged = false;
};

struct ProximalPointResult {
  Vector x;
  Index outer_iterations = 0;
  Index inner_iterations = 0;
  bool converged = false;
  double certificate = 0.0;
  double feasibility_gap = 0.0;
  std::vector<OuterStep> history;
  SolveTrace trace;
};

/// Inexact proximal point method whose subproblems are solved by fista_dual.
ProximalPointResult proximal_point(const CompositeModel& model, const ProximalPointOptions& opts = {});

}  // namespace spcp
