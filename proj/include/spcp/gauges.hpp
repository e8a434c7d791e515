#pragma once

#include "spcp/matcore.hpp"

namespace spcp {

enum class Combiner { sum, max };

/// Regularizer phi(L, S) combining ||L||_* and lambda ||S||_1 by sum or max,
/// optionally restricted to S >= 0.
struct GaugeSpec {
  Combiner combiner = Combiner::sum;
  double lambda = 1.0;
  bool nonneg = false;
};

/// Smooth convex misfit rho applied to a residual.
struct PenaltySpec {
  enum class Kind { least_squares, huber };
  Kind kind = Kind::least_squares;
  double delta = 1.0;

  static PenaltySpec least_squares() { return {}; }
  static PenaltySpec huber(double delta = 1.0) { return {Kind::huber, delta}; }

  /// least squares: 0.5 ||r||^2; huber: sum of per-entry Huber values.
  [[nodiscard]] double value(const Vector& r) const;
  [[nodiscard]] Vector gradient(const Vector& r) const;
  /// Lipschitz constant of the gradient (1 for both kinds).
  [[nodiscard]] double curvature_bound() const { return 1.0; }
};

/// phi(L, S); +infinity when nonneg and some S entry < -1e-12.
double gauge_eval(const GaugeSpec& spec, const LowSparsePair& pair);
/// Polar gauge: sum -> max(||Z1||_2, ||Z2||_inf / lambda); max -> ||Z1||_2 + ||Z2||_inf / lambda.
double gauge_polar(const GaugeSpec& spec, const LowSparsePair& z);
/// Support function of {phi <= 1} intersected with {S >= 0} (equals gauge_polar without nonneg).
double gauge_support(const GaugeSpec& spec, const LowSparsePair& z);
/// Euclidean projection onto {phi <= radius}.
LowSparsePair gauge_project(const GaugeSpec& spec, const LowSparsePair& pair, double radius);

/// v'(tau) = -phi_polar(op^T grad rho(op(pair) - data)) at a solution of the
/// flipped problem. With nonneg the support function of the cone-restricted
/// ball replaces the polar.
double value_fn_derivative(const GaugeSpec& spec, const PenaltySpec& penalty, const LinearOp& op,
                           const LowSparsePair& pair_opt, const Vector& data);

}  // namespace spcp
