#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spcp/matcore.hpp"

namespace spcp {

/// A closed proper convex function given through its proximity operator.
///
/// `prox(x, t)` returns argmin_u t*f(u) + 0.5*||u - x||^2. `conj_eval` evaluates
/// the Fenchel conjugate and `subgradient` returns one element of the
/// subdifferential, or nullopt outside the domain. Both are optional; the
/// library factories below fill them in.
struct ProxHandle {
  std::string name;
  std::function<double(const Vector&)> eval;
  std::function<Vector(const Vector&, double)> prox;
  std::function<double(const Vector&)> conj_eval;
  std::function<std::optional<Vector>(const Vector&)> subgradient;
  /// True when f takes the value +infinity somewhere (indicators and sums containing one).
  bool restricted_domain = false;

  [[nodiscard]] double value(const Vector& x) const { return eval(x); }
  [[nodiscard]] Vector operator()(const Vector& x, double t = 1.0) const { return prox(x, t); }
};

// Elementwise and spectral building blocks.

/// sign(x_i) * max(|x_i| - t, 0).
Vector soft_threshold(const Vector& x, double t);
Matrix soft_threshold(const Matrix& x, double t);
/// Singular value thresholding: prox of t*||.||_*.
Matrix svt(const Matrix& m, double t);

/// Euclidean projection onto {||u||_1 <= radius}; with `nonneg`, onto its
/// intersection with the nonnegative orthant.
Vector proj_l1_ball(const Vector& x, double radius, bool nonneg = false);
/// Projection onto {sum_i weights_i |u_i| <= radius}. O(d log d).
Vector proj_weighted_l1_ball(const Vector& x, const Vector& weights, double radius,
                             bool nonneg = false);
Matrix proj_nuclear_ball(const Matrix& m, double radius);
/// Projection onto {||L||_* + lambda ||S||_1 <= radius} (optionally with S >= 0).
LowSparsePair proj_sum_gauge(const LowSparsePair& pair, double lambda, double radius,
                             bool nonneg = false);
/// Projection onto {max(||L||_*, lambda ||S||_1) <= radius} (optionally with S >= 0).
LowSparsePair proj_max_gauge(const LowSparsePair& pair, double lambda, double radius,
                             bool nonneg = false);

/// Threshold theta >= 0 for the weighted l1 projection of the magnitudes `abs_x`.
/// Zero when the point is already feasible.
double weighted_l1_threshold(const Vector& abs_x, const Vector& weights, double radius);

// Handle factories. Matrix-valued handles act on column-major vec(M).

ProxHandle prox_zero();
/// scale * ||x||_1
ProxHandle prox_l1(double scale = 1.0);
/// scale * ||X||_* for X of the given shape.
ProxHandle prox_nuclear(Index rows, Index cols, double scale = 1.0);
/// (scale / 2) * ||x||^2
ProxHandle prox_sq_norm(double scale = 1.0);
/// Huber function with threshold delta, summed over coordinates.
ProxHandle prox_huber(double delta);
/// Indicator of the single point `center` (of {0} when center is empty).
ProxHandle prox_indicator_point(Vector center = {});
/// Indicator of {||x||_2 <= radius}.
ProxHandle prox_indicator_l2_ball(double radius);
/// Indicator of {||x||_inf <= radius}.
ProxHandle prox_indicator_linf_ball(double radius);
/// Indicator of {||x||_1 <= radius}.
ProxHandle prox_indicator_l1_ball(double radius);
/// Indicator of {||X||_* <= radius}.
ProxHandle prox_indicator_nuclear_ball(Index rows, Index cols, double radius);
/// Indicator of the nonnegative orthant.
ProxHandle prox_indicator_nonneg();

/// Block-separable sum f(x) = sum_j f_j(x_j) over consecutive blocks of the given sizes.
ProxHandle prox_separable(std::vector<std::pair<ProxHandle, Index>> blocks);
/// x -> f(x - offset).
ProxHandle prox_shifted(const ProxHandle& f, Vector offset);
/// x -> f(factor * x), factor != 0.
ProxHandle prox_precomposed_scale(const ProxHandle& f, double factor);
/// x -> f(-x).
ProxHandle prox_reflected(const ProxHandle& f);
/// ||L||_* + lambda ||S||_1 over flattened pairs [vec(L); vec(S)].
ProxHandle prox_sum_gauge_penalty(Index rows, Index cols, double lambda);

// Moreau calculus.

/// prox_{t f*}(x) = x - t * prox_{f/t}(x / t).
Vector moreau_conjugate_prox(const ProxHandle& f, const Vector& x, double t = 1.0);
/// prox of f(-.) at x: -prox_f(-x).
Vector reflected_prox(const ProxHandle& f, const Vector& x);

}  // namespace spcp
