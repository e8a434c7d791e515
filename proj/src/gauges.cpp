#include "spcp/gauges.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spcp/errors.hpp"
#include "spcp/prox.hpp"

namespace spcp {

double PenaltySpec::value(const Vector& r) const {
  if (kind == Kind::least_squares) return 0.5 * r.squaredNorm();
  double s = 0.0;
  for (Index i = 0; i < r.size(); ++i) {
    const double a = std::abs(r(i));
    s += a <= delta ? 0.5 * a * a : delta * (a - 0.5 * delta);
  }
  return s;
}

Vector PenaltySpec::gradient(const Vector& r) const {
  if (kind == Kind::least_squares) return r;
  return r.cwiseMax(-delta).cwiseMin(delta);
}

double gauge_eval(const GaugeSpec& spec, const LowSparsePair& pair) {
  if (spec.nonneg && pair.sparse.size() && pair.sparse.minCoeff() < -1e-12) {
    return std::numeric_limits<double>::infinity();
  }
  const double low = nuclear_norm(pair.low);
  const double sparse = spec.lambda * l1_norm(pair.sparse);
  return spec.combiner == Combiner::sum ? low + sparse : std::max(low, sparse);
}

namespace {

double combine_polar(Combiner c, double low_part, double sparse_part) {
  return c == Combiner::sum ? std::max(low_part, sparse_part) : low_part + sparse_part;
}

}  // namespace

double gauge_polar(const GaugeSpec& spec, const LowSparsePair& z) {
  return combine_polar(spec.combiner, spectral_norm(z.low), max_abs(z.sparse) / spec.lambda);
}

double gauge_support(const GaugeSpec& spec, const LowSparsePair& z) {
  if (!spec.nonneg) return gauge_polar(spec, z);
  const double top = z.sparse.size() ? std::max(z.sparse.maxCoeff(), 0.0) : 0.0;
  return combine_polar(spec.combiner, spectral_norm(z.low), top / spec.lambda);
}

LowSparsePair gauge_project(const GaugeSpec& spec, const LowSparsePair& pair, double radius) {
  return spec.combiner == Combiner::sum ? proj_sum_gauge(pair, spec.lambda, radius, spec.nonneg)
                                        : proj_max_gauge(pair, spec.lambda, radius, spec.nonneg);
}

double value_fn_derivative(const GaugeSpec& spec, const PenaltySpec& penalty, const LinearOp& op,
                           const LowSparsePair& pair_opt, const Vector& data) {
  const Vector x = flatten(pair_opt);
  if (op.in_dim != x.size() || op.out_dim != data.size()) {
    throw InputError("value_fn_derivative: operator does not match pair/data shapes");
  }
  const Vector grad = op.adjoint(penalty.gradient(op.apply(x) - data));
  const LowSparsePair g = unflatten(grad, pair_opt.rows(), pair_opt.cols());
  // v'(tau) = -sigma_C(-g); the polar of a norm ball is symmetric.
  return -gauge_support(spec, {-g.low, -g.sparse});
}

}  // namespace spcp
