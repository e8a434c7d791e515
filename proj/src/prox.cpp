#include "spcp/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "spcp/errors.hpp"

namespace spcp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive_step(double t, const char* where) {
  if (!(t > 0.0)) throw InputError(std::string(where) + ": step must be positive");
}

void require_radius(double r, const char* where) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw InputError(std::string(where) + ": radius must be finite and nonnegative");
  }
}

// Membership slack for indicator evaluations.
double slack(double radius) { return 1e-10 * std::max(1.0, radius); }

Matrix svd_with_sigma(const Matrix& m, const std::function<Vector(const Vector&)>& shrink) {
  SvdFactors f = svd_full(m);
  const Vector s = shrink(f.sigma);
  return f.U * s.asDiagonal() * f.V.transpose();
}

}  // namespace

Vector soft_threshold(const Vector& x, double t) {
  require_positive_step(t, "soft_threshold");
  Vector y(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double a = std::abs(x(i)) - t;
    y(i) = a > 0.0 ? std::copysign(a, x(i)) : 0.0;
  }
  return y;
}

Matrix soft_threshold(const Matrix& x, double t) {
  return unvec(soft_threshold(Vector(vec(x)), t), x.rows(), x.cols());
}

Matrix svt(const Matrix& m, double t) {
  require_positive_step(t, "svt");
  return svd_with_sigma(m, [t](const Vector& s) { return Vector((s.array() - t).max(0.0)); });
}

Vector proj_l1_ball(const Vector& x, double radius, bool nonneg) {
  require_radius(radius, "proj_l1_ball");
  Vector y = nonneg ? Vector(x.cwiseMax(0.0)) : x;
  if (radius == 0.0) return Vector::Zero(x.size());
  const Vector a = y.cwiseAbs();
  if (a.sum() <= radius) return y;

  // Sort magnitudes descending and find the largest k with a_(k) > theta_k.
  std::vector<double> sorted(a.data(), a.data() + a.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumsum += sorted[k];
    const double candidate = (cumsum - radius) / static_cast<double>(k + 1);
    if (sorted[k] > candidate) theta = candidate;
  }
  for (Index i = 0; i < y.size(); ++i) {
    const double m = a(i) - theta;
    y(i) = m > 0.0 ? std::copysign(m, y(i)) : 0.0;
  }
  return y;
}

double weighted_l1_threshold(const Vector& abs_x, const Vector& weights, double radius) {
  if (abs_x.size() != weights.size()) throw InputError("weighted l1: size mismatch");
  if (abs_x.dot(weights) <= radius) return 0.0;

  // Breakpoints |x_i| / w_i, descending; stable order for ties.
  std::vector<Index> order(static_cast<std::size_t>(abs_x.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
    return abs_x(i) / weights(i) > abs_x(j) / weights(j);
  });

  double num = 0.0;  // sum w_j |x_j| over active set
  double den = 0.0;  // sum w_j^2 over active set
  double theta = 0.0;
  for (const Index i : order) {
    num += weights(i) * abs_x(i);
    den += weights(i) * weights(i);
    const double candidate = (num - radius) / den;
    if (abs_x(i) / weights(i) > candidate) theta = candidate;
  }
  return std::max(theta, 0.0);
}

Vector proj_weighted_l1_ball(const Vector& x, const Vector& weights, double radius, bool nonneg) {
  require_radius(radius, "proj_weighted_l1_ball");
  if (weights.size() != x.size()) throw InputError("proj_weighted_l1_ball: size mismatch");
  if (weights.size() > 0 && !(weights.minCoeff() > 0.0)) {
    throw InputError("proj_weighted_l1_ball: weights must be positive");
  }
  Vector y = nonneg ? Vector(x.cwiseMax(0.0)) : x;
  if (radius == 0.0) return Vector::Zero(x.size());
  const Vector a = y.cwiseAbs();
  const double theta = weighted_l1_threshold(a, weights, radius);
  if (theta == 0.0) return y;
  for (Index i = 0; i < y.size(); ++i) {
    const double m = a(i) - theta * weights(i);
    y(i) = m > 0.0 ? std::copysign(m, y(i)) : 0.0;
  }
  return y;
}

Matrix proj_nuclear_ball(const Matrix& m, double radius) {
  require_radius(radius, "proj_nuclear_ball");
  if (radius == 0.0) return Matrix::Zero(m.rows(), m.cols());
  SvdFactors f = svd_full(m);
  if (f.sigma.sum() <= radius) return m;
  const Vector s = proj_l1_ball(f.sigma, radius, true);
  return f.U * s.asDiagonal() * f.V.transpose();
}

LowSparsePair proj_sum_gauge(const LowSparsePair& pair, double lambda, double radius,
                             bool nonneg) {
  if (!(lambda > 0.0)) throw InputError("proj_sum_gauge: lambda must be positive");
  require_radius(radius, "proj_sum_gauge");
  const Index m = pair.rows();
  const Index n = pair.cols();
  if (radius == 0.0) return LowSparsePair::zeros(m, n);

  const Matrix s_in = nonneg ? Matrix(pair.sparse.cwiseMax(0.0)) : pair.sparse;
  SvdFactors f = svd_full(pair.low);
  const Index k = f.sigma.size();
  const Index mn = s_in.size();

  Vector mags(k + mn);
  Vector weights(k + mn);
  mags.head(k) = f.sigma;
  mags.tail(mn) = vec(s_in).cwiseAbs();
  weights.head(k).setOnes();
  weights.tail(mn).setConstant(lambda);

  const double theta = weighted_l1_threshold(mags, weights, radius);
  if (theta == 0.0) return {pair.low, s_in};

  const Vector sigma = (f.sigma.array() - theta).max(0.0);
  Matrix s_out = s_in;
  for (Index i = 0; i < mn; ++i) {
    const double v = s_out.data()[i];
    const double shrunk = std::abs(v) - theta * lambda;
    s_out.data()[i] = shrunk > 0.0 ? std::copysign(shrunk, v) : 0.0;
  }
  return {f.U * sigma.asDiagonal() * f.V.transpose(), s_out};
}

LowSparsePair proj_max_gauge(const LowSparsePair& pair, double lambda, double radius,
                             bool nonneg) {
  if (!(lambda > 0.0)) throw InputError("proj_max_gauge: lambda must be positive");
  require_radius(radius, "proj_max_gauge");
  const Vector s = proj_l1_ball(vec(pair.sparse), radius / lambda, nonneg);
  return {proj_nuclear_ball(pair.low, radius), unvec(s, pair.rows(), pair.cols())};
}

// ---------------------------------------------------------------------------
// Handles

ProxHandle prox_zero() {
  ProxHandle h;
  h.name = "zero";
  h.eval = [](const Vector&) { return 0.0; };
  h.prox = [](const Vector& x, double) { return x; };
  h.conj_eval = [](const Vector& z) { return z.lpNorm<Eigen::Infinity>() <= 1e-12 ? 0.0 : kInf; };
  h.subgradient = [](const Vector& x) -> std::optional<Vector> { return Vector::Zero(x.size()); };
  return h;
}

ProxHandle prox_l1(double scale) {
  if (!(scale > 0.0)) throw InputError("prox_l1: scale must be positive");
  ProxHandle h;
  h.name = "l1";
  h.eval = [scale](const Vector& x) { return scale * x.lpNorm<1>(); };
  h.prox = [scale](const Vector& x, double t) { return soft_threshold(x, t * scale); };
  h.conj_eval = [scale](const Vector& z) {
    return z.size() == 0 || z.lpNorm<Eigen::Infinity>() <= scale + slack(scale) ? 0.0 : kInf;
  };
  h.subgradient = [scale](const Vector& x) -> std::optional<Vector> {
    return Vector(scale * x.array().sign());
  };
  return h;
}

ProxHandle prox_nuclear(Index rows, Index cols, double scale) {
  if (!(scale > 0.0)) throw InputError("prox_nuclear: scale must be positive");
  ProxHandle h;
  h.name = "nuclear";
  h.eval = [=](const Vector& x) { return scale * nuclear_norm(unvec(x, rows, cols)); };
  h.prox = [=](const Vector& x, double t) { return vec(svt(unvec(x, rows, cols), t * scale)); };
  h.conj_eval = [=](const Vector& z) {
    return spectral_norm(unvec(z, rows, cols)) <= scale + slack(scale) ? 0.0 : kInf;
  };
  h.subgradient = [=](const Vector& x) -> std::optional<Vector> {
    SvdFactors f = svd_full(unvec(x, rows, cols));
    const double tol = 1e-12 * std::max(1.0, f.sigma.size() ? f.sigma(0) : 0.0);
    Matrix g = Matrix::Zero(rows, cols);
    for (Index j = 0; j < f.sigma.size(); ++j) {
      if (f.sigma(j) > tol) g += f.U.col(j) * f.V.col(j).transpose();
    }
    return Vector(scale * vec(g));
  };
  return h;
}

ProxHandle prox_sq_norm(double scale) {
  if (!(scale > 0.0)) throw InputError("prox_sq_norm: scale must be positive");
  ProxHandle h;
  h.name = "sq_norm";
  h.eval = [scale](const Vector& x) { return 0.5 * scale * x.squaredNorm(); };
  h.prox = [scale](const Vector& x, double t) -> Vector { return x / (1.0 + t * scale); };
  h.conj_eval = [scale](const Vector& z) { return 0.5 * z.squaredNorm() / scale; };
  h.subgradient = [scale](const Vector& x) -> std::optional<Vector> { return Vector(scale * x); };
  return h;
}

ProxHandle prox_huber(double delta) {
  if (!(delta > 0.0)) throw InputError("prox_huber: delta must be positive");
  ProxHandle h;
  h.name = "huber";
  h.eval = [delta](const Vector& x) {
    double s = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      const double a = std::abs(x(i));
      s += a <= delta ? 0.5 * a * a : delta * (a - 0.5 * delta);
    }
    return s;
  };
  h.prox = [delta](const Vector& x, double t) {
    Vector y(x.size());
    for (Index i = 0; i < x.size(); ++i) {
      y(i) = std::abs(x(i)) <= delta * (1.0 + t) ? x(i) / (1.0 + t)
                                                 : x(i) - t * delta * (x(i) > 0 ? 1.0 : -1.0);
    }
    return y;
  };
  h.conj_eval = [delta](const Vector& z) {
    return z.lpNorm<Eigen::Infinity>() <= delta + slack(delta) ? 0.5 * z.squaredNorm() : kInf;
  };
  h.subgradient = [delta](const Vector& x) -> std::optional<Vector> {
    return Vector(x.cwiseMax(-delta).cwiseMin(delta));
  };
  return h;
}

ProxHandle prox_indicator_point(Vector center) {
  ProxHandle h;
  h.name = "indicator_point";
  h.restricted_domain = true;
  auto c = std::make_shared<Vector>(std::move(center));
  auto resolve = [c](Index n) -> Vector { return c->size() == 0 ? Vector(Vector::Zero(n)) : *c; };
  h.eval = [resolve](const Vector& x) {
    const Vector c0 = resolve(x.size());
    return (x - c0).lpNorm<Eigen::Infinity>() <= slack(c0.lpNorm<Eigen::Infinity>()) ? 0.0 : kInf;
  };
  h.prox = [resolve](const Vector& x, double) { return resolve(x.size()); };
  h.conj_eval = [resolve](const Vector& z) { return z.dot(resolve(z.size())); };
  h.subgradient = [resolve](const Vector& x) -> std::optional<Vector> {
    const Vector c0 = resolve(x.size());
    if ((x - c0).lpNorm<Eigen::Infinity>() > slack(c0.lpNorm<Eigen::Infinity>())) return std::nullopt;
    return Vector(Vector::Zero(x.size()));
  };
  return h;
}

ProxHandle prox_indicator_l2_ball(double radius) {
  require_radius(radius, "prox_indicator_l2_ball");
  ProxHandle h;
  h.name = "indicator_l2_ball";
  h.restricted_domain = true;
  h.eval = [radius](const Vector& x) { return x.norm() <= radius + slack(radius) ? 0.0 : kInf; };
  h.prox = [radius](const Vector& x, double) -> Vector {
    const double nx = x.norm();
    return nx <= radius ? x : Vector(x * (radius / nx));
  };
  h.conj_eval = [radius](const Vector& z) { return radius * z.norm(); };
  h.subgradient = [radius](const Vector& x) -> std::optional<Vector> {
    if (x.norm() > radius + slack(radius)) return std::nullopt;
    return Vector(Vector::Zero(x.size()));
  };
  return h;
}

ProxHandle prox_indicator_linf_ball(double radius) {
  require_radius(radius, "prox_indicator_linf_ball");
  ProxHandle h;
  h.name = "indicator_linf_ball";
  h.restricted_domain = true;
  h.eval = [radius](const Vector& x) {
    return x.size() == 0 || x.lpNorm<Eigen::Infinity>() <= radius + slack(radius) ? 0.0 : kInf;
  };
  h.prox = [radius](const Vector& x, double) -> Vector {
    return x.cwiseMax(-radius).cwiseMin(radius);
  };
  h.conj_eval = [radius](const Vector& z) { return radius * z.lpNorm<1>(); };
  h.subgradient = [radius](const Vector& x) -> std::optional<Vector> {
    if (x.size() && x.lpNorm<Eigen::Infinity>() > radius + slack(radius)) return std::nullopt;
    return Vector(Vector::Zero(x.size()));
  };
  return h;
}

ProxHandle prox_indicator_l1_ball(double radius) {
  require_radius(radius, "prox_indicator_l1_ball");
  ProxHandle h;
  h.name = "indicator_l1_ball";
  h.restricted_domain = true;
  h.eval = [radius](const Vector& x) { return x.lpNorm<1>() <= radius + slack(radius) ? 0.0 : kInf; };
  h.prox = [radius](const Vector& x, double) { return proj_l1_ball(x, radius); };
  h.conj_eval = [radius](const Vector& z) {
    return z.size() ? radius * z.lpNorm<Eigen::Infinity>() : 0.0;
  };
  h.subgradient = [radius](const Vector& x) -> std::optional<Vector> {
    if (x.lpNorm<1>() > radius + slack(radius)) return std::nullopt;
    return Vector(Vector::Zero(x.size()));
  };
  return h;
}

ProxHandle prox_indicator_nuclear_ball(Index rows, Index cols, double radius) {
  require_radius(radius, "prox_indicator_nuclear_ball");
  ProxHandle h;
  h.name = "indicator_nuclear_ball";
  h.restricted_domain = true;
  h.eval = [=](const Vector& x) {
    return nuclear_norm(unvec(x, rows, cols)) <= radius + slack(radius) ? 0.0 : kInf;
  };
  h.prox = [=](const Vector& x, double) { return vec(proj_nuclear_ball(unvec(x, rows, cols), radius)); };
  h.conj_eval = [=](const Vector& z) { return radius * spectral_norm(unvec(z, rows, cols)); };
  h.subgradient = [=](const Vector& x) -> std::optional<Vector> {
    if (nuclear_norm(unvec(x, rows, cols)) > radius + slack(radius)) return std::nullopt;
    return Vector(Vector::Zero(x.size()));
  };
  return h;
}

ProxHandle prox_indicator_nonneg() {
  ProxHandle h;
  h.name = "indicator_nonneg";
  h.restricted_domain = true;
  h.eval = [](const Vector& x) { return x.size() == 0 || x.minCoeff() >= -1e-12 ? 0.0 : kInf; };
  h.prox = [](const Vector& x, double) -> Vector { return x.cwiseMax(0.0); };
  h.conj_eval = [](const Vector& z) { return z.size() == 0 || z.maxCoeff() <= 1e-12 ? 0.0 : kInf; };
  h.subgradient = [](const Vector& x) -> std::optional<Vector> {
    if (x.size() && x.minCoeff() < -1e-12) return std::nullopt;
    return Vector(Vector::Zero(x.size()));
  };
  return h;
}

ProxHandle prox_separable(std::vector<std::pair<ProxHandle, Index>> blocks) {
  if (blocks.empty()) throw InputError("prox_separable: no blocks");
  auto parts = std::make_shared<const std::vector<std::pair<ProxHandle, Index>>>(std::move(blocks));
  Index total = 0;
  ProxHandle h;
  h.name = "separable(";
  for (const auto& [f, size] : *parts) {
    h.name += f.name + ",";
    total += size;
    h.restricted_domain = h.restricted_domain || f.restricted_domain;
  }
  h.name.back() = ')';
  auto check = [total](const Vector& x) {
    if (x.size() != total) throw InputError("separable handle: input size mismatch");
  };
  h.eval = [parts, check](const Vector& x) {
    check(x);
    double s = 0.0;
    Index off = 0;
    for (const auto& [f, size] : *parts) {
      s += f.eval(x.segment(off, size));
      off += size;
    }
    return s;
  };
  h.prox = [parts, check](const Vector& x, double t) {
    check(x);
    Vector y(x.size());
    Index off = 0;
    for (const auto& [f, size] : *parts) {
      y.segment(off, size) = f.prox(x.segment(off, size), t);
      off += size;
    }
    return y;
  };
  const bool has_conj = std::all_of(parts->begin(), parts->end(),
                                    [](const auto& p) { return static_cast<bool>(p.first.conj_eval); });
  if (has_conj) {
    h.conj_eval = [parts, check](const Vector& z) {
      check(z);
      double s = 0.0;
      Index off = 0;
      for (const auto& [f, size] : *parts) {
        s += f.conj_eval(z.segment(off, size));
        off += size;
      }
      return s;
    };
  }
  const bool has_sub = std::all_of(parts->begin(), parts->end(),
                                   [](const auto& p) { return static_cast<bool>(p.first.subgradient); });
  if (has_sub) {
    h.subgradient = [parts, check](const Vector& x) -> std::optional<Vector> {
      check(x);
      Vector g(x.size());
      Index off = 0;
      for (const auto& [f, size] : *parts) {
        auto gj = f.subgradient(x.segment(off, size));
        if (!gj) return std::nullopt;
        g.segment(off, size) = *gj;
        off += size;
      }
      return g;
    };
  }
  return h;
}

ProxHandle prox_shifted(const ProxHandle& f, Vector offset) {
  auto b = std::make_shared<const Vector>(std::move(offset));
  ProxHandle h;
  h.name = "shifted(" + f.name + ")";
  h.restricted_domain = f.restricted_domain;
  h.eval = [f, b](const Vector& x) { return f.eval(x - *b); };
  h.prox = [f, b](const Vector& x, double t) -> Vector { return *b + f.prox(x - *b, t); };
  if (f.conj_eval) {
    h.conj_eval = [f, b](const Vector& z) { return f.conj_eval(z) + z.dot(*b); };
  }
  if (f.subgradient) {
    h.subgradient = [f, b](const Vector& x) { return f.subgradient(x - *b); };
  }
  return h;
}

ProxHandle prox_precomposed_scale(const ProxHandle& f, double factor) {
  if (factor == 0.0 || !std::isfinite(factor)) throw InputError("prox_precomposed_scale: bad factor");
  ProxHandle h;
  h.name = "scaled(" + f.name + ")";
  h.restricted_domain = f.restricted_domain;
  h.eval = [f, factor](const Vector& x) { return f.eval(factor * x); };
  // argmin t f(a u) + 1/2 ||u - x||^2 = (1/a) prox_{t a^2 f}(a x)
  h.prox = [f, factor](const Vector& x, double t) -> Vector {
    return f.prox(factor * x, t * factor * factor) / factor;
  };
  if (f.conj_eval) {
    h.conj_eval = [f, factor](const Vector& z) { return f.conj_eval(z / factor); };
  }
  if (f.subgradient) {
    h.subgradient = [f, factor](const Vector& x) -> std::optional<Vector> {
      auto g = f.subgradient(factor * x);
      if (!g) return std::nullopt;
      return Vector(factor * *g);
    };
  }
  return h;
}

ProxHandle prox_reflected(const ProxHandle& f) {
  ProxHandle h = prox_precomposed_scale(f, -1.0);
  h.name = "reflected(" + f.name + ")";
  return h;
}

ProxHandle prox_sum_gauge_penalty(Index rows, Index cols, double lambda) {
  if (!(lambda > 0.0)) throw InputError("prox_sum_gauge_penalty: lambda must be positive");
  return prox_separable({{prox_nuclear(rows, cols, 1.0), rows * cols},
                         {prox_l1(lambda), rows * cols}});
}

Vector moreau_conjugate_prox(const ProxHandle& f, const Vector& x, double t) {
  require_positive_step(t, "moreau_conjugate_prox");
  if (t == 1.0) return x - f.prox(x, 1.0);
  return x - t * f.prox(x / t, 1.0 / t);
}

Vector reflected_prox(const ProxHandle& f, const Vector& x) { return -f.prox(-x, 1.0); }

}  // namespace spcp
