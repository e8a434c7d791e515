#include "spcp/subsolvers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

#include "spcp/errors.hpp"
#include "spcp/prox.hpp"

namespace spcp {

namespace {

double data_scale(const Vector& b) {
  const double s = b.norm();
  return s > 0.0 ? s : 1.0;
}

void validate(const FlipProblem& p) {
  if (!(p.tau >= 0.0) || !std::isfinite(p.tau)) throw InputError("flip problem: tau must be finite and >= 0");
  if (!(p.gauge.lambda > 0.0)) throw InputError("flip problem: lambda must be positive");
  if (p.op.in_dim != 2 * p.rows * p.cols || p.op.out_dim != p.data.size()) {
    throw InputError("flip problem: operator does not match the pair / data shapes");
  }
}

void validate(const LagProblem& p) {
  if (!(p.lambda_L > 0.0) || !(p.lambda_S > 0.0)) {
    throw InputError("lagrangian problem: lambda_L and lambda_S must be positive");
  }
  require_finite(p.A, "lagrangian problem");
}

/// Nuclear-norm shrinkage and projection with optional randomized partial SVDs.
class SpectralEngine {
 public:
  struct Out {
    Matrix m;
    double nuclear = 0.0;
  };

  SpectralEngine(bool partial, Index limit) : partial_(partial), limit_(std::max<Index>(limit, 1)) {}

  void set_iteration(Index k) { iter_ = k; }

  Out shrink(const Matrix& x, double t) {
    auto apply = [&](const SvdFactors& f) {
      const Vector s = (f.sigma.array() - t).max(0.0);
      hint_ = (s.array() > 0.0).count();
      return Out{f.U * s.asDiagonal() * f.V.transpose(), s.sum()};
    };
    if (!partial_) return apply(svd_full(x));
    const Index min_dim = std::min(x.rows(), x.cols());
    if (iter_ < 2) return apply(svd_randomized(x, std::min(limit_, min_dim)));
    for (Index k = std::max<Index>(hint_ + 5, 1);; k *= 2) {
      if (k >= min_dim) return apply(svd_full(x));
      SvdFactors f = svd_randomized(x, k);
      if (f.sigma(k - 1) <= t) return apply(f);
    }
  }

  Out project(const Matrix& x, double radius) {
    if (radius == 0.0) return {Matrix::Zero(x.rows(), x.cols()), 0.0};
    auto apply = [&](const SvdFactors& f, bool exact) {
      if (exact && f.sigma.sum() <= radius) {
        hint_ = f.sigma.size();
        return Out{x, f.sigma.sum()};
      }
      const Vector s = proj_l1_ball(f.sigma, radius, true);
      hint_ = (s.array() > 0.0).count();
      return Out{f.U * s.asDiagonal() * f.V.transpose(), s.sum()};
    };
    if (!partial_) return apply(svd_full(x), true);
    const Index min_dim = std::min(x.rows(), x.cols());
    if (iter_ < 2) return apply(svd_randomized(x, std::min(limit_, min_dim)), false);
    for (Index k = std::max<Index>(hint_ + 5, 1);; k *= 2) {
      if (k >= min_dim) return apply(svd_full(x), true);
      SvdFactors f = svd_randomized(x, k);
      if (f.sigma.sum() <= radius) continue;
      const Vector s = proj_l1_ball(f.sigma, radius, true);
      const double theta = f.sigma(0) - s(0);
      if (f.sigma(k - 1) <= theta) return apply(f, false);
    }
  }

 private:
  bool partial_;
  Index limit_;
  Index iter_ = 0;
  Index hint_ = 0;
};

/// Block structure shared by the flipped-max and Lagrangian quasi-Newton solvers.
struct QnModel {
  Index rows = 0;
  Index cols = 0;
  /// Gradient of the smooth misfit at (L, S) split into blocks.
  std::function<void(const Matrix&, const Matrix&, Matrix&, Matrix&)> gradient;
  /// Block steps with step length eta: projection (flip) or prox (Lagrangian).
  std::function<SpectralEngine::Out(SpectralEngine&, const Matrix&, double)> step_low;
  std::function<Matrix(const Matrix&, double)> step_sparse;
  /// Objective given the nuclear norm of L.
  std::function<double(const Matrix&, const Matrix&, double)> objective;
  double eta = 1.0;
  double lip = 2.0;
  double scale = 1.0;
};

double qn_certificate(const QnModel& q, const Matrix& l, const Matrix& s) {
  SpectralEngine exact(false, 0);
  Matrix gl;
  Matrix gs;
  q.gradient(l, s, gl, gs);
  const Matrix tl = q.step_low(exact, l - gl / q.lip, 1.0 / q.lip).m;
  const Matrix ts = q.step_sparse(s - gs / q.lip, 1.0 / q.lip);
  return std::sqrt((l - tl).squaredNorm() + (s - ts).squaredNorm());
}

SubsolveResult run_qn(const QnModel& q, const SubsolverOptions& opts, const SubsolverMemory* warm) {
  TraceRecorder local;
  TraceRecorder& rec = opts.recorder ? *opts.recorder : local;
  SpectralEngine engine(opts.partial_svd, opts.initial_rank_limit);
  const double half_c = 0.5 * opts.qn_scale;

  Matrix l = Matrix::Zero(q.rows, q.cols);
  Matrix s = Matrix::Zero(q.rows, q.cols);
  Matrix lp = l;
  Matrix sp = s;
  if (warm && warm->valid) {
    l = warm->pair.low;
    s = warm->pair.sparse;
    lp = warm->previous.low;
    sp = warm->previous.sparse;
  }

  SubsolveResult res;
  double obj = q.objective(l, s, nuclear_norm(l));
  double best_obj = obj;
  Matrix best_l = l;
  Matrix best_s = s;
  Matrix gl;
  Matrix gs;

  for (Index k = 0; k < opts.max_iters; ++k) {
    engine.set_iteration(k);
    const Matrix s_ex = s + half_c * (s - sp);
    q.gradient(l, s_ex, gl, gs);
    SpectralEngine::Out lo = q.step_low(engine, l - q.eta * gl, q.eta);
    const Matrix l_ex = l + half_c * (lo.m - l);
    q.gradient(l_ex, s, gl, gs);
    Matrix sn = q.step_sparse(s - q.eta * gs, q.eta);
    double obj_new = q.objective(lo.m, sn, lo.nuclear);

    bool fell_back = false;
    if (obj_new > 10.0 * best_obj && obj_new - best_obj > 1e-12 * q.scale * q.scale) {
      // Divergence guard: plain proximal-gradient step from the current point.
      q.gradient(l, s, gl, gs);
      lo = q.step_low(engine, l - gl / q.lip, 1.0 / q.lip);
      sn = q.step_sparse(s - gs / q.lip, 1.0 / q.lip);
      obj_new = q.objective(lo.m, sn, lo.nuclear);
      fell_back = true;
      res.fallback_used = true;
    }

    const double move = std::sqrt((lo.m - l).squaredNorm() + (sn - s).squaredNorm());
    if (fell_back) {
      lp = lo.m;
      sp = sn;
    } else {
      lp = std::move(l);
      sp = std::move(s);
    }
    l = std::move(lo.m);
    s = std::move(sn);
    obj = obj_new;
    res.iterations = k + 1;

    if (rec.tracks_error()) {
      const Vector flat = flatten({l, s});
      rec.record(obj, move, &flat);
    } else {
      rec.record(obj, move);
    }
    if (obj <= best_obj) {
      best_obj = obj;
      best_l = l;
      best_s = s;
    }
    if (move <= 10.0 * opts.tol * q.scale) {
      res.certificate = qn_certificate(q, l, s);
      if (res.certificate <= opts.tol * q.scale) {
        res.converged = true;
        break;
      }
    }
    if (rec.should_stop(opts.time_limit)) break;
  }

  if (res.converged) {
    res.pair = {l, s};
    res.objective = obj;
  } else {
    res.pair = {best_l, best_s};
    res.objective = best_obj;
    res.certificate = qn_certificate(q, best_l, best_s);
    res.converged = res.certificate <= opts.tol * q.scale;
  }
  res.memory = {res.pair, {lp, sp}, 0.0, true};
  res.trace = rec.trace();
  res.trace.converged = res.converged;
  res.trace.status = res.converged ? "converged" : "max iterations or time limit reached";
  return res;
}

}  // namespace

FlipProblem make_flip_problem(const GaugeSpec& gauge, double tau, const Matrix& a,
                              const PenaltySpec& penalty) {
  require_finite(a, "make_flip_problem");
  FlipProblem p;
  p.gauge = gauge;
  p.tau = tau;
  p.penalty = penalty;
  p.op = op_sum_identity(a.rows(), a.cols());
  p.data = vec(a);
  p.rows = a.rows();
  p.cols = a.cols();
  return p;
}

double flip_objective(const FlipProblem& p, const LowSparsePair& pair) {
  return p.penalty.value(p.op.apply(flatten(pair)) - p.data);
}

double flip_certificate(const FlipProblem& p, const LowSparsePair& pair) {
  const Vector x = flatten(pair);
  const double lip = p.penalty.curvature_bound() * p.op.norm_bound * p.op.norm_bound;
  const Vector g = p.op.adjoint(p.penalty.gradient(p.op.apply(x) - p.data));
  const Vector t = flatten(gauge_project(p.gauge, unflatten(x - g / lip, p.rows, p.cols), p.tau));
  return (x - t).norm();
}

double lag_objective(const LagProblem& p, const LowSparsePair& pair) {
  return p.lambda_L * nuclear_norm(pair.low) + p.lambda_S * l1_norm(pair.sparse) +
         0.5 * (pair.low + pair.sparse - p.A).squaredNorm();
}

double lag_certificate(const LagProblem& p, const LowSparsePair& pair) {
  const Matrix r = pair.low + pair.sparse - p.A;
  const Matrix tl = svt(pair.low - 0.5 * r, 0.5 * p.lambda_L);
  const Matrix ts = soft_threshold(Matrix(pair.sparse - 0.5 * r), 0.5 * p.lambda_S);
  return std::sqrt((pair.low - tl).squaredNorm() + (pair.sparse - ts).squaredNorm());
}

SubsolveResult solve_flip_spg(const FlipProblem& p, const SubsolverOptions& opts,
                              const SubsolverMemory* warm) {
  validate(p);
  TraceRecorder local;
  TraceRecorder& rec = opts.recorder ? *opts.recorder : local;
  const Index m = p.rows;
  const Index n = p.cols;
  const double lip = std::max(p.penalty.curvature_bound() * p.op.norm_bound * p.op.norm_bound, 1e-300);
  const double scale = data_scale(p.data);

  auto project = [&](const Vector& x) { return flatten(gauge_project(p.gauge, unflatten(x, m, n), p.tau)); };
  auto objective = [&](const Vector& x) { return p.penalty.value(p.op.apply(x) - p.data); };
  auto gradient = [&](const Vector& x) -> Vector {
    return p.op.adjoint(p.penalty.gradient(p.op.apply(x) - p.data));
  };

  SubsolveResult res;
  Vector x = Vector::Zero(2 * m * n);
  if (warm && warm->valid && p.tau > 0.0) x = project(flatten(warm->pair));
  double f = objective(x);
  Vector g = gradient(x);
  double alpha = warm && warm->valid && warm->bb_step > 0.0 ? warm->bb_step : 1.0 / lip;
  std::deque<double> history{f};
  Vector best = x;
  double best_f = f;
  double best_cert = std::numeric_limits<double>::infinity();

  for (Index k = 0; k < opts.max_iters; ++k) {
    const Vector d = project(x - alpha * g) - x;
    // ||x - P(x - alpha g)|| is nondecreasing in alpha and its ratio to alpha is
    // nonincreasing, which bounds the residual at the step 1/lip.
    const double cert = d.norm() * std::max(1.0, 1.0 / (alpha * lip));
    rec.record(f, cert, rec.tracks_error() ? &x : nullptr);
    if (f <= best_f) {
      best_f = f;
      best = x;
      best_cert = cert;
    }
    if (cert <= opts.tol * scale) {
      res.converged = true;
      best = x;
      best_f = f;
      best_cert = cert;
      break;
    }
    if (rec.should_stop(opts.time_limit)) break;

    const double f_ref = *std::max_element(history.begin(), history.end());
    const double slope = g.dot(d);
    double step = 1.0;
    Vector xn = x + d;
    double fn = objective(xn);
    for (int ls = 0; ls < 60 && fn > f_ref + 1e-4 * step * slope; ++ls) {
      step *= 0.5;
      xn = x + step * d;
      fn = objective(xn);
    }
    const Vector gn = gradient(xn);
    const Vector sdir = xn - x;
    const double sy = sdir.dot(gn - g);
    alpha = sy > 0.0 ? std::clamp(sdir.squaredNorm() / sy, 1e-10, 1e10) : 1e10;
    x = xn;
    f = fn;
    g = gn;
    res.iterations = k + 1;
    history.push_back(f);
    if (history.size() > 10) history.pop_front();
  }

  res.pair = unflatten(best, m, n);
  res.objective = best_f;
  res.certificate = best_cert;
  res.memory = {res.pair, res.pair, alpha, true};
  res.trace = rec.trace();
  res.trace.converged = res.converged;
  res.trace.status = res.converged ? "converged" : "max iterations or time limit reached";
  return res;
}

SubsolveResult solve_flip_qn(const FlipProblem& p, const SubsolverOptions& opts,
                             const SubsolverMemory* warm) {
  validate(p);
  if (p.gauge.combiner != Combiner::max) {
    throw ConfigError("quasi-Newton flip solver needs the max combiner (separable constraint)");
  }
  const Index m = p.rows;
  const Index n = p.cols;
  QnModel q;
  q.rows = m;
  q.cols = n;
  q.lip = std::max(p.penalty.curvature_bound() * p.op.norm_bound * p.op.norm_bound, 1e-300);
  q.eta = 2.0 / q.lip;
  q.scale = data_scale(p.data);
  q.gradient = [&p, m, n](const Matrix& l, const Matrix& s, Matrix& gl, Matrix& gs) {
    const Vector g = p.op.adjoint(p.penalty.gradient(p.op.apply(flatten({l, s})) - p.data));
    gl = unvec(g.head(m * n), m, n);
    gs = unvec(g.tail(m * n), m, n);
  };
  const double tau = p.tau;
  const double sparse_radius = p.tau / p.gauge.lambda;
  const bool nonneg = p.gauge.nonneg;
  q.step_low = [tau](SpectralEngine& e, const Matrix& v, double) { return e.project(v, tau); };
  q.step_sparse = [sparse_radius, nonneg](const Matrix& v, double) {
    return unvec(proj_l1_ball(vec(v), sparse_radius, nonneg), v.rows(), v.cols());
  };
  q.objective = [&p](const Matrix& l, const Matrix& s, double) { return flip_objective(p, {l, s}); };
  return run_qn(q, opts, warm);
}

SubsolveResult solve_lag_qn(const LagProblem& p, const SubsolverOptions& opts,
                            const SubsolverMemory* warm) {
  validate(p);
  QnModel q;
  q.rows = p.A.rows();
  q.cols = p.A.cols();
  q.lip = 2.0;
  q.eta = 1.0;
  q.scale = data_scale(vec(p.A));
  q.gradient = [&p](const Matrix& l, const Matrix& s, Matrix& gl, Matrix& gs) {
    gl = l + s - p.A;
    gs = gl;
  };
  const double ll = p.lambda_L;
  const double ls = p.lambda_S;
  q.step_low = [ll](SpectralEngine& e, const Matrix& v, double eta) { return e.shrink(v, eta * ll); };
  q.step_sparse = [ls](const Matrix& v, double eta) { return soft_threshold(v, eta * ls); };
  q.objective = [&p](const Matrix& l, const Matrix& s, double nuc) {
    return p.lambda_L * nuc + p.lambda_S * l1_norm(s) + 0.5 * (l + s - p.A).squaredNorm();
  };
  return run_qn(q, opts, warm);
}

}  // namespace spcp
