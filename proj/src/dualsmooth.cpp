#include "spcp/dualsmooth.hpp"

#include <algorithm>
#include <cmath>

#include "spcp/errors.hpp"

namespace spcp {

namespace {

void require_mu(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InputError("smoothing weight mu must be positive and finite");
}

bool has_offset(const CompositeTerm& t) { return t.offset.size() > 0 && t.offset.any(); }

}  // namespace

Index CompositeModel::primal_dim() const {
  if (dim > 0) return dim;
  if (terms.empty()) throw InputError("composite model: primal dimension unknown (no terms, dim unset)");
  return terms.front().op.in_dim;
}

Index CompositeModel::dual_dim() const {
  Index d = 0;
  for (const auto& t : terms) d += t.op.out_dim;
  return d;
}

double CompositeModel::stacked_norm_sq() const {
  double s = 0.0;
  for (const auto& t : terms) s += t.op.norm_bound * t.op.norm_bound;
  return s;
}

CompositeModel canonical_model(const CompositeModel& model) {
  CompositeModel out;
  out.psi0 = model.psi0;
  out.dim = model.primal_dim();
  for (const auto& t : model.terms) {
    if (t.op.in_dim != out.dim) throw InputError("composite model: operators disagree on the primal dimension");
    if (t.offset.size() > 0 && t.offset.size() != t.op.out_dim) {
      throw InputError("composite model: offset does not match the operator output");
    }
    CompositeTerm c;
    c.op = t.op;
    c.psi = has_offset(t) ? prox_shifted(t.psi, t.offset) : t.psi;
    out.terms.push_back(std::move(c));
  }
  if (model.omega) out.terms.push_back({*model.omega, op_identity(out.dim), {}});
  return out;
}

CompositeModel normalize_blocks(const CompositeModel& model) {
  CompositeModel out = canonical_model(model);
  for (auto& t : out.terms) {
    const double c = t.op.norm_bound;
    if (c > 0.0 && c != 1.0) {
      t.op = op_scaled(t.op, 1.0 / c);
      t.psi = prox_precomposed_scale(t.psi, c);
    }
  }
  return out;
}

double composite_objective(const CompositeModel& model, const Vector& x) {
  double f = model.psi0.eval(x);
  for (const auto& t : model.terms) {
    const Vector v = has_offset(t) ? Vector(t.op.apply(x) - t.offset) : t.op.apply(x);
    f += t.psi.eval(v);
  }
  if (model.omega) f += model.omega->eval(x);
  return f;
}

Vector stacked_apply(const CompositeModel& model, const Vector& x) {
  Vector out(model.dual_dim());
  Index off = 0;
  for (const auto& t : model.terms) {
    out.segment(off, t.op.out_dim) = t.op.apply(x);
    off += t.op.out_dim;
  }
  return out;
}

Vector stacked_adjoint(const CompositeModel& model, const Vector& w) {
  if (w.size() != model.dual_dim()) throw InputError("stacked_adjoint: dual vector size mismatch");
  Vector out = Vector::Zero(model.primal_dim());
  Index off = 0;
  for (const auto& t : model.terms) {
    out += t.op.adjoint(w.segment(off, t.op.out_dim));
    off += t.op.out_dim;
  }
  return out;
}

Vector dual_gradient(const CompositeModel& model, const Vector& y, double mu, const Vector& w) {
  require_mu(mu);
  if (y.size() != model.primal_dim()) throw InputError("dual_gradient: center has the wrong dimension");
  return model.psi0.prox(y + stacked_adjoint(model, w) / mu, 1.0 / mu);
}

double dual_objective(const CompositeModel& model, const Vector& y, double mu, const Vector& z) {
  const CompositeModel m = canonical_model(model);
  const Vector v = stacked_adjoint(m, z);
  const Vector xt = m.psi0.prox(y + v / mu, 1.0 / mu);
  double q = xt.dot(v) - m.psi0.eval(xt) - 0.5 * mu * (xt - y).squaredNorm();
  Index off = 0;
  for (const auto& t : m.terms) {
    if (!t.psi.conj_eval) throw ConfigError("dual_objective: term '" + t.psi.name + "' has no conjugate");
    q += t.psi.conj_eval(-z.segment(off, t.op.out_dim));
    off += t.op.out_dim;
  }
  return q;
}

FistaResult fista_dual(const CompositeModel& model, const Vector& y, double mu, const FistaOptions& opts) {
  require_mu(mu);
  const CompositeModel m = canonical_model(model);
  const Index nd = m.dual_dim();
  if (y.size() != m.primal_dim()) throw InputError("fista_dual: center has the wrong dimension");
  if (opts.z0 && opts.z0->size() != nd) throw InputError("fista_dual: warm dual start has the wrong size");

  TraceRecorder local;
  TraceRecorder& rec = opts.recorder ? *opts.recorder : local;

  FistaResult res;
  double lip = opts.lipschitz > 0.0 ? opts.lipschitz : m.stacked_norm_sq() / mu;
  if (!(lip > 0.0)) lip = 1.0 / mu;
  res.lipschitz = lip;

  Vector z_prev = opts.z0 ? *opts.z0 : Vector(Vector::Zero(nd));
  Vector w = z_prev;
  Vector z(nd);
  Vector xt_prev;
  double t = 1.0;

  for (Index k = 0; k < opts.max_iters; ++k) {
    const Vector xt = dual_gradient(m, y, mu, w);
    const Vector g = stacked_apply(m, xt);
    Index off = 0;
    for (const auto& term : m.terms) {
      const Index d = term.op.out_dim;
      const Vector v = -w.segment(off, d) + g.segment(off, d) / lip;
      z.segment(off, d) = -moreau_conjugate_prox(term.psi, v, 1.0 / lip);
      off += d;
    }
    res.feasibility_gap = lip * (w - z).norm();

    if (opts.force_t1) {
      w = z;
    } else {
      if (opts.restart && (w - z).dot(z - z_prev) > 0.0) {
        t = 1.0;
        ++res.restarts;
      }
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      w = z + ((t - 1.0) / t_next) * (z - z_prev);
      t = t_next;
    }
    res.iterations = k + 1;
    if (opts.on_iterate) opts.on_iterate(k, z, w);

    const double objective =
        opts.trace_objective ? composite_objective(m, xt) + 0.5 * mu * (xt - y).squaredNorm()
                             : std::numeric_limits<double>::quiet_NaN();
    rec.record(objective, res.feasibility_gap, rec.tracks_error() ? &xt : nullptr);

    const bool still = xt_prev.size() == xt.size() &&
                       (xt - xt_prev).norm() <= opts.tol * std::max(1.0, xt.norm());
    const bool feasible = res.feasibility_gap <= opts.tol * std::max(1.0, g.norm());
    z_prev = z;
    xt_prev = xt;
    if (still && feasible) {
      res.converged = true;
      break;
    }
    if (rec.should_stop(opts.time_limit)) break;
  }

  res.z = z_prev;
  res.w = w;
  res.x_tilde = xt_prev;
  res.x = dual_gradient(m, y, mu, res.z);
  res.trace = rec.trace();
  res.trace.converged = res.converged;
  res.trace.status = res.converged ? "converged" : "iteration or time budget exhausted";
  return res;
}

Vector smoothed_subgradient(const CompositeModel& model, const Vector& x, const Vector& z) {
  const CompositeModel m = canonical_model(model);
  Vector d = stacked_adjoint(m, z);
  Index off = 0;
  for (const auto& t : m.terms) {
    const Index n = t.op.out_dim;
    if (t.psi.restricted_domain) {
      d -= t.op.adjoint(z.segment(off, n));
    } else {
      if (!t.psi.subgradient) {
        throw ConfigError("term '" + t.psi.name + "' provides no subgradient for the certificate");
      }
      const auto g = t.psi.subgradient(t.op.apply(x));
      if (!g) throw ConfigError("term '" + t.psi.name + "' has no subgradient at the iterate");
      d += t.op.adjoint(*g);
    }
    off += n;
  }
  return d;
}

ProximalPointResult proximal_point(const CompositeModel& model, const ProximalPointOptions& opts) {
  if (opts.mu_schedule.empty()) throw ConfigError("proximal_point: empty mu schedule");
  for (double mu : opts.mu_schedule) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("proximal_point: mu schedule must be positive and bounded");
  }
  const CompositeModel base = canonical_model(model);
  const CompositeModel work = opts.normalize ? normalize_blocks(base) : base;
  const Index n = base.primal_dim();
  for (const auto& t : base.terms) {
    if (!t.psi.restricted_domain && !t.psi.subgradient) {
      throw ConfigError("term '" + t.psi.name + "' provides no subgradient for the certificate");
    }
  }

  TraceRecorder local;
  TraceRecorder& rec = opts.recorder ? *opts.recorder : local;

  ProximalPointResult res;
  Vector y = opts.x0 ? *opts.x0 : Vector(Vector::Zero(n));
  if (y.size() != n) throw InputError("proximal_point: initial point has the wrong dimension");
  std::optional<Vector> z;
  // Consecutive inner solves that failed at the tolerance floor while the iterate and
  // feasibility already meet the outer tolerance: the certificate has reached its
  // rounding floor (it scales like 1/mu) and further outer steps cannot help.
  Index floor_failures = 0;
  bool stalled = false;

  for (Index k = 0; k < opts.max_outer; ++k) {
    const double mu = opts.mu_schedule[std::min<std::size_t>(k, opts.mu_schedule.size() - 1)];
    FistaOptions fo;
    fo.tol = std::max(opts.inner_tol_floor, opts.inner_tol0 * std::pow(2.0, -static_cast<double>(k)));
    fo.max_iters = opts.inner_max_iters;
    fo.restart = opts.restart;
    fo.z0 = z;
    fo.recorder = &rec;
    fo.time_limit = opts.time_limit;
    const FistaResult inner = fista_dual(work, y, mu, fo);

    OuterStep step;
    step.mu = mu;
    step.inner_tol = fo.tol;
    step.inner_iterations = inner.iterations;
    step.inner_converged = inner.converged;
    step.certificate = smoothed_subgradient(work, inner.x, inner.z).norm() / mu;
    double gap_sq = 0.0;
    for (const auto& t : base.terms) {
      if (!t.psi.restricted_domain) continue;
      const Vector v = t.op.apply(inner.x);
      gap_sq += (v - t.psi.prox(v, 1e-12)).squaredNorm();
    }
    step.feasibility_gap = std::sqrt(gap_sq);
    step.step = (inner.x - y).norm();
    res.history.push_back(step);
    res.inner_iterations += inner.iterations;
    res.outer_iterations = k + 1;
    res.certificate = step.certificate;
    res.feasibility_gap = step.feasibility_gap;

    y = inner.x;
    z = inner.z;
    const double scale = std::max(1.0, y.norm());
    if (step.certificate <= opts.outer_tol * scale && step.feasibility_gap <= opts.outer_tol * scale &&
        step.step <= opts.outer_tol * scale) {
      res.converged = true;
      break;
    }
    const bool only_certificate_left = step.step <= opts.outer_tol * scale &&
                                       step.feasibility_gap <= opts.outer_tol * scale;
    floor_failures =
        (!inner.converged && fo.tol <= opts.inner_tol_floor && only_certificate_left) ? floor_failures + 1 : 0;
    if (floor_failures >= 3) {
      stalled = true;
      break;
    }
    if (rec.should_stop(opts.time_limit)) break;
  }

  res.x = y;
  res.trace = rec.trace();
  res.trace.converged = res.converged;
  res.trace.status = res.converged ? "converged"
                     : stalled     ? "stalled: certificate at its rounding floor"
                                   : "outer iteration or time budget exhausted";
  return res;
}

}  // namespace spcp
