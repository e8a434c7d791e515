#include "spcp/pdhg.hpp"

#include <algorithm>
#include <cmath>

#include "spcp/errors.hpp"

namespace spcp {

PdhgResult solve_pdhg(const ProxHandle& psi0, const ProxHandle& psi1, const LinearOp& op, const Vector& b,
                      const PdhgOptions& opts) {
  if (b.size() > 0 && b.size() != op.out_dim) throw InputError("solve_pdhg: offset size mismatch");
  const double nrm = op.norm_bound;
  if (!(nrm > 0.0)) throw InputError("solve_pdhg: operator norm bound must be positive");

  PdhgResult res;
  if (opts.tau_step || opts.sigma_step) {
    if (!opts.tau_step || !opts.sigma_step) throw InputError("solve_pdhg: give both tau and sigma");
    res.tau_step = *opts.tau_step;
    res.sigma_step = *opts.sigma_step;
    if (!(res.tau_step > 0.0) || !(res.sigma_step > 0.0) || res.tau_step * res.sigma_step * nrm * nrm >= 1.0) {
      throw InputError("solve_pdhg: steps must satisfy tau * sigma < 1 / ||L||^2");
    }
  } else {
    if (!(opts.ratio > 0.0) || !std::isfinite(opts.ratio)) throw InputError("solve_pdhg: ratio must be positive");
    res.tau_step = std::sqrt(0.99 * opts.ratio) / nrm;
    res.sigma_step = std::sqrt(0.99 / opts.ratio) / nrm;
  }
  const double tau = res.tau_step;
  const double sigma = res.sigma_step;
  const ProxHandle psi1_b = b.size() > 0 && b.any() ? prox_shifted(psi1, b) : psi1;

  TraceRecorder local;
  TraceRecorder& rec = opts.recorder ? *opts.recorder : local;

  Vector x = opts.x0 ? *opts.x0 : Vector(Vector::Zero(op.in_dim));
  Vector z = opts.z0 ? *opts.z0 : Vector(Vector::Zero(op.out_dim));
  if (x.size() != op.in_dim || z.size() != op.out_dim) throw InputError("solve_pdhg: start point size mismatch");
  Vector xbar = x;
  Index calm = 0;

  for (Index k = 0; k < opts.max_iters; ++k) {
    const Vector zn = moreau_conjugate_prox(psi1_b, z + sigma * op.apply(xbar), sigma);
    const Vector xn = psi0.prox(x - tau * op.adjoint(zn), tau);
    const double change = std::sqrt((xn - x).squaredNorm() + (zn - z).squaredNorm());
    const double size = std::sqrt(xn.squaredNorm() + zn.squaredNorm());
    const double rel = change / std::max(1.0, size);
    xbar = 2.0 * xn - x;
    x = xn;
    z = zn;
    res.iterations = k + 1;

    const double objective = opts.trace_objective ? psi0.eval(x) + psi1_b.eval(op.apply(x))
                                                  : std::numeric_limits<double>::quiet_NaN();
    rec.record(objective, rel, rec.tracks_error() ? &x : nullptr);

    calm = rel < opts.tol ? calm + 1 : 0;
    if (calm >= std::max<Index>(opts.window, 1)) {
      res.converged = true;
      break;
    }
    if (rec.should_stop(opts.time_limit)) break;
  }

  res.x = x;
  res.z = z;
  res.trace = rec.trace();
  res.trace.converged = res.converged;
  res.trace.status = res.converged ? "converged" : "iteration or time budget exhausted";
  return res;
}

}  // namespace spcp
