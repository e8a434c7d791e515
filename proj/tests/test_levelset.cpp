#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spcp/errors.hpp"
#include "spcp/levelset.hpp"

using namespace spcp;

namespace {

double phi(const GaugeSpec& g, const LowSparsePair& p) {
  const double a = oracle::nuclear(p.low);
  const double b = g.lambda * p.sparse.cwiseAbs().sum();
  return g.combiner == Combiner::sum ? a + b : std::max(a, b);
}

}  // namespace

TEST_CASE("a generous budget returns the zero pair immediately") {
  std::mt19937_64 rng(1);
  const Matrix a = oracle::random_mat(rng, 4, 5);
  const LevelSetResult r = solve_spcp_levelset({Combiner::sum, 0.5, false}, a, a.norm() * 1.01);
  CHECK(r.converged);
  CHECK(pair_norm(r.pair) == 0.0);
  CHECK(r.newton_iterations == 0);
  CHECK(r.tau == 0.0);
}

TEST_CASE("scalar instance has the hand-computed root") {
  // v(tau) = 0.5 (2 - tau)^2 on [0, 2]; v(tau) = 0.5 at tau = 1.
  Matrix a(1, 1);
  a << 2.0;
  LevelSetOptions opts;
  opts.tol = 1e-10;
  opts.inner_tol = 1e-12;
  const LevelSetResult r = solve_levelset({Combiner::sum, 1.0, false}, PenaltySpec::least_squares(),
                                          op_sum_identity(1, 1), vec(a), 1, 1, 0.5, opts);
  CHECK(r.converged);
  CHECK(r.tau == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.value == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(r.pair.low(0, 0) + r.pair.sparse(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("random instances: residual on target, few Newton steps, monotone from the left") {
  std::mt19937_64 rng(2);
  for (Combiner c : {Combiner::sum, Combiner::max}) {
    for (int k = 0; k < 3; ++k) {
      CAPTURE(static_cast<int>(c));
      CAPTURE(k);
      const Matrix a = oracle::random_mat(rng, 8, 6);
      const GaugeSpec g{c, 1.0 / std::sqrt(8.0), false};
      const double eps = oracle::uniform(rng, 0.2, 0.6) * a.norm();
      LevelSetOptions opts;
      opts.tol = 1e-8;
      opts.inner_tol = 1e-10;
      const LevelSetResult r = solve_spcp_levelset(g, a, eps, opts);
      CHECK(r.converged);
      CHECK(r.newton_iterations <= 15);
      const double resid = (r.pair.low + r.pair.sparse - a).norm();
      CHECK(resid == doctest::Approx(eps).epsilon(1e-4));
      // The returned pair sits on the gauge boundary at the final radius.
      CHECK(phi(g, r.pair) == doctest::Approx(r.tau).epsilon(1e-6));
      for (std::size_t i = 1; i < r.history.size(); ++i) {
        if (r.history[i].bisection) continue;
        CHECK(r.history[i].tau >= r.history[i - 1].tau);
        CHECK(r.history[i].value <= r.history[i - 1].value * (1 + 1e-8));
        CHECK(r.history[i].slope <= 0.0);
      }
      CHECK_FALSE(r.trace.rows.empty());
    }
  }
}

TEST_CASE("inner solver choice does not change the max-combiner answer") {
  std::mt19937_64 rng(3);
  const Matrix a = oracle::random_mat(rng, 6, 7);
  const GaugeSpec g{Combiner::max, 0.4, false};
  const double eps = 0.4 * a.norm();
  LevelSetOptions opts;
  opts.tol = 1e-10;
  opts.inner_tol = 1e-11;
  opts.inner = InnerSolver::qn;
  const LevelSetResult q = solve_spcp_levelset(g, a, eps, opts);
  opts.inner = InnerSolver::spg;
  const LevelSetResult s = solve_spcp_levelset(g, a, eps, opts);
  CHECK(q.converged);
  CHECK(s.converged);
  CHECK(q.tau == doctest::Approx(s.tau).epsilon(1e-7));
  CHECK(pair_distance(q.pair, s.pair) <= 1e-5 * a.norm());
}

TEST_CASE("general operator and Huber misfit") {
  std::mt19937_64 rng(4);
  const Index m = 6;
  const Index n = 6;
  const Matrix a = oracle::random_mat(rng, m, n);
  std::vector<EntryIndex> observed;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i)
      if ((i + 2 * j) % 3 != 0) observed.push_back({i, j});
  const LinearOp op = op_compose(op_restrict(m, n, observed), op_sum_identity(m, n));
  const Vector data = op_restrict(m, n, observed).apply(vec(a));
  const PenaltySpec huber = PenaltySpec::huber(0.5);
  const double v0 = huber.value(-data);
  const double eps = 0.3 * v0;
  LevelSetOptions opts;
  opts.tol = 1e-9;
  const LevelSetResult r = solve_levelset({Combiner::sum, 0.5, false}, huber, op, data, m, n, eps, opts);
  CHECK(r.converged);
  CHECK(huber.value(op.apply(flatten(r.pair)) - data) == doctest::Approx(eps).epsilon(1e-6));
}

TEST_CASE("an unreachable budget reports a flat value function") {
  // Only the L block reaches the first coordinate; the second data coordinate is unreachable,
  // so v never falls below 0.5.
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  Vector data(2);
  data << 2.0, 1.0;
  CHECK_THROWS_AS(solve_levelset({Combiner::sum, 1.0, false}, PenaltySpec::least_squares(), op_dense(m), data,
                                 1, 1, 0.1),
                  DriverError);
}

TEST_CASE("nonnegative sparse block") {
  std::mt19937_64 rng(5);
  const Matrix a = oracle::random_mat(rng, 5, 5);
  const GaugeSpec g{Combiner::max, 0.5, true};
  LevelSetOptions opts;
  opts.tol = 1e-8;
  const LevelSetResult r = solve_spcp_levelset(g, a, 0.5 * a.norm(), opts);
  CHECK(r.converged);
  CHECK(r.pair.sparse.minCoeff() >= 0.0);
  CHECK((r.pair.low + r.pair.sparse - a).norm() == doctest::Approx(0.5 * a.norm()).epsilon(1e-6));
}
