#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "spcp/errors.hpp"
#include "spcp/prox.hpp"

using namespace spcp;

namespace {

Vector v_of(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Matrix diag_of(std::initializer_list<double> xs) {
  const Vector d = v_of(xs);
  return d.asDiagonal();
}

double sum_gauge(const LowSparsePair& p, double lambda) {
  return oracle::nuclear(p.low) + lambda * p.sparse.cwiseAbs().sum();
}

// Random point of {||L||_* + lambda ||S||_1 <= r}.
LowSparsePair random_feasible_pair(std::mt19937_64& rng, Index m, Index n, double lambda, double r) {
  LowSparsePair p{oracle::random_mat(rng, m, n), oracle::random_mat(rng, m, n)};
  const double g = sum_gauge(p, lambda);
  const double scale = r * oracle::uniform(rng, 0.0, 1.0) / g;
  p.low *= scale;
  p.sparse *= scale;
  return p;
}

}  // namespace

TEST_CASE("soft_threshold examples") {
  CHECK((soft_threshold(v_of({3, -1, 0.2}), 1.0) - v_of({2, 0, 0})).norm() == 0.0);
  const Vector x = v_of({0.7, -2.0, 1e-3});
  CHECK((soft_threshold(x, 1e-15) - x).norm() <= 1e-14);
  CHECK_THROWS_AS(soft_threshold(x, 0.0), InputError);
  CHECK_THROWS_AS(soft_threshold(x, -1.0), InputError);
}

TEST_CASE("soft_threshold matches a per-coordinate grid search") {
  std::mt19937_64 rng(1);
  const Vector x = oracle::random_vec(rng, 8);
  const double t = 0.3;
  const Vector y = soft_threshold(x, t);
  for (Index i = 0; i < x.size(); ++i) {
    const double xi = x(i);
    const double g = oracle::grid_argmin(
        [&](double u) { return t * std::abs(u) + 0.5 * (u - xi) * (u - xi); }, -4.0, 4.0, 1e-6);
    CHECK(std::abs(y(i) - g) <= 2e-6);
  }
}

TEST_CASE("svt examples") {
  CHECK((svt(diag_of({3, 1}), 2.0) - diag_of({1, 0})).norm() <= 1e-12);
  std::mt19937_64 rng(2);
  const Matrix m = oracle::random_mat(rng, 4, 3);
  CHECK(svt(m, oracle::spectral(m) * 1.01).norm() == 0.0);
  CHECK_THROWS_AS(svt(m, 0.0), InputError);
}

TEST_CASE("svt output is locally optimal against random perturbations") {
  std::mt19937_64 rng(3);
  const Matrix m = oracle::random_mat(rng, 5, 4);
  const double t = 0.5;
  const Matrix x = svt(m, t);
  auto obj = [&](const Matrix& u) { return t * oracle::nuclear(u) + 0.5 * (u - m).squaredNorm(); };
  const double f = obj(x);
  const Vector sig = oracle::singular_values(m);
  CHECK(oracle::nuclear(x) == doctest::Approx((sig.array() - t).max(0.0).sum()).epsilon(1e-10));
  int worse = 0;
  for (int k = 0; k < 1000; ++k) {
    const double h = std::pow(10.0, oracle::uniform(rng, -6.0, -1.0));
    if (obj(x + h * oracle::random_mat(rng, 5, 4)) >= f - 1e-12) ++worse;
  }
  CHECK(worse == 1000);
}

TEST_CASE("proj_l1_ball examples and breakpoint-scan oracle") {
  CHECK((proj_l1_ball(v_of({2, 0}), 1.0) - v_of({1, 0})).norm() <= 1e-15);
  CHECK((proj_l1_ball(v_of({1, 1}), 1.0) - v_of({0.5, 0.5})).norm() <= 1e-15);
  CHECK((proj_l1_ball(v_of({0.2, -0.3}), 1.0) - v_of({0.2, -0.3})).norm() == 0.0);
  CHECK(proj_l1_ball(v_of({0.2, -0.3}), 0.0).norm() == 0.0);
  CHECK_THROWS_AS(proj_l1_ball(v_of({1}), -1.0), InputError);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 100; ++k) {
    const Vector x = oracle::random_vec(rng, 6);
    CHECK((proj_l1_ball(x, 1.0) - oracle::l1_projection_scan(x, 1.0)).norm() <= 1e-10);
  }
}

TEST_CASE("proj_weighted_l1_ball") {
  CHECK((proj_weighted_l1_ball(v_of({4}), v_of({2}), 2.0) - v_of({1})).norm() <= 1e-14);
  CHECK_THROWS_AS(proj_weighted_l1_ball(v_of({1, 2}), v_of({1, 0}), 1.0), InputError);
  CHECK_THROWS_AS(proj_weighted_l1_ball(v_of({1, 2}), v_of({1, -1}), 1.0), InputError);

  std::mt19937_64 rng(5);
  SUBCASE("unit weights reduce to the plain ball") {
    for (int k = 0; k < 100; ++k) {
      const Vector x = oracle::random_vec(rng, 7, 2.0);
      const double r = oracle::uniform(rng, 0.1, 3.0);
      CHECK((proj_weighted_l1_ball(x, Vector::Ones(7), r) - proj_l1_ball(x, r)).norm() <= 1e-12);
    }
  }
  SUBCASE("bisection oracle and feasible sampling") {
    for (int k = 0; k < 20; ++k) {
      const Vector x = oracle::random_vec(rng, 5, 2.0);
      Vector w(5);
      for (Index i = 0; i < 5; ++i) w(i) = oracle::uniform(rng, 0.5, 2.0);
      const Vector u = proj_weighted_l1_ball(x, w, 1.0);
      const Vector ref = oracle::weighted_l1_projection_bisect(x, w, 1.0);
      const double mass = (u.cwiseAbs().array() * w.array()).sum();
      CHECK(mass <= 1.0 + 1e-10);
      if ((x.cwiseAbs().array() * w.array()).sum() > 1.0) CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
      CHECK((u - ref).norm() <= 1e-8);
      const double d = (u - x).norm();
      for (int s = 0; s < 1000; ++s) {
        CHECK((oracle::random_feasible_weighted(rng, w, 1.0) - x).norm() >= d - 1e-8);
      }
    }
  }
}

TEST_CASE("nonnegative weighted projection clamps then projects") {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 50; ++k) {
    const Vector x = oracle::random_vec(rng, 9, 2.0);
    Vector w(9);
    for (Index i = 0; i < 9; ++i) w(i) = oracle::uniform(rng, 0.5, 2.0);
    const Vector u = proj_weighted_l1_ball(x, w, 1.0, true);
    CHECK(u.minCoeff() >= 0.0);
    const Vector ref = oracle::weighted_l1_projection_bisect(x.cwiseMax(0.0), w, 1.0);
    CHECK((u - ref).norm() <= 1e-8);
  }
}

TEST_CASE("proj_nuclear_ball") {
  CHECK((proj_nuclear_ball(diag_of({2, 1}), 3.0) - diag_of({2, 1})).norm() <= 1e-12);
  CHECK((proj_nuclear_ball(diag_of({2, 0}), 1.0) - diag_of({1, 0})).norm() <= 1e-12);
  CHECK_THROWS_AS(proj_nuclear_ball(diag_of({1, 1}), -1.0), InputError);
  std::mt19937_64 rng(7);
  const Matrix m = oracle::random_mat(rng, 5, 5);
  const Matrix p = proj_nuclear_ball(m, 1.0);
  CHECK(oracle::nuclear(p) == doctest::Approx(1.0).epsilon(1e-8));
  const double d = (p - m).norm();
  for (int s = 0; s < 1000; ++s) {
    Matrix q = oracle::random_mat(rng, 5, 5);
    q *= oracle::uniform(rng, 0.0, 1.0) / oracle::nuclear(q);
    CHECK((q - m).norm() >= d - 1e-10);
  }
}

TEST_CASE("proj_sum_gauge") {
  const double lambda = 0.7;
  SUBCASE("interior points are returned unchanged") {
    std::mt19937_64 rng(8);
    const LowSparsePair p = random_feasible_pair(rng, 3, 4, lambda, 1.0);
    const LowSparsePair q = proj_sum_gauge(p, lambda, 1.0);
    CHECK(pair_distance(p, q) <= 1e-12);
  }
  SUBCASE("S = 0 reduces to the nuclear ball") {
    const LowSparsePair q = proj_sum_gauge({diag_of({2, 0}), Matrix::Zero(2, 2)}, 1.0, 1.0);
    CHECK((q.low - diag_of({1, 0})).norm() <= 1e-12);
    CHECK(q.sparse.norm() == 0.0);
  }
  SUBCASE("degenerate radius and bad parameters") {
    const LowSparsePair q = proj_sum_gauge({diag_of({2, 1}), diag_of({1, 1})}, 1.0, 0.0);
    CHECK(pair_norm(q) == 0.0);
    CHECK_THROWS_AS(proj_sum_gauge({diag_of({1}), diag_of({1})}, 0.0, 1.0), InputError);
    CHECK_THROWS_AS(proj_sum_gauge({diag_of({1}), diag_of({1})}, 1.0, -1.0), InputError);
  }
  SUBCASE("random pairs against the joint oracle and feasible sampling") {
    std::mt19937_64 rng(9);
    for (int k = 0; k < 10; ++k) {
      const LowSparsePair p{oracle::random_mat(rng, 4, 4), oracle::random_mat(rng, 4, 4)};
      const LowSparsePair q = proj_sum_gauge(p, lambda, 1.0);
      CHECK(sum_gauge(q, lambda) == doctest::Approx(1.0).epsilon(1e-8));
      const auto [lr, sr] = oracle::sum_gauge_projection(p.low, p.sparse, lambda, 1.0);
      CHECK((q.low - lr).norm() <= 1e-8);
      CHECK((q.sparse - sr).norm() <= 1e-8);
      const double d = pair_distance(p, q);
      for (int s = 0; s < 1000; ++s) {
        CHECK(pair_distance(random_feasible_pair(rng, 4, 4, lambda, 1.0), p) >= d - 1e-10);
      }
      // Output low-rank block lives in the input's singular subspaces.
      const Eigen::JacobiSVD<Matrix> svd(p.low, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Matrix core = svd.matrixU().transpose() * q.low * svd.matrixV();
      CHECK((core - Matrix(core.diagonal().asDiagonal())).norm() <= 1e-10);
    }
  }
  SUBCASE("nonnegative sparse block") {
    std::mt19937_64 rng(10);
    const LowSparsePair p{oracle::random_mat(rng, 3, 3), oracle::random_mat(rng, 3, 3)};
    const LowSparsePair q = proj_sum_gauge(p, lambda, 1.0, true);
    CHECK(q.sparse.minCoeff() >= 0.0);
    CHECK(sum_gauge(q, lambda) <= 1.0 + 1e-8);
    const auto [lr, sr] = oracle::sum_gauge_projection(p.low, p.sparse.cwiseMax(0.0), lambda, 1.0);
    CHECK((q.low - lr).norm() <= 1e-8);
    CHECK((q.sparse - sr).norm() <= 1e-8);
  }
}

TEST_CASE("proj_max_gauge is the product of the two ball projections") {
  const LowSparsePair q = proj_max_gauge({Matrix::Zero(1, 2), (Matrix(1, 2) << 2, 0).finished()}, 1.0, 1.0);
  CHECK(q.low.norm() == 0.0);
  CHECK((q.sparse - (Matrix(1, 2) << 1, 0).finished()).norm() <= 1e-14);
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    const double lambda = oracle::uniform(rng, 0.2, 2.0);
    const double tau = oracle::uniform(rng, 0.5, 3.0);
    const LowSparsePair p{oracle::random_mat(rng, 4, 3), oracle::random_mat(rng, 4, 3)};
    const LowSparsePair r = proj_max_gauge(p, lambda, tau);
    CHECK((r.low - proj_nuclear_ball(p.low, tau)).norm() <= 1e-14);
    CHECK((vec(r.sparse) - proj_l1_ball(vec(p.sparse), tau / lambda)).norm() <= 1e-14);
    const LowSparsePair inner = proj_max_gauge(r, lambda, tau);
    CHECK(pair_distance(inner, r) <= 1e-10);
  }
}

TEST_CASE("projections are firmly nonexpansive") {
  std::mt19937_64 rng(12);
  const Vector w = (oracle::random_vec(rng, 6).cwiseAbs().array() + 0.3).matrix();
  auto check = [](const Vector& x, const Vector& y, const Vector& px, const Vector& py) {
    const double lhs = (px - py).squaredNorm() + ((x - px) - (y - py)).squaredNorm();
    CHECK(lhs <= (x - y).squaredNorm() + 1e-10);
  };
  for (int k = 0; k < 200; ++k) {
    const Vector x = oracle::random_vec(rng, 6, 2.0);
    const Vector y = oracle::random_vec(rng, 6, 2.0);
    check(x, y, proj_l1_ball(x, 1.0), proj_l1_ball(y, 1.0));
    check(x, y, proj_weighted_l1_ball(x, w, 1.0), proj_weighted_l1_ball(y, w, 1.0));
    check(x, y, proj_weighted_l1_ball(x, w, 1.0, true), proj_weighted_l1_ball(y, w, 1.0, true));
    const LowSparsePair px = unflatten(x, 1, 3);
    const LowSparsePair py = unflatten(y, 1, 3);
    check(x, y, flatten(proj_sum_gauge(px, 0.5, 1.0)), flatten(proj_sum_gauge(py, 0.5, 1.0)));
    check(x, y, flatten(proj_max_gauge(px, 0.5, 1.0)), flatten(proj_max_gauge(py, 0.5, 1.0)));
  }
}

TEST_CASE("handle proximity operators are nonexpansive and satisfy Moreau") {
  std::mt19937_64 rng(13);
  const std::vector<ProxHandle> handles{
      prox_zero(),
      prox_l1(0.7),
      prox_nuclear(3, 2, 1.3),
      prox_sq_norm(2.0),
      prox_huber(0.5),
      prox_indicator_point(),
      prox_indicator_point(oracle::random_vec(rng, 6)),
      prox_indicator_l2_ball(1.5),
      prox_indicator_linf_ball(0.5),
      prox_indicator_l1_ball(2.0),
      prox_indicator_nuclear_ball(3, 2, 1.0),
      prox_indicator_nonneg(),
      prox_sum_gauge_penalty(1, 3, 0.4),
      prox_shifted(prox_l1(), oracle::random_vec(rng, 6)),
      prox_precomposed_scale(prox_nuclear(2, 3), -2.5),
      prox_reflected(prox_indicator_point(oracle::random_vec(rng, 6))),
      prox_separable({{prox_l1(), 2}, {prox_indicator_l2_ball(1.0), 4}}),
  };
  for (const ProxHandle& h : handles) {
    CAPTURE(h.name);
    for (int k = 0; k < 50; ++k) {
      const Vector x = oracle::random_vec(rng, 6, 2.0);
      const Vector y = oracle::random_vec(rng, 6, 2.0);
      const double t = oracle::uniform(rng, 0.1, 3.0);
      CHECK((h.prox(x, t) - h.prox(y, t)).norm() <= (x - y).norm() * (1 + 1e-12));
      const Vector sum = h.prox(x, 1.0) + moreau_conjugate_prox(h, x, 1.0);
      CHECK((sum - x).norm() <= 1e-12 * std::max(1.0, x.norm()));
      // Scaled Moreau identity: prox_{t f*}(x) = x - t prox_{f/t}(x/t).
      const Vector scaled = moreau_conjugate_prox(h, x, t);
      CHECK((scaled - (x - t * h.prox(x / t, 1.0 / t))).norm() <= 1e-12 * std::max(1.0, x.norm()));
    }
  }
}

TEST_CASE("handle proximity operators match scalar grid search") {
  const std::vector<std::pair<ProxHandle, std::function<double(double)>>> cases{
      {prox_l1(0.7), [](double u) { return 0.7 * std::abs(u); }},
      {prox_sq_norm(2.0), [](double u) { return u * u; }},
      {prox_huber(0.5), [](double u) { return std::abs(u) <= 0.5 ? 0.5 * u * u : 0.5 * (std::abs(u) - 0.25); }},
  };
  std::mt19937_64 rng(14);
  for (const auto& [h, f] : cases) {
    CAPTURE(h.name);
    for (int k = 0; k < 5; ++k) {
      const double x = oracle::uniform(rng, -3.0, 3.0);
      const double t = oracle::uniform(rng, 0.2, 2.0);
      const double g = oracle::grid_argmin([&](double u) { return t * f(u) + 0.5 * (u - x) * (u - x); },
                                           -4.0, 4.0, 1e-6);
      CHECK(std::abs(h.prox(v_of({x}), t)(0) - g) <= 2e-6);
      CHECK(h.value(v_of({x})) == doctest::Approx(f(x)));
    }
  }
}

TEST_CASE("moreau_conjugate_prox examples") {
  CHECK(moreau_conjugate_prox(prox_l1(), v_of({3}), 1.0)(0) == doctest::Approx(1.0));
  const Vector x = v_of({0.3, -2.0, 5.0});
  CHECK((moreau_conjugate_prox(prox_indicator_point(), x, 1.0) - x).norm() <= 1e-15);
  CHECK((moreau_conjugate_prox(prox_indicator_point(), x, 0.2) - x).norm() <= 1e-15);
  CHECK_THROWS_AS(moreau_conjugate_prox(prox_l1(), x, 0.0), InputError);
}

TEST_CASE("reflected_prox") {
  std::mt19937_64 rng(15);
  const Vector x = oracle::random_vec(rng, 5);
  CHECK((reflected_prox(prox_l1(), x) - prox_l1().prox(x, 1.0)).norm() <= 1e-15);
  const Vector c = oracle::random_vec(rng, 5);
  CHECK((reflected_prox(prox_indicator_point(c), x) + c).norm() <= 1e-15);
  // Piecewise-linear f(u) = max(2u - 1, -u) evaluated at -u, against a grid argmin.
  ProxHandle pl;
  pl.name = "piecewise";
  pl.eval = [](const Vector& u) { return std::max(2 * u(0) - 1, -u(0)); };
  pl.prox = [](const Vector& v, double t) {
    // Breakpoint at u = 1/3: slopes -1 below, 2 above.
    const double a = v(0) + t;
    const double b = v(0) - 2 * t;
    double u = 1.0 / 3.0;
    if (a < 1.0 / 3.0) u = a;
    else if (b > 1.0 / 3.0) u = b;
    return v_of({u});
  };
  for (double xv : {-2.0, -0.4, 0.1, 1.7}) {
    const double g = oracle::grid_argmin(
        [&](double u) { return std::max(-2 * u - 1, u) + 0.5 * (u - xv) * (u - xv); }, -5.0, 5.0, 1e-6);
    CHECK(std::abs(reflected_prox(pl, v_of({xv}))(0) - g) <= 2e-6);
  }
}

TEST_CASE("factories reject invalid parameters") {
  CHECK_THROWS_AS(prox_l1(0.0), InputError);
  CHECK_THROWS_AS(prox_nuclear(2, 2, -1.0), InputError);
  CHECK_THROWS_AS(prox_huber(0.0), InputError);
  CHECK_THROWS_AS(prox_precomposed_scale(prox_l1(), 0.0), InputError);
  CHECK_THROWS_AS(prox_separable({}), InputError);
  CHECK_THROWS_AS(prox_sum_gauge_penalty(2, 2, 0.0), InputError);
}
