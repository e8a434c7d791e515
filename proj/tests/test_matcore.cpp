#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "spcp/errors.hpp"
#include "spcp/matcore.hpp"
#include "spcp/matrix_io.hpp"

using namespace spcp;

namespace {

double orthonormality_defect(const Matrix& q) {
  return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).norm();
}

double adjoint_defect(const LinearOp& op, std::mt19937_64& rng) {
  const Vector x = oracle::random_vec(rng, op.in_dim);
  const Vector y = oracle::random_vec(rng, op.out_dim);
  const double lhs = op.apply(x).dot(y);
  const double rhs = x.dot(op.adjoint(y));
  return std::abs(lhs - rhs) / std::max(1.0, x.norm() * y.norm());
}

}  // namespace

TEST_CASE("svd_full of a diagonal matrix returns its sorted diagonal") {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 3.0, 1.0, 0.0;
  const SvdFactors f = svd_full(d);
  CHECK(f.sigma(0) == doctest::Approx(3.0));
  CHECK(f.sigma(1) == doctest::Approx(1.0));
  CHECK(f.sigma(2) == doctest::Approx(0.0));
}

TEST_CASE("svd_full of a zero matrix has zero singular values") {
  const SvdFactors f = svd_full(Matrix::Zero(4, 3));
  REQUIRE(f.sigma.size() == 3);
  CHECK(f.sigma.norm() == 0.0);
}

TEST_CASE("svd_full reconstructs random matrices with orthonormal factors") {
  std::mt19937_64 rng(11);
  for (auto [m, n] : {std::pair<Index, Index>{8, 5}, {5, 8}, {7, 7}}) {
    const Matrix a = oracle::random_mat(rng, m, n);
    const SvdFactors f = svd_full(a);
    CHECK((f.reconstruct() - a).norm() <= 1e-10 * a.norm());
    CHECK(orthonormality_defect(f.U) <= 1e-10);
    CHECK(orthonormality_defect(f.V) <= 1e-10);
    for (Index i = 1; i < f.sigma.size(); ++i) CHECK(f.sigma(i) <= f.sigma(i - 1));
    // Sign convention: first non-negligible entry of each left vector is nonnegative.
    for (Index j = 0; j < f.U.cols(); ++j) {
      for (Index i = 0; i < f.U.rows(); ++i) {
        if (std::abs(f.U(i, j)) > 1e-12) {
          CHECK(f.U(i, j) > 0.0);
          break;
        }
      }
    }
  }
}

TEST_CASE("svd_full rejects non-finite input") {
  Matrix a = Matrix::Ones(2, 2);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd_full(a), InputError);
}

TEST_CASE("svd_randomized recovers exact low-rank matrices") {
  std::mt19937_64 rng(5);
  const Matrix a = oracle::random_mat(rng, 100, 3) * oracle::random_mat(rng, 3, 80);
  const SvdFactors f = svd_randomized(a, 5);
  CHECK(f.rank_count() == 5);
  CHECK((f.reconstruct() - a).norm() <= 1e-8 * a.norm());
  const Vector ref = oracle::singular_values(a);
  for (Index i = 0; i < 3; ++i) CHECK(f.sigma(i) == doctest::Approx(ref(i)).epsilon(1e-8));

  // Leading factors agree with the dense SVD up to the shared sign convention.
  const SvdFactors full = svd_full(a);
  CHECK((f.U.leftCols(3) - full.U.leftCols(3)).norm() <= 1e-6);
}

TEST_CASE("svd_randomized on diag(5,4,3,2,1) keeps the two leading values") {
  Matrix d = Matrix::Zero(5, 5);
  d.diagonal() << 5, 4, 3, 2, 1;
  const SvdFactors f = svd_randomized(d, 2);
  CHECK(f.sigma(0) == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(f.sigma(1) == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("svd_randomized edge cases") {
  const SvdFactors z = svd_randomized(Matrix::Zero(6, 4), 1);
  REQUIRE(z.sigma.size() == 1);
  CHECK(z.sigma(0) == 0.0);
  CHECK_THROWS_AS(svd_randomized(Matrix::Ones(3, 4), 4), InputError);
}

TEST_CASE("spectral_norm matches simple cases and the dense SVD") {
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 2, 1;
  CHECK(spectral_norm(d) == doctest::Approx(2.0));
  Matrix shift = Matrix::Zero(2, 2);
  shift(0, 1) = 1.0;
  CHECK(spectral_norm(shift) == doctest::Approx(1.0));
  std::mt19937_64 rng(3);
  const Matrix a = oracle::random_mat(rng, 6, 4);
  CHECK(spectral_norm(a) == doctest::Approx(oracle::spectral(a)).epsilon(1e-8));
}

TEST_CASE("norm ordering: spectral <= Frobenius <= nuclear") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = oracle::random_mat(rng, 5, 7);
    CHECK(spectral_norm(a) <= frobenius_norm(a) * (1 + 1e-12));
    CHECK(frobenius_norm(a) <= nuclear_norm(a) * (1 + 1e-12));
    CHECK(nuclear_norm(a) == doctest::Approx(oracle::nuclear(a)).epsilon(1e-10));
  }
}

TEST_CASE("op_sum_identity maps (L, S) to L + S and back to (R, R)") {
  const LinearOp op = op_sum_identity(2, 2);
  const Matrix id = Matrix::Identity(2, 2);
  const Vector out = op.apply(flatten({id, id}));
  CHECK((unvec(out, 2, 2) - 2.0 * id).norm() == 0.0);
  const LowSparsePair back = unflatten(op.adjoint(vec(id)), 2, 2);
  CHECK((back.low - id).norm() == 0.0);
  CHECK((back.sparse - id).norm() == 0.0);
  CHECK(op.norm_bound == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("op_restrict keeps observed entries only") {
  const std::vector<EntryIndex> omega{{1, 1}};
  const LinearOp op = op_restrict(2, 2, omega);
  const Matrix out = unvec(op.apply(vec(Matrix::Ones(2, 2))), 2, 2);
  Matrix expected = Matrix::Zero(2, 2);
  expected(1, 1) = 1.0;
  CHECK((out - expected).norm() == 0.0);
  const std::vector<EntryIndex> bad{{2, 0}};
  CHECK_THROWS_AS(op_restrict(2, 2, bad), InputError);
}

TEST_CASE("every operator passes the adjoint identity") {
  std::mt19937_64 rng(23);
  const std::vector<EntryIndex> omega{{0, 0}, {2, 1}, {1, 3}};
  const LinearOp sum = op_sum_identity(3, 4);
  const LinearOp mask = op_compose(op_restrict(3, 4, omega), sum);
  const LinearOp stacked = op_stack({sum, mask});
  const LinearOp dense = op_dense(oracle::random_mat(rng, 5, 24));
  for (const LinearOp* op : {&sum, &mask, &stacked, &dense}) {
    for (int t = 0; t < 10; ++t) CHECK(adjoint_defect(*op, rng) <= 1e-10);
  }
  CHECK(stacked.norm_bound * stacked.norm_bound ==
        doctest::Approx(sum.norm_bound * sum.norm_bound + mask.norm_bound * mask.norm_bound));
}

TEST_CASE("norm bounds dominate the true operator norm") {
  std::mt19937_64 rng(29);
  const Matrix m = oracle::random_mat(rng, 4, 6);
  const LinearOp dense = op_dense(m);
  CHECK(dense.norm_bound == doctest::Approx(oracle::spectral(m)).epsilon(1e-8));
  const LinearOp stacked = op_stack({dense, op_scaled(dense, 2.0)});
  Matrix big(8, 6);
  big << m, 2.0 * m;
  CHECK(stacked.norm_bound >= oracle::spectral(big) * (1 - 1e-12));
}

TEST_CASE("matrix files round-trip in binary and CSV") {
  std::mt19937_64 rng(31);
  const Matrix a = oracle::random_mat(rng, 3, 5);
  const auto dir = std::filesystem::temp_directory_path() / "spcp_matcore_io";
  std::filesystem::create_directories(dir);
  write_matrix_binary(dir / "a.mat", a);
  write_matrix_csv(dir / "a.csv", a);
  CHECK((read_matrix(dir / "a.mat") - a).norm() == 0.0);
  CHECK((read_matrix(dir / "a.csv") - a).norm() == 0.0);
  {
    std::ofstream bad(dir / "bad.csv");
    bad << "1,2\n3\n";
  }
  CHECK_THROWS_AS(read_matrix_csv(dir / "bad.csv"), InputError);
  std::filesystem::remove_all(dir);
}
