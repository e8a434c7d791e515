#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace spcp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Throws InputError naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);

double frobenius_norm(const Matrix& m);
/// Entrywise l1 norm (sum of absolute values).
double l1_norm(const Matrix& m);
/// Largest entry in absolute value.
double max_abs(const Matrix& m);
/// Sum of singular values.
double nuclear_norm(const Matrix& m);
/// Largest singular value, computed as the square root of the top eigenvalue
/// of the smaller Gram matrix (independent of the SVD routines below).
double spectral_norm(const Matrix& m);

/// Thin SVD: U is m x k, V is n x k, sigma nonincreasing, k = min(m, n) for
/// the full routine. Each left singular vector has its first nonzero entry
/// nonnegative.
struct SvdFactors {
  Matrix U;
  Vector sigma;
  Matrix V;

  [[nodiscard]] Index rank_count() const { return sigma.size(); }
  [[nodiscard]] Matrix reconstruct() const;
};

SvdFactors svd_full(const Matrix& m);

/// Gaussian range finder with power iterations followed by a small dense SVD.
/// Returns exactly `target_rank` leading factors.
SvdFactors svd_randomized(const Matrix& m, Index target_rank, Index oversample = 10,
                          Index power_iters = 2, std::uint64_t seed = 0x9e3779b97f4a7c15ULL);

/// Point (L, S) of the product space. Both blocks share one shape.
struct LowSparsePair {
  Matrix low;
  Matrix sparse;

  static LowSparsePair zeros(Index rows, Index cols) {
    return {Matrix::Zero(rows, cols), Matrix::Zero(rows, cols)};
  }
  [[nodiscard]] Index rows() const { return low.rows(); }
  [[nodiscard]] Index cols() const { return low.cols(); }
};

/// Flattened layout used by LinearOp and the generic solvers: [vec(L); vec(S)]
/// with column-major vec.
Vector flatten(const LowSparsePair& pair);
LowSparsePair unflatten(const Vector& v, Index rows, Index cols);
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Index rows, Index cols);

double pair_norm(const LowSparsePair& p);
double pair_distance(const LowSparsePair& a, const LowSparsePair& b);

/// Linear map between flat real vector spaces with its adjoint and an upper
/// bound on its operator norm.
struct LinearOp {
  std::string name;
  Index in_dim = 0;
  Index out_dim = 0;
  std::function<Vector(const Vector&)> apply;
  std::function<Vector(const Vector&)> adjoint;
  double norm_bound = 0.0;

  Vector operator()(const Vector& x) const { return apply(x); }
  [[nodiscard]] Vector transpose(const Vector& y) const { return adjoint(y); }
};

struct EntryIndex {
  Index row = 0;
  Index col = 0;
};

LinearOp op_identity(Index dim);
LinearOp op_dense(const Matrix& m);
LinearOp op_scaled(const LinearOp& op, double factor);
/// (L, S) -> L + S on flattened pairs; adjoint R -> (R, R); norm sqrt(2).
LinearOp op_sum_identity(Index rows, Index cols);
/// Keeps entries in `observed` and zeroes every other entry of an rows x cols matrix.
LinearOp op_restrict(Index rows, Index cols, std::span<const EntryIndex> observed);
/// Concatenates outputs of operators sharing one input space; adjoint sums.
LinearOp op_stack(const std::vector<LinearOp>& ops);
/// outer o inner.
LinearOp op_compose(const LinearOp& outer, const LinearOp& inner);

}  // namespace spcp
