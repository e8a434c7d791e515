#include "spcp/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "spcp/errors.hpp"

namespace spcp {

namespace {

void fix_signs(SvdFactors& f) {
  for (Index j = 0; j < f.U.cols(); ++j) {
    for (Index i = 0; i < f.U.rows(); ++i) {
      const double u = f.U(i, j);
      if (std::abs(u) > 1e-12) {
        if (u < 0) {
          f.U.col(j) *= -1.0;
          f.V.col(j) *= -1.0;
        }
        break;
      }
    }
  }
}

Matrix orthonormal_basis(const Matrix& y) {
  Eigen::HouseholderQR<Matrix> qr(y);
  return qr.householderQ() * Matrix::Identity(y.rows(), y.cols());
}

}  // namespace

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    std::ostringstream os;
    os << what << ": matrix contains non-finite entries";
    throw InputError(os.str());
  }
}

double frobenius_norm(const Matrix& m) { return m.norm(); }

double l1_norm(const Matrix& m) { return m.cwiseAbs().sum(); }

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double nuclear_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

double spectral_norm(const Matrix& m) {
  require_finite(m, "spectral_norm");
  if (m.size() == 0) return 0.0;
  const double scale = max_abs(m);
  if (scale == 0.0) return 0.0;
  // Rescale so the Gram matrix neither overflows nor underflows.
  const Matrix a = m / scale;
  const Matrix gram = a.rows() <= a.cols() ? Matrix(a * a.transpose()) : Matrix(a.transpose() * a);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double top = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  return scale * std::sqrt(top);
}

Matrix SvdFactors::reconstruct() const { return U * sigma.asDiagonal() * V.transpose(); }

SvdFactors svd_full(const Matrix& m) {
  require_finite(m, "svd_full");
  SvdFactors f;
  if (m.size() == 0) {
    f.U = Matrix::Zero(m.rows(), 0);
    f.V = Matrix::Zero(m.cols(), 0);
    f.sigma = Vector::Zero(0);
    return f;
  }
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  f.U = svd.matrixU();
  f.sigma = svd.singularValues();
  f.V = svd.matrixV();
  fix_signs(f);
  return f;
}

SvdFactors svd_randomized(const Matrix& m, Index target_rank, Index oversample, Index power_iters,
                          std::uint64_t seed) {
  require_finite(m, "svd_randomized");
  const Index min_dim = std::min(m.rows(), m.cols());
  if (target_rank < 0 || target_rank > min_dim) {
    throw InputError("svd_randomized: target_rank exceeds min(rows, cols)");
  }
  if (oversample < 0 || power_iters < 0) {
    throw InputError("svd_randomized: oversample and power_iters must be nonnegative");
  }
  const Index sketch = std::min(target_rank + oversample, min_dim);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix omega(m.cols(), sketch);
  for (Index j = 0; j < omega.cols(); ++j) {
    for (Index i = 0; i < omega.rows(); ++i) omega(i, j) = normal(rng);
  }

  Matrix q = orthonormal_basis(m * omega);
  for (Index it = 0; it < power_iters; ++it) {
    q = orthonormal_basis(m.transpose() * q);
    q = orthonormal_basis(m * q);
  }

  const Matrix b = q.transpose() * m;
  Eigen::BDCSVD<Matrix> small(b, Eigen::ComputeThinU | Eigen::ComputeThinV);

  SvdFactors f;
  f.U = (q * small.matrixU()).leftCols(target_rank);
  f.sigma = small.singularValues().head(target_rank);
  f.V = small.matrixV().leftCols(target_rank);
  fix_signs(f);
  return f;
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw InputError("unvec: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Vector flatten(const LowSparsePair& pair) {
  const Index n = pair.low.size();
  if (pair.sparse.rows() != pair.low.rows() || pair.sparse.cols() != pair.low.cols()) {
    throw InputError("flatten: L and S shapes differ");
  }
  Vector out(2 * n);
  out.head(n) = vec(pair.low);
  out.tail(n) = vec(pair.sparse);
  return out;
}

LowSparsePair unflatten(const Vector& v, Index rows, Index cols) {
  const Index n = rows * cols;
  if (v.size() != 2 * n) throw InputError("unflatten: size mismatch");
  return {unvec(v.head(n), rows, cols), unvec(v.tail(n), rows, cols)};
}

double pair_norm(const LowSparsePair& p) {
  return std::sqrt(p.low.squaredNorm() + p.sparse.squaredNorm());
}

double pair_distance(const LowSparsePair& a, const LowSparsePair& b) {
  return std::sqrt((a.low - b.low).squaredNorm() + (a.sparse - b.sparse).squaredNorm());
}

LinearOp op_identity(Index dim) {
  LinearOp op;
  op.name = "identity";
  op.in_dim = dim;
  op.out_dim = dim;
  op.apply = [](const Vector& x) { return x; };
  op.adjoint = [](const Vector& y) { return y; };
  op.norm_bound = 1.0;
  return op;
}

LinearOp op_dense(const Matrix& m) {
  require_finite(m, "op_dense");
  LinearOp op;
  op.name = "dense";
  op.in_dim = m.cols();
  op.out_dim = m.rows();
  op.apply = [m](const Vector& x) -> Vector { return m * x; };
  op.adjoint = [m](const Vector& y) -> Vector { return m.transpose() * y; };
  op.norm_bound = spectral_norm(m);
  return op;
}

LinearOp op_scaled(const LinearOp& base, double factor) {
  LinearOp op;
  op.name = "scaled(" + base.name + ")";
  op.in_dim = base.in_dim;
  op.out_dim = base.out_dim;
  op.apply = [base, factor](const Vector& x) -> Vector { return factor * base.apply(x); };
  op.adjoint = [base, factor](const Vector& y) -> Vector { return factor * base.adjoint(y); };
  op.norm_bound = std::abs(factor) * base.norm_bound;
  return op;
}

LinearOp op_sum_identity(Index rows, Index cols) {
  const Index n = rows * cols;
  LinearOp op;
  op.name = "sum_identity";
  op.in_dim = 2 * n;
  op.out_dim = n;
  op.apply = [n](const Vector& x) -> Vector {
    if (x.size() != 2 * n) throw InputError("sum_identity: input size mismatch");
    return x.head(n) + x.tail(n);
  };
  op.adjoint = [n](const Vector& y) -> Vector {
    if (y.size() != n) throw InputError("sum_identity: adjoint input size mismatch");
    Vector out(2 * n);
    out.head(n) = y;
    out.tail(n) = y;
    return out;
  };
  op.norm_bound = std::sqrt(2.0);
  return op;
}

LinearOp op_restrict(Index rows, Index cols, std::span<const EntryIndex> observed) {
  const Index n = rows * cols;
  Vector mask = Vector::Zero(n);
  for (const auto& e : observed) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols) {
      throw InputError("op_restrict: observed index out of range");
    }
    mask(e.col * rows + e.row) = 1.0;
  }
  LinearOp op;
  op.name = "restrict";
  op.in_dim = n;
  op.out_dim = n;
  op.apply = [mask](const Vector& x) -> Vector { return x.cwiseProduct(mask); };
  op.adjoint = op.apply;
  op.norm_bound = observed.empty() ? 0.0 : 1.0;
  return op;
}

LinearOp op_stack(const std::vector<LinearOp>& ops) {
  if (ops.empty()) throw InputError("op_stack: no operators");
  const Index in_dim = ops.front().in_dim;
  Index out_dim = 0;
  double sq = 0.0;
  for (const auto& o : ops) {
    if (o.in_dim != in_dim) throw InputError("op_stack: operators disagree on input dimension");
    out_dim += o.out_dim;
    sq += o.norm_bound * o.norm_bound;
  }
  LinearOp op;
  op.name = "stack";
  op.in_dim = in_dim;
  op.out_dim = out_dim;
  op.apply = [ops, out_dim](const Vector& x) -> Vector {
    Vector out(out_dim);
    Index offset = 0;
    for (const auto& o : ops) {
      out.segment(offset, o.out_dim) = o.apply(x);
      offset += o.out_dim;
    }
    return out;
  };
  op.adjoint = [ops, in_dim, out_dim](const Vector& y) -> Vector {
    if (y.size() != out_dim) throw InputError("stack: adjoint input size mismatch");
    Vector out = Vector::Zero(in_dim);
    Index offset = 0;
    for (const auto& o : ops) {
      out += o.adjoint(y.segment(offset, o.out_dim));
      offset += o.out_dim;
    }
    return out;
  };
  op.norm_bound = std::sqrt(sq);
  return op;
}

LinearOp op_compose(const LinearOp& outer, const LinearOp& inner) {
  if (outer.in_dim != inner.out_dim) throw InputError("op_compose: dimension mismatch");
  LinearOp op;
  op.name = outer.name + "*" + inner.name;
  op.in_dim = inner.in_dim;
  op.out_dim = outer.out_dim;
  op.apply = [outer, inner](const Vector& x) -> Vector { return outer.apply(inner.apply(x)); };
  op.adjoint = [outer, inner](const Vector& y) -> Vector { return inner.adjoint(outer.adjoint(y)); };
  op.norm_bound = outer.norm_bound * inner.norm_bound;
  return op;
}

}  // namespace spcp
