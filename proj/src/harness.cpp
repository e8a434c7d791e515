#include "spcp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "spcp/errors.hpp"
#include "spcp/prox.hpp"

namespace spcp {

namespace {

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
  }
  return g;
}

/// Haar-distributed orthonormal columns: QR of a Gaussian matrix with R's diagonal made positive.
Matrix haar_columns(Index rows, Index cols, std::mt19937_64& rng) {
  const Matrix g = gaussian(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Index j = 0; j < cols; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

void require_dims(Index m, Index n, Index rank, const char* where) {
  if (m < 1 || n < 1) throw InputError(std::string(where) + ": dimensions must be positive");
  if (rank < 0 || rank > std::min(m, n)) throw InputError(std::string(where) + ": rank exceeds min(m, n)");
}

CompositeModel pair_model(const Matrix& a, ProxHandle psi0, ProxHandle psi1) {
  require_finite(a, "composite model");
  CompositeModel model;
  model.psi0 = std::move(psi0);
  model.terms.push_back({std::move(psi1), op_sum_identity(a.rows(), a.cols()), vec(a)});
  return model;
}

}  // namespace

Matrix synth_exponential(Index m, Index n, Index rank, std::uint64_t seed) {
  require_dims(m, n, rank, "synth_exponential");
  std::mt19937_64 rng(seed);
  Matrix a0 = Matrix::Zero(m, n);
  if (rank > 0) {
    const Matrix u = haar_columns(m, rank, rng);
    const Matrix v = haar_columns(n, rank, rng);
    std::uniform_real_distribution<double> uniform(0.0, 0.2);
    Vector s(rank);
    for (Index i = 0; i < rank; ++i) s(i) = uniform(rng);
    std::sort(s.data(), s.data() + rank, std::greater<>());
    a0 = u * s.asDiagonal() * v.transpose();
  }
  std::vector<double> mags(a0.data(), a0.data() + a0.size());
  for (double& x : mags) x = std::abs(x);
  const auto mid = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2);
  std::nth_element(mags.begin(), mid, mags.end());
  double median = *mid;
  if (mags.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(mags.begin(), mid));
  }
  const double mean = median > 0.0 ? 0.1 * median : 0.1;
  std::exponential_distribution<double> expo(1.0 / mean);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) a0(i, j) += expo(rng);
  }
  return a0;
}

SynthDecomposition synth_lowrank_sparse(Index m, Index n, Index r, Index nnz, double snr_db,
                                        std::uint64_t seed) {
  require_dims(m, n, r, "synth_lowrank_sparse");
  if (nnz < 0 || nnz > m * n) throw InputError("synth_lowrank_sparse: nnz must lie in [0, m*n]");
  if (std::isnan(snr_db)) throw InputError("synth_lowrank_sparse: snr_db is NaN");
  std::mt19937_64 rng(seed);
  SynthDecomposition out;
  out.L0 = r > 0 ? Matrix(gaussian(m, r, rng) * gaussian(n, r, rng).transpose()) : Matrix(Matrix::Zero(m, n));

  out.S0 = Matrix::Zero(m, n);
  std::vector<Index> positions(static_cast<std::size_t>(m * n));
  std::iota(positions.begin(), positions.end(), Index{0});
  std::shuffle(positions.begin(), positions.end(), rng);
  std::uniform_real_distribution<double> uniform(-100.0, 100.0);
  for (Index k = 0; k < nnz; ++k) out.S0.data()[positions[static_cast<std::size_t>(k)]] = uniform(rng);

  out.A = out.L0 + out.S0;
  if (std::isfinite(snr_db)) {
    const Matrix z = gaussian(m, n, rng);
    const double signal = out.A.norm();
    const double zn = z.norm();
    if (signal > 0.0 && zn > 0.0) out.A += z * (signal / (zn * std::pow(10.0, snr_db / 20.0)));
  }
  return out;
}

DerivedParameters derive_parameters(const LowSparsePair& oracle, const Matrix& a,
                                    std::optional<double> lambda_sum, std::optional<double> lambda_max) {
  require_finite(a, "derive_parameters");
  if (oracle.rows() != a.rows() || oracle.cols() != a.cols()) {
    throw InputError("derive_parameters: oracle shape differs from A");
  }
  const double nuc = nuclear_norm(oracle.low);
  const double l1 = l1_norm(oracle.sparse);
  if (l1 == 0.0) throw InputError("derive_parameters: S is zero, lambda_max undefined");
  DerivedParameters p;
  p.lambda_max = nuc / l1;
  p.epsilon = (oracle.low + oracle.sparse - a).norm();
  if (lambda_sum) p.tau_sum = nuc + *lambda_sum * l1;
  p.tau_max = std::max(nuc, lambda_max.value_or(p.lambda_max) * l1);
  return p;
}

double lambda_sum_from_lagrangian(double lambda_L, double lambda_S) {
  if (!(lambda_L > 0.0) || !(lambda_S > 0.0)) throw InputError("lagrangian weights must be positive");
  return lambda_S / lambda_L;
}

double default_lambda_sum(Index m, Index n) {
  if (m < 1 || n < 1) throw InputError("default_lambda_sum: dimensions must be positive");
  return 1.0 / std::sqrt(static_cast<double>(std::max(m, n)));
}

double epsilon_from_spectrum(const Matrix& a, Index keep) {
  require_finite(a, "epsilon_from_spectrum");
  const Index k = std::min(a.rows(), a.cols());
  if (keep < 0 || keep > k) throw InputError("epsilon_from_spectrum: keep must lie in [0, min(m, n)]");
  if (keep == k) return 0.0;
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues().tail(k - keep).norm();
}

double span_projection_error(const Matrix& l, const Vector& y) {
  if (y.size() != l.rows()) throw InputError("span_projection_error: dimension mismatch");
  require_finite(l, "span_projection_error");
  const SvdFactors f = svd_full(l);
  if (f.sigma.size() == 0 || f.sigma(0) == 0.0) return y.norm();
  const double cutoff = 1e-10 * f.sigma(0);
  const Index r = (f.sigma.array() > cutoff).count();
  const Matrix u = f.U.leftCols(r);
  return (y - u * (u.transpose() * y)).norm();
}

double relative_pair_error(const LowSparsePair& pair, const LowSparsePair& reference, ErrorMetric metric) {
  const double nl = reference.low.norm();
  const double ns = reference.sparse.norm();
  if (metric == ErrorMetric::joint) {
    const double den = std::sqrt(nl * nl + ns * ns);
    if (den == 0.0) throw InputError("relative_pair_error: zero reference");
    return pair_distance(pair, reference) / den;
  }
  if (nl == 0.0 || ns == 0.0) throw InputError("relative_pair_error: a reference block is zero");
  return (pair.low - reference.low).norm() / nl + (pair.sparse - reference.sparse).norm() / ns;
}

Index numerical_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  return (s.array() > 1e-9 * s(0)).count();
}

Index count_nonzeros(const Matrix& m) {
  const double cutoff = 1e-10 * std::max(1.0, max_abs(m));
  return (m.array().abs() > cutoff).count();
}

CompositeModel model_classic(const Matrix& a, double lambda) {
  return pair_model(a, prox_sum_gauge_penalty(a.rows(), a.cols(), lambda), prox_indicator_point());
}

CompositeModel model_sum_spcp(const Matrix& a, double lambda, double eps) {
  return pair_model(a, prox_sum_gauge_penalty(a.rows(), a.cols(), lambda), prox_indicator_l2_ball(eps));
}

CompositeModel model_linf(const Matrix& a, double lambda, double bound) {
  return pair_model(a, prox_sum_gauge_penalty(a.rows(), a.cols(), lambda), prox_indicator_linf_ball(bound));
}

CompositeModel model_lagrangian(const Matrix& a, double lambda_L, double lambda_S) {
  const Index n = a.size();
  return pair_model(a,
                    prox_separable({{prox_nuclear(a.rows(), a.cols(), lambda_L), n}, {prox_l1(lambda_S), n}}),
                    prox_sq_norm(1.0));
}

}  // namespace spcp
