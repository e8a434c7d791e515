#pragma once

#include <cstdint>
#include <limits>
#include <optional>

#include "spcp/dualsmooth.hpp"
#include "spcp/matcore.hpp"

namespace spcp {

/// Sentinel for synth_lowrank_sparse: no additive noise.
inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

/// U diag(s) V^T with Haar-random U, V and singular values uniform on [0, 0.2]
/// (mean 0.1), plus entrywise exponential noise of mean 0.1 * median |entry|.
/// With rank 0 the noise has mean 0.1.
Matrix synth_exponential(Index m, Index n, Index rank, std::uint64_t seed);

struct SynthDecomposition {
  Matrix A;
  Matrix L0;
  Matrix S0;
};

/// A = L0 + S0 + Z0: L0 = X Y^T with standard normal m x r and n x r factors,
/// S0 with `nnz` entries uniform on [-100, 100] at uniformly chosen positions,
/// Z0 white Gaussian noise scaled to 20 log10(||L0 + S0|| / ||Z0||) = snr_db.
SynthDecomposition synth_lowrank_sparse(Index m, Index n, Index r, Index nnz, double snr_db,
                                        std::uint64_t seed);

struct DerivedParameters {
  double lambda_max = 0.0;
  double epsilon = 0.0;
  std::optional<double> tau_sum;
  std::optional<double> tau_max;
};

/// lambda_max = ||L||_* / ||S||_1, epsilon = ||L + S - A||_F; tau_sum needs
/// lambda_sum; tau_max uses the supplied lambda_max or the derived one.
DerivedParameters derive_parameters(const LowSparsePair& oracle, const Matrix& a,
                                    std::optional<double> lambda_sum = std::nullopt,
                                    std::optional<double> lambda_max = std::nullopt);

/// lambda_sum matching a Lagrangian solution: lambda_S / lambda_L.
double lambda_sum_from_lagrangian(double lambda_L, double lambda_S);

/// 1 / sqrt(max(m, n)).
double default_lambda_sum(Index m, Index n);

/// sqrt of the sum of squared singular values beyond the first `keep`.
double epsilon_from_spectrum(const Matrix& a, Index keep);

/// ||y - P y|| with P the orthogonal projector onto the column space of L.
double span_projection_error(const Matrix& l, const Vector& y);

enum class ErrorMetric { sum_of_ratios, joint };

/// sum_of_ratios: ||L - L*|| / ||L*|| + ||S - S*|| / ||S*||;
/// joint: sqrt(||L - L*||^2 + ||S - S*||^2) / sqrt(||L*||^2 + ||S*||^2).
double relative_pair_error(const LowSparsePair& pair, const LowSparsePair& reference,
                           ErrorMetric metric = ErrorMetric::sum_of_ratios);

/// Rank with relative threshold 1e-9 on the singular values.
Index numerical_rank(const Matrix& m);
/// Entries with magnitude above 1e-10 * max(1, max |entry|).
Index count_nonzeros(const Matrix& m);

// Composite models over flattened pairs [vec L; vec S] for the dual-smoothing
// and primal-dual solvers. Every model has one term with op = [I I] and offset A.

/// min ||L||_* + lambda ||S||_1 s.t. L + S = A.
CompositeModel model_classic(const Matrix& a, double lambda);
/// min ||L||_* + lambda ||S||_1 s.t. ||L + S - A||_F <= eps.
CompositeModel model_sum_spcp(const Matrix& a, double lambda, double eps);
/// min ||L||_* + lambda ||S||_1 s.t. ||L + S - A||_inf <= bound.
CompositeModel model_linf(const Matrix& a, double lambda, double bound = 0.5);
/// min lambda_L ||L||_* + lambda_S ||S||_1 + 0.5 ||L + S - A||_F^2.
CompositeModel model_lagrangian(const Matrix& a, double lambda_L, double lambda_S);

}  // namespace spcp
