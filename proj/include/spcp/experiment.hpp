#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spcp/harness.hpp"
#include "spcp/matcore.hpp"
#include "spcp/trace.hpp"

namespace spcp {

enum class Formulation { classic, sum, max, flip_sum, flip_max, lag, linf };
enum class SolverKind { levelset, spg, qn, tfocs, pdhg };

Formulation parse_formulation(const std::string& s);
SolverKind parse_solver(const std::string& s);
std::string to_string(Formulation f);
std::string to_string(SolverKind s);

/// Settings of one `solve` run. Parameters not needed by the formulation are ignored.
struct ExperimentConfig {
  Formulation formulation = Formulation::sum;
  SolverKind solver = SolverKind::levelset;
  std::optional<double> lambda_sum;
  std::optional<double> lambda_max;
  std::optional<double> lambda_L;
  std::optional<double> lambda_S;
  /// Frobenius residual budget ||L + S - A||_F <= eps.
  std::optional<double> epsilon;
  std::optional<double> tau;
  /// Smoothing weight of the dual-smoothing solver; default 0.005 * sqrt(mn) / ||A||_F.
  std::optional<double> mu;
  double pdhg_ratio = 1.0;
  double linf_bound = 0.5;
  bool nonneg = false;
  bool partial_svd = false;
  double tol = 1e-6;
  Index max_iters = 20000;
  double time_limit = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  std::string input;
  std::string output_dir = ".";
};

/// Applies one key=value setting (keys use underscores; dashes are accepted).
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// Parses `key = value` lines; blank lines and `#` comments are skipped.
ExperimentConfig parse_config_text(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base = {});
/// Throws ConfigError when the formulation, solver and parameters do not fit together.
void validate_config(const ExperimentConfig& cfg);

struct RunOutcome {
  LowSparsePair pair;
  SolveTrace trace;
  bool converged = false;
  double seconds = 0.0;
  /// Human-readable solver notes (iterations, tau, ...).
  std::string details;
};

/// Runs the configured solver on A. With a reference the trace carries the
/// sum-of-ratios relative error (computed off the clock).
RunOutcome run_solve(const ExperimentConfig& cfg, const Matrix& a,
                     const std::optional<LowSparsePair>& reference = std::nullopt);

/// Writes L.mat, S.mat, trace.csv and summary.txt into `dir`.
void write_artifacts(const std::filesystem::path& dir, const ExperimentConfig& cfg, const Matrix& a,
                     const RunOutcome& outcome);

struct LagrangianTuning {
  double lambda_L = 0.0;
  double lambda_S = 0.0;
  LowSparsePair solution;
};

/// High-accuracy Lagrangian reference: lambda_L = c_L ||A||_2, lambda_S = c_S ||A||_inf
/// starting from (0.25, 0.1), halving a coefficient while its block of the solution is zero.
LagrangianTuning tune_lagrangian_reference(const Matrix& a, double tol = 1e-12, Index max_iters = 200000);

struct BenchOptions {
  std::vector<std::string> solvers{"qn-lag", "levelset-max", "levelset-sum", "flip-max", "flip-sum", "tfocs", "pdhg"};
  double error_threshold = 1e-4;
  double time_limit = 30.0;
  double tol = 1e-10;
  Index max_iters = 200000;
  std::optional<double> mu;
  /// Randomized partial SVDs in the quasi-Newton solvers (qn-lag, flip-max, levelset-max).
  bool partial_svd = true;
};

struct BenchEntry {
  std::string solver;
  SolveTrace trace;
  std::optional<double> time_to_threshold;
  double final_error = 0.0;
  bool converged = false;
};

struct BenchReport {
  LagrangianTuning reference;
  double lambda_sum = 0.0;
  DerivedParameters params;
  std::vector<BenchEntry> entries;
};

/// Canonical bench solver name ("levelset" -> "levelset-max", ...); throws ConfigError if unknown.
std::string canonical_bench_solver(const std::string& name);

/// Solves every requested formulation against a shared Lagrangian reference and
/// records error-versus-time traces.
BenchReport run_bench(const Matrix& a, const BenchOptions& opts);

/// One trace CSV per solver plus bench_summary.txt.
void write_bench(const std::filesystem::path& dir, const BenchReport& report);

}  // namespace spcp
