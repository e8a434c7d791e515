#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spcp/errors.hpp"
#include "spcp/experiment.hpp"
#include "spcp/harness.hpp"
#include "spcp/matrix_io.hpp"

namespace fs = std::filesystem;
using namespace spcp;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNotConverged = 3;

void write_matrix_as(const fs::path& path, const Matrix& m, const std::string& format) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  if (format == "csv") write_matrix_csv(path, m);
  else write_matrix_binary(path, m);
}

fs::path sibling(const fs::path& p, const std::string& stem_suffix) {
  return p.parent_path() / (stem_suffix + p.extension().string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank plus sparse decomposition solvers"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "Solve one formulation on a matrix file");
  std::string config_path;
  solve->add_option("--config", config_path, "key=value config file (flags override it)");
  const std::vector<std::pair<std::string, std::string>> solve_flags{
      {"formulation", "classic|sum|max|flip_sum|flip_max|lag|linf"},
      {"solver", "levelset|spg|qn|tfocs|pdhg"},
      {"eps", "Frobenius residual budget"},
      {"lambda-sum", "weight of ||S||_1 in the sum gauge"},
      {"lambda-max", "weight of ||S||_1 in the max gauge"},
      {"lambda-L", "Lagrangian weight of ||L||_*"},
      {"lambda-S", "Lagrangian weight of ||S||_1"},
      {"tau", "gauge budget of the flipped problems"},
      {"mu", "smoothing weight of the tfocs solver"},
      {"pdhg-ratio", "tau/sigma step ratio of pdhg"},
      {"linf-bound", "entrywise residual bound of linf"},
      {"nonneg", "restrict S >= 0 (true/false)"},
      {"partial-svd", "randomized partial SVDs (true/false)"},
      {"tol", "stopping tolerance"},
      {"max-iters", "iteration budget"},
      {"time-limit", "wall-clock budget in seconds"},
      {"in", "input matrix (binary or CSV)"},
      {"out", "output directory"}};
  std::map<std::string, std::string> solve_values;
  std::map<std::string, CLI::Option*> solve_opts;
  for (const auto& [flag, help] : solve_flags) {
    solve_opts[flag] = solve->add_option("--" + flag, solve_values[flag], help);
  }
  std::string ref_low;
  std::string ref_sparse;
  solve->add_option("--reference-L", ref_low, "reference L for the error column");
  solve->add_option("--reference-S", ref_sparse, "reference S for the error column");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic test matrix");
  std::string kind;
  Index sm = 400;
  Index sn = 500;
  Index srank = 20;
  std::uint64_t sseed = 0;
  double sparsity = 0.05;
  double snr = 45.0;
  std::string synth_out = "A.mat";
  std::string synth_format = "bin";
  synth->add_option("kind", kind, "exponential | lowrank-sparse")
      ->required()
      ->check(CLI::IsMember({"exponential", "lowrank-sparse"}));
  synth->add_option("--m", sm, "rows");
  synth->add_option("--n", sn, "columns");
  synth->add_option("--rank", srank, "rank of the low-rank part");
  synth->add_option("--seed", sseed, "random seed");
  synth->add_option("--sparsity", sparsity, "fraction of nonzero entries in S0 (lowrank-sparse)");
  synth->add_option("--snr", snr, "noise level in dB, 'inf' for none (lowrank-sparse)");
  synth->add_option("--out", synth_out, "output file; L0/S0 are written next to it");
  synth->add_option("--format", synth_format, "bin | csv")->check(CLI::IsMember({"bin", "csv"}));

  // bench
  auto* bench = app.add_subcommand("bench", "Error-versus-time comparison against a shared reference");
  std::string suite = "exponential";
  std::string solver_list = "qn-lag,levelset-max,levelset-sum,flip-max,flip-sum,tfocs,pdhg";
  Index bm = 100;
  Index bn = 125;
  Index brank = 5;
  std::uint64_t bseed = 0;
  std::string bench_in;
  std::string bench_out = "bench_out";
  BenchOptions bopts;
  bench->add_option("--suite", suite, "exponential | lowrank-sparse")
      ->check(CLI::IsMember({"exponential", "lowrank-sparse"}));
  bench->add_option("--solvers", solver_list, "comma-separated solver names");
  bench->add_option("--m", bm, "rows");
  bench->add_option("--n", bn, "columns");
  bench->add_option("--rank", brank, "rank");
  bench->add_option("--seed", bseed, "random seed");
  bench->add_option("--in", bench_in, "use this matrix instead of synthesizing one");
  bench->add_option("--threshold", bopts.error_threshold, "error level for time-to-threshold");
  bench->add_option("--time-limit", bopts.time_limit, "per-solver wall-clock budget (s)");
  bench->add_option("--tol", bopts.tol, "solver tolerance");
  bench->add_option("--out", bench_out, "output directory");

  // derive-params
  auto* derive = app.add_subcommand("derive-params", "Parameters matching an oracle decomposition");
  std::string dl;
  std::string ds;
  std::string da;
  std::optional<double> dlsum;
  std::optional<double> dlmax;
  derive->add_option("--L", dl, "oracle L")->required();
  derive->add_option("--S", ds, "oracle S")->required();
  derive->add_option("--A", da, "observed A")->required();
  derive->add_option("--lambda-sum", dlsum, "lambda_sum for tau_sum");
  derive->add_option("--lambda-max", dlmax, "lambda_max for tau_max (default: derived)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*solve) {
      ExperimentConfig cfg;
      if (!config_path.empty()) cfg = load_config_file(config_path);
      for (const auto& [flag, opt] : solve_opts) {
        if (opt->count() > 0) apply_setting(cfg, flag, solve_values[flag]);
      }
      if (cfg.input.empty()) throw ConfigError("solve needs an input matrix (--in or in=...)");
      validate_config(cfg);
      const Matrix a = read_matrix(cfg.input);
      std::optional<LowSparsePair> reference;
      if (!ref_low.empty() || !ref_sparse.empty()) {
        if (ref_low.empty() || ref_sparse.empty()) throw ConfigError("give both --reference-L and --reference-S");
        reference = LowSparsePair{read_matrix(ref_low), read_matrix(ref_sparse)};
      }
      const RunOutcome outcome = run_solve(cfg, a, reference);
      write_artifacts(cfg.output_dir, cfg, a, outcome);
      std::cout << "status: " << (outcome.converged ? "converged" : "not converged") << "\n"
                << "artifacts: " << fs::path(cfg.output_dir).string() << "\n";
      return outcome.converged ? kOk : kNotConverged;
    }
    if (*synth) {
      const fs::path out = synth_out;
      if (kind == "exponential") {
        write_matrix_as(out, synth_exponential(sm, sn, srank, sseed), synth_format);
      } else {
        const auto nnz = static_cast<Index>(sparsity * static_cast<double>(sm * sn));
        const SynthDecomposition d = synth_lowrank_sparse(sm, sn, srank, nnz, snr, sseed);
        write_matrix_as(out, d.A, synth_format);
        write_matrix_as(sibling(out, out.stem().string() + "_L0"), d.L0, synth_format);
        write_matrix_as(sibling(out, out.stem().string() + "_S0"), d.S0, synth_format);
      }
      std::cout << "wrote " << out.string() << "\n";
      return kOk;
    }
    if (*bench) {
      std::vector<std::string> names;
      std::stringstream ss(solver_list);
      for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) names.push_back(canonical_bench_solver(item));
      }
      if (names.empty()) throw ConfigError("bench needs at least one solver");
      bopts.solvers = names;
      Matrix a;
      if (!bench_in.empty()) {
        a = read_matrix(bench_in);
      } else if (suite == "exponential") {
        a = synth_exponential(bm, bn, brank, bseed);
      } else {
        a = synth_lowrank_sparse(bm, bn, brank, static_cast<Index>(0.05 * static_cast<double>(bm * bn)), 45.0, bseed).A;
      }
      const BenchReport report = run_bench(a, bopts);
      write_bench(bench_out, report);
      for (const auto& e : report.entries) {
        std::cout << e.solver << ": time_to_" << bopts.error_threshold << " = ";
        if (e.time_to_threshold) std::cout << *e.time_to_threshold << " s";
        else std::cout << "never";
        std::cout << ", final_error = " << e.final_error << "\n";
      }
      return kOk;
    }
    if (*derive) {
      const Matrix a = read_matrix(da);
      const LowSparsePair oracle{read_matrix(dl), read_matrix(ds)};
      const DerivedParameters p = derive_parameters(oracle, a, dlsum, dlmax);
      std::cout.precision(12);
      std::cout << "lambda_max = " << p.lambda_max << "\neps = " << p.epsilon << "\n";
      if (p.tau_sum) std::cout << "tau_sum = " << *p.tau_sum << "\n";
      if (p.tau_max) std::cout << "tau_max = " << *p.tau_max << "\n";
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DriverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kNotConverged;
  }
  return kOk;
}
