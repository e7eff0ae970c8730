#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "misc/adaptation.hpp"
#include "misc/config.hpp"
#include "misc/estimator.hpp"
#include "misc/serialization.hpp"
#include "misc/theory.hpp"

namespace misc {

/// Typed view of a run configuration; see README for every key.
struct RunConfig {
  // problem.*
  int d = 1;
  double nu = 2.5;
  double sigma = 0.2;
  std::vector<double> x0;
  int modes = 0;
  bool deterministic = false;
  // solver.*
  double tolerance = 1e-10;
  double gamma = 1.0;
  Preconditioner preconditioner = Preconditioner::poisson;
  // adaptivity.*
  std::string mode = "apriori";
  std::vector<double> budgets;
  int budget_count = 6;
  int pilot_depth = 3;
  int frontier_width = 2;
  std::optional<std::filesystem::path> model_path;
  double r_fem = 2.0;
  int universe_level = 4;
  int universe_vars = 2;
  // output.*
  std::filesystem::path directory = ".";
  std::string reference = "auto";
  // mimc.*
  int mimc_levels = 4;
  int mimc_pilot = 16;
  int mimc_repetitions = 4;
  int mimc_variables = 0;
  // fit.*
  int fit_variables = 0;
  bool fit_synthetic = false;
  // solve.*
  std::vector<int> solve_alpha;
  SparsePoint solve_y;
  // command line
  std::uint64_t seed = 0;
  int threads = 1;

  std::string canonical_text;  // for the reference hash

  static RunConfig from(const Config& cfg);
};

/// All configuration keys the tool understands.
const std::set<std::string>& known_config_keys();

struct Context {
  std::shared_ptr<const RandomField> field;
  QoISpec qoi;
  SolverOptions solver;
  Problem problem;
};

Context make_context(const RunConfig& cfg);

/// (beta, leb_delta(beta)) for beta = 1..max_beta.
std::vector<std::pair<int, double>> lebesgue_rows(int max_beta);
std::string lebesgue_csv(int max_beta);

/// Report with r_MISC for all three variants and an r_det table over s.
json predict_report(const RunConfig& cfg);

/// Runs the pilot sweeps (or the synthetic self-test) and fits rates.
ErrorModel fit_model(const RunConfig& cfg, Estimator& estimator);

struct RunRecord {
  double budget = 0.0;
  std::int64_t work = 0;
  double estimate = 0.0;
  double abs_error = 0.0;
  int max_alpha = 0;
  int max_beta = 0;
  int last_var = 0;
  int joint_vars = 0;
};

struct RunSummary {
  std::vector<RunRecord> records;
  std::vector<IndexSet> sets;
  double reference = 0.0;
  double slope = 0.0;  // least-squares slope of log(error) vs log(work)
  ErrorModel model;
};

/// Budgets from the config, or the default ladder root_work * 4^k, k = 1..budget_count.
std::vector<double> budget_ladder(const RunConfig& cfg);

/// Index set for one budget under the configured adaptivity mode.
IndexSet build_for_budget(const RunConfig& cfg, Estimator& estimator, const ErrorModel& model,
                          double budget);

/// Loads the model file, or fits one in process when none is configured.
ErrorModel resolve_model(const RunConfig& cfg, Estimator& estimator);

/// Convergence study; writes runs.csv, sets/, reference.json when `write` is set.
RunSummary run_study(const RunConfig& cfg, bool write = true);

struct CompareRow {
  double budget = 0.0;
  std::int64_t misc_work = 0;
  double misc_error = 0.0;
  double mimc_work = 0.0;
  double mimc_error = 0.0;
};

std::vector<CompareRow> compare_study(const RunConfig& cfg, bool write = true);

/// F^alpha(y) for solve.alpha and solve.y.
double solve_single(const RunConfig& cfg);

double fit_slope(const std::vector<double>& work, const std::vector<double>& error);

std::string runs_csv(const RunSummary& summary);
std::vector<RunRecord> parse_runs_csv(const std::string& text);
std::string compare_csv(const std::vector<CompareRow>& rows);

}  // namespace misc
