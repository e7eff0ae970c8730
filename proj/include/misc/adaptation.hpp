#pragma once

#include <cstdint>
#include <vector>

#include "misc/estimator.hpp"
#include "misc/index_set.hpp"

namespace misc {

struct WorkModel {
  std::vector<double> gamma;  // per spatial dimension, >= 1
  std::vector<double> d;      // per spatial dimension, >= 1
  double C_W = 1.0;

  static WorkModel uniform(int D, double gamma = 1.0);
};

struct ErrorModel {
  double r_fem = 2.0;
  std::vector<double> g_tilde;  // g_tilde[j - 1] for direction j
  double C_E = 1.0;
  double residual = 0.0;
};

/// C_W 2^(sum gamma_i d_i alpha_i + |beta - 1|)
double work_contribution(const MixedIndex& idx, const WorkModel& model);
/// C_E exp(-sum_j m(beta_j - 1) g_j) 2^(-|alpha| r_fem)
double error_contribution_model(const MixedIndex& idx, const ErrorModel& model);

struct ProfitEntry {
  MixedIndex index;
  double dE = 0.0;
  double dW = 0.0;
  double profit = 0.0;
  bool closure_added = false;
};

struct SelectionCriterion {
  enum class Kind { threshold, budget };
  Kind kind = Kind::threshold;
  double value = 0.0;

  static SelectionCriterion threshold(double epsilon) { return {Kind::threshold, epsilon}; }
  static SelectionCriterion budget(double max_work) { return {Kind::budget, max_work}; }
};

struct SetBuildResult {
  IndexSet set;
  std::vector<ProfitEntry> entries;  // in acceptance order; closure additions last
  double epsilon = 0.0;              // smallest accepted profit
  std::int64_t work = 0;             // total_work(set)
};

/// Greedy profit walk over the admissible frontier. New directions are
/// offered in mode order, at most `frontier_width` beyond the deepest
/// activated one and never beyond the fitted rates. Equal-profit batches are
/// accepted together. In budget mode the walk stops before the first batch
/// whose acceptance would push total_work above the budget.
SetBuildResult build_set_apriori(int D, const WorkModel& work, const ErrorModel& error,
                                 SelectionCriterion criterion, int frontier_width = 2);

inline constexpr std::size_t kMaxUniverse = 500;

/// {(alpha, beta) : |alpha - 1| + |beta - 1| <= level, active directions <= nvars}
IndexSet make_universe(int D, int level, int nvars);

struct BruteForceResult {
  SetBuildResult selection;
  std::vector<ProfitEntry> actual;   // every universe member, measured
  std::vector<ProfitEntry> modeled;  // same members under the models, if given
};

/// Measures every mixed difference of the universe and selects by actual
/// profit |Delta| / work_of(index).
BruteForceResult build_set_bruteforce(const IndexSet& universe, Estimator& estimator,
                                      SelectionCriterion criterion,
                                      const WorkModel* work = nullptr,
                                      const ErrorModel* error = nullptr);

struct RateSample {
  MixedIndex index;
  double value = 0.0;  // |Delta| at index
};

/// Least squares for log|Delta| = log C_E - sum_j m(beta_j - 1) g_j - |alpha| r_fem log 2.
/// Throws NumericalError naming the directions that cannot be identified.
ErrorModel fit_rates(const std::vector<RateSample>& samples, double r_fem);

/// Pilot indices: beta sweeps 1 + k e_j at alpha = 1, alpha sweeps 1 + k at
/// beta = 1 and a joint sweep along direction 1, for k = 1..depth.
std::vector<MixedIndex> pilot_design(int D, int nvars, int depth);

/// Evaluates the pilot design and keeps samples above `noise_floor`. Directions
/// left without usable samples at alpha = 1 are swept again on finer meshes;
/// the fit is truncated at the first direction that never becomes usable.
std::vector<RateSample> pilot_samples(Estimator& estimator, int nvars, int depth,
                                      double noise_floor);

}  // namespace misc
