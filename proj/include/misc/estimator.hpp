#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "misc/index_set.hpp"
#include "misc/pde_solver.hpp"
#include "misc/quadrature.hpp"
#include "misc/random_field.hpp"

namespace misc {

/// F^alpha(y): the discretized quantity of interest, plus its cost in unknowns.
struct Problem {
  int spatial_dims = 1;
  int max_variable = 0;  // directions 1..max_variable may be activated
  std::function<double(const std::vector<int>& alpha, const SparsePoint& y)> eval;
  std::function<std::int64_t(const std::vector<int>& alpha)> cost = unknowns;
};

Problem make_pde_problem(std::shared_ptr<const RandomField> field, QoISpec qoi,
                         SolverOptions opts = {});

/// sum_{i in {0,1}^D} (-1)^|i| f(alpha - i), dropping terms with a zero level.
template <class F>
double alternating_sum(const std::vector<int>& alpha, F&& f) {
  const std::size_t D = alpha.size();
  double sum = 0.0;
  std::vector<int> shifted(alpha);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << D); ++mask) {
    bool valid = true;
    int parity = 0;
    for (std::size_t i = 0; i < D; ++i) {
      const int bit = static_cast<int>((mask >> i) & 1);
      shifted[i] = alpha[i] - bit;
      parity += bit;
      if (shifted[i] < 1) valid = false;
    }
    if (!valid) continue;
    const double v = f(static_cast<const std::vector<int>&>(shifted));
    sum += (parity % 2) ? -v : v;
  }
  return sum;
}

/// Q^{m(beta)}[F^alpha] supplied by the caller.
using TensorEvaluator =
    std::function<double(const std::vector<int>& alpha, const SparseLevelVector& beta)>;

/// Spatial difference at fixed quadrature level.
double delta_det(const std::vector<int>& alpha, const SparseLevelVector& beta,
                 const TensorEvaluator& tensor);

/// Full mixed difference: spatial and stochastic offsets over alpha's
/// dimensions and beta's support (2^(D + |supp beta|) terms).
double mixed_difference(const MixedIndex& idx, const TensorEvaluator& tensor);

/// Key of one F^alpha evaluation: spatial levels plus the hierarchical ids
/// of the non-center coordinates.
struct CacheKey {
  std::vector<int> alpha;
  std::vector<std::pair<int, PointId>> point;

  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

struct CacheKeyHash {
  std::size_t operator()(const CacheKey& k) const;
};

/// Memo of F^alpha values; concurrent readers, exclusive writers.
class EvalCache {
 public:
  bool find(const CacheKey& key, double& value) const;
  void insert(const CacheKey& key, double value);
  std::size_t size() const;
  std::int64_t hits() const { return hits_.load(); }
  std::int64_t misses() const { return misses_.load(); }

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<CacheKey, double, CacheKeyHash> map_;
  mutable std::atomic<std::int64_t> hits_{0};
  mutable std::atomic<std::int64_t> misses_{0};
};

enum class EvalMode { surplus, combination };

struct EstimateReport {
  double value = 0.0;
  std::int64_t work = 0;            // sum over members of N(alpha) * new nodes
  std::int64_t evaluated_work = 0;  // unknowns of the solves actually run
  std::int64_t solves = 0;
  std::int64_t cache_hits = 0;
};

class Estimator {
 public:
  explicit Estimator(Problem problem, int threads = 1);

  const Problem& problem() const { return problem_; }

  double F(const std::vector<int>& alpha, const SparsePoint& y);
  double tensor(const std::vector<int>& alpha, const SparseLevelVector& beta);
  double delta_det(const std::vector<int>& alpha, const SparseLevelVector& beta);
  double mixed_difference(const MixedIndex& idx);

  /// Solves every grid point of the given (alpha, beta) tensor rules that is
  /// not cached yet, spread over the worker threads.
  void prefetch(const std::vector<MixedIndex>& grids);

  EstimateReport evaluate(const IndexSet& set, EvalMode mode);

  const EvalCache& cache() const { return cache_; }
  std::int64_t solves() const { return solves_.load(); }
  std::int64_t solved_work() const { return solved_work_.load(); }

 private:
  std::vector<CacheKey> grid_keys(const std::vector<int>& alpha, const SparseLevelVector& beta) const;
  double solve_key(const CacheKey& key);

  Problem problem_;
  int threads_;
  EvalCache cache_;
  std::mutex tensor_mutex_;
  std::map<MixedIndex, double> tensor_memo_;
  std::atomic<std::int64_t> solves_{0};
  std::atomic<std::int64_t> solved_work_{0};
};

}  // namespace misc
