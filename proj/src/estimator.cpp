#include "misc/estimator.hpp"

#include <exception>
#include <set>
#include <thread>

#include "misc/errors.hpp"

namespace misc {

Problem make_pde_problem(std::shared_ptr<const RandomField> field, QoISpec qoi, SolverOptions opts) {
  if (!field) throw std::invalid_argument("missing random field");
  Problem p;
  p.spatial_dims = field->dim();
  p.max_variable = field->size();
  p.eval = [field, qoi = std::move(qoi), opts](const std::vector<int>& alpha, const SparsePoint& y) {
    return solve_qoi(alpha, y, *field, qoi, opts);
  };
  p.cost = unknowns;
  return p;
}

double delta_det(const std::vector<int>& alpha, const SparseLevelVector& beta,
                 const TensorEvaluator& tensor) {
  return alternating_sum(alpha, [&](const std::vector<int>& a) { return tensor(a, beta); });
}

double mixed_difference(const MixedIndex& idx, const TensorEvaluator& tensor) {
  const auto entries = idx.beta.entries();
  const std::size_t S = entries.size();
  double sum = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << S); ++mask) {
    SparseLevelVector b = idx.beta;
    int parity = 0;
    for (std::size_t k = 0; k < S; ++k) {
      if ((mask >> k) & 1) {
        b.set(entries[k].first, entries[k].second - 1);
        ++parity;
      }
    }
    const double v = delta_det(idx.alpha, b, tensor);
    sum += (parity % 2) ? -v : v;
  }
  return sum;
}

std::size_t CacheKeyHash::operator()(const CacheKey& k) const {
  std::size_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  for (int a : k.alpha) mix(static_cast<std::uint64_t>(a));
  mix(0xffff);
  for (const auto& [j, id] : k.point) {
    mix(static_cast<std::uint64_t>(j));
    mix(static_cast<std::uint64_t>(id.level));
    mix(static_cast<std::uint64_t>(id.index));
  }
  return h;
}

bool EvalCache::find(const CacheKey& key, double& value) const {
  std::shared_lock lock(mutex_);
  auto it = map_.find(key);
  if (it == map_.end()) {
    ++misses_;
    return false;
  }
  ++hits_;
  value = it->second;
  return true;
}

void EvalCache::insert(const CacheKey& key, double value) {
  std::unique_lock lock(mutex_);
  map_.emplace(key, value);
}

std::size_t EvalCache::size() const {
  std::shared_lock lock(mutex_);
  return map_.size();
}

Estimator::Estimator(Problem problem, int threads)
    : problem_(std::move(problem)), threads_(threads < 1 ? 1 : threads) {
  if (!problem_.eval) throw std::invalid_argument("problem has no evaluator");
}

namespace {

void check_index(const Problem& p, const std::vector<int>& alpha, const SparseLevelVector& beta) {
  if (static_cast<int>(alpha.size()) != p.spatial_dims) {
    throw std::invalid_argument("spatial level vector has the wrong dimension");
  }
  if (beta.last_active() > p.max_variable) {
    throw ConfigError("direction " + std::to_string(beta.last_active()) +
                      " is beyond the enumerated variables (" + std::to_string(p.max_variable) +
                      ")");
  }
}

SparsePoint point_of(const CacheKey& key) {
  SparsePoint y;
  y.reserve(key.point.size());
  for (const auto& [j, id] : key.point) y.emplace_back(j, point_coordinate(id));
  return y;
}

struct GridWalk {
  std::vector<int> dirs;
  std::vector<const QuadRule*> rules;
  std::vector<std::vector<PointId>> ids;

  explicit GridWalk(const SparseLevelVector& beta) {
    for (const auto& [j, level] : beta.entries()) {
      dirs.push_back(j);
      rules.push_back(&cc_rule(level));
      std::vector<PointId> row;
      const auto m = level_to_nodes(level);
      for (std::int64_t i = 0; i < m; ++i) row.push_back(point_id(level, i));
      ids.push_back(std::move(row));
    }
  }

  // Calls f(key point, weight) in lexicographic order, last direction fastest.
  template <class F>
  void for_each(F&& f) const {
    const std::size_t S = dirs.size();
    std::vector<std::size_t> idx(S, 0);
    std::vector<std::pair<int, PointId>> point;
    while (true) {
      point.clear();
      double w = 1.0;
      for (std::size_t k = 0; k < S; ++k) {
        w *= rules[k]->weights[idx[k]];
        const PointId& id = ids[k][idx[k]];
        if (!id.is_center()) point.emplace_back(dirs[k], id);
      }
      f(point, w);
      std::size_t k = S;
      while (true) {
        if (k == 0) return;
        --k;
        if (++idx[k] < rules[k]->weights.size()) break;
        idx[k] = 0;
      }
    }
  }
};

}  // namespace

std::vector<CacheKey> Estimator::grid_keys(const std::vector<int>& alpha,
                                           const SparseLevelVector& beta) const {
  std::vector<CacheKey> keys;
  GridWalk(beta).for_each([&](const auto& point, double) { keys.push_back(CacheKey{alpha, point}); });
  return keys;
}

double Estimator::solve_key(const CacheKey& key) {
  const double v = problem_.eval(key.alpha, point_of(key));
  ++solves_;
  solved_work_ += problem_.cost(key.alpha);
  return v;
}

double Estimator::F(const std::vector<int>& alpha, const SparsePoint& y) {
  // Only nodes of the nested rules have cache identities; other points go
  // straight to the solver.
  return problem_.eval(alpha, y);
}

double Estimator::tensor(const std::vector<int>& alpha, const SparseLevelVector& beta) {
  check_index(problem_, alpha, beta);
  const MixedIndex memo_key{alpha, beta};
  {
    std::lock_guard lock(tensor_mutex_);
    auto it = tensor_memo_.find(memo_key);
    if (it != tensor_memo_.end()) return it->second;
  }
  double sum = 0.0;
  GridWalk(beta).for_each([&](const auto& point, double w) {
    CacheKey key{alpha, point};
    double v;
    if (!cache_.find(key, v)) {
      v = solve_key(key);
      cache_.insert(key, v);
    }
    sum += w * v;
  });
  std::lock_guard lock(tensor_mutex_);
  tensor_memo_.emplace(memo_key, sum);
  return sum;
}

double Estimator::delta_det(const std::vector<int>& alpha, const SparseLevelVector& beta) {
  return misc::delta_det(alpha, beta, [this](const auto& a, const auto& b) { return tensor(a, b); });
}

double Estimator::mixed_difference(const MixedIndex& idx) {
  return misc::mixed_difference(idx, [this](const auto& a, const auto& b) { return tensor(a, b); });
}

void Estimator::prefetch(const std::vector<MixedIndex>& grids) {
  std::vector<CacheKey> missing;
  std::set<std::pair<std::vector<int>, std::vector<std::pair<int, PointId>>>> seen;
  for (const auto& g : grids) {
    check_index(problem_, g.alpha, g.beta);
    for (auto& key : grid_keys(g.alpha, g.beta)) {
      double v;
      if (cache_.find(key, v)) continue;
      if (seen.emplace(key.alpha, key.point).second) missing.push_back(std::move(key));
    }
  }
  if (missing.empty()) return;

  std::vector<double> values(missing.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t k = next++;
      if (k >= missing.size()) return;
      try {
        values[k] = solve_key(missing[k]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = missing.size();
        return;
      }
    }
  };
  const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(threads_), missing.size());
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  for (std::size_t k = 0; k < missing.size(); ++k) cache_.insert(missing[k], values[k]);
}

EstimateReport Estimator::evaluate(const IndexSet& set, EvalMode mode) {
  if (set.empty()) throw ConfigError("cannot evaluate an empty index set");
  if (!set.is_downward_closed()) throw ConfigError("estimator index set is not downward closed");
  const std::int64_t solves0 = solves(), work0 = solved_work(), hits0 = cache_.hits();

  EstimateReport report;
  report.work = total_work(set);
  if (mode == EvalMode::surplus) {
    std::set<MixedIndex> grids;
    for (const auto& m : set) {
      alternating_sum(m.alpha, [&](const std::vector<int>& a) {
        grids.insert(MixedIndex{a, m.beta});
        return 0.0;
      });
    }
    prefetch({grids.begin(), grids.end()});
    for (const auto& m : set) report.value += mixed_difference(m);
  } else {
    const auto coeff = combination_coefficients(set);
    std::vector<MixedIndex> grids;
    for (const auto& [m, c] : coeff) {
      if (c != 0) grids.push_back(m);
    }
    prefetch(grids);
    for (const auto& [m, c] : coeff) {
      if (c != 0) report.value += c * tensor(m.alpha, m.beta);
    }
  }
  report.solves = solves() - solves0;
  report.evaluated_work = solved_work() - work0;
  report.cache_hits = cache_.hits() - hits0;
  return report;
}

}  // namespace misc
