#include "misc/adaptation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include "misc/errors.hpp"

namespace misc {

WorkModel WorkModel::uniform(int D, double gamma) {
  WorkModel m;
  m.gamma.assign(static_cast<std::size_t>(D), gamma);
  m.d.assign(static_cast<std::size_t>(D), 1.0);
  return m;
}

double work_contribution(const MixedIndex& idx, const WorkModel& model) {
  if (model.gamma.size() != idx.alpha.size() || model.d.size() != idx.alpha.size()) {
    throw std::invalid_argument("work model does not match the spatial dimension");
  }
  double e = 0.0;
  for (std::size_t i = 0; i < idx.alpha.size(); ++i) e += model.gamma[i] * model.d[i] * idx.alpha[i];
  return model.C_W * std::exp2(e + idx.beta.excess());
}

double error_contribution_model(const MixedIndex& idx, const ErrorModel& model) {
  double s = 0.0;
  for (const auto& [j, level] : idx.beta.entries()) {
    if (j > static_cast<int>(model.g_tilde.size())) {
      throw ConfigError("no fitted rate for direction " + std::to_string(j));
    }
    s += static_cast<double>(level_to_nodes(level - 1)) * model.g_tilde[static_cast<std::size_t>(j - 1)];
  }
  int a = 0;
  for (int v : idx.alpha) a += v;
  return model.C_E * std::exp(-s) * std::exp2(-a * model.r_fem);
}

namespace {

constexpr int kMaxSpatialLevel = 24;
constexpr std::size_t kMaxMembers = 2'000'000;

struct Candidate {
  double profit;
  int order;
  MixedIndex idx;

  bool operator<(const Candidate& o) const {
    if (profit != o.profit) return profit > o.profit;
    if (order != o.order) return order < o.order;
    return idx < o.idx;
  }
};

ProfitEntry entry_for(const MixedIndex& idx, const WorkModel& work, const ErrorModel& error) {
  ProfitEntry e;
  e.index = idx;
  e.dE = error_contribution_model(idx, error);
  e.dW = work_contribution(idx, work);
  e.profit = e.dE / e.dW;
  return e;
}

bool admissible(const IndexSet& set, const MixedIndex& idx) {
  for (const auto& b : idx.backward_neighbors()) {
    if (!set.contains(b)) return false;
  }
  return true;
}

}  // namespace

SetBuildResult build_set_apriori(int D, const WorkModel& work, const ErrorModel& error,
                                 SelectionCriterion criterion, int frontier_width) {
  if (frontier_width < 1) throw ConfigError("frontier width must be at least 1");
  if (!(error.r_fem > 0.0)) throw ConfigError("r_fem must be positive");
  for (double g : error.g_tilde) {
    if (!(g > 0.0)) throw ConfigError("stochastic rates must be positive");
  }
  const bool budget_mode = criterion.kind == SelectionCriterion::Kind::budget;
  if (!budget_mode && !(criterion.value > 0.0)) throw ConfigError("threshold must be positive");

  const MixedIndex root = root_index(D);
  if (budget_mode && static_cast<double>(work_of(root)) > criterion.value) {
    throw ConfigError("budget smaller than the root index's work (" +
                      std::to_string(work_of(root)) + ")");
  }

  const int nrates = static_cast<int>(error.g_tilde.size());
  auto limit_for = [&](int max_active) { return std::min(max_active + frontier_width, nrates); };

  SetBuildResult res;
  res.set = IndexSet(D);
  std::set<Candidate> queue;
  std::set<MixedIndex> queued;
  auto offer = [&](const MixedIndex& z) {
    if (res.set.contains(z) || queued.count(z)) return;
    for (int a : z.alpha) {
      if (a > kMaxSpatialLevel) return;
    }
    if (z.beta.max_level() > kMaxQuadLevel) return;
    if (!admissible(res.set, z)) return;
    const ProfitEntry e = entry_for(z, work, error);
    queue.insert(Candidate{e.profit, z.order(), z});
    queued.insert(z);
  };
  auto scan = [&](const MixedIndex& x, int j_from, int j_to, bool spatial) {
    if (spatial) {
      for (std::size_t i = 0; i < x.alpha.size(); ++i) {
        MixedIndex z = x;
        ++z.alpha[i];
        offer(z);
      }
    }
    for (int j = j_from; j <= j_to; ++j) offer(MixedIndex{x.alpha, x.beta.incremented(j)});
  };

  offer(root);
  int max_active = 0;
  double running_work = 0.0;
  while (!queue.empty()) {
    const double p = queue.begin()->profit;
    if (!budget_mode && p < criterion.value) break;
    std::vector<MixedIndex> batch;
    double batch_work = 0.0;
    for (auto it = queue.begin(); it != queue.end() && it->profit == p; ++it) {
      batch.push_back(it->idx);
      batch_work += static_cast<double>(work_of(it->idx));
    }
    if (budget_mode && running_work + batch_work > criterion.value) break;
    if (res.set.size() + batch.size() > kMaxMembers) {
      throw NumericalError("index set construction exceeded " + std::to_string(kMaxMembers) +
                           " members");
    }
    for (const auto& x : batch) {
      queue.erase(queue.begin());
      queued.erase(x);
    }
    running_work += batch_work;
    res.epsilon = p;

    const int old_limit = limit_for(max_active);
    for (const auto& x : batch) {
      res.set.insert(x);
      res.entries.push_back(entry_for(x, work, error));
      max_active = std::max(max_active, x.beta.last_active());
    }
    const int new_limit = limit_for(max_active);
    for (const auto& x : batch) scan(x, 1, new_limit, true);
    if (new_limit > old_limit) {
      for (const auto& x : res.set) scan(x, old_limit + 1, new_limit, false);
    }
  }

  if (res.set.empty()) {
    res.set.insert(root);
    ProfitEntry e = entry_for(root, work, error);
    e.closure_added = true;
    res.entries.push_back(std::move(e));
  }
  for (const auto& added : res.set.close()) {
    ProfitEntry e = entry_for(added, work, error);
    e.closure_added = true;
    res.entries.push_back(std::move(e));
  }
  res.work = total_work(res.set);
  return res;
}

IndexSet make_universe(int D, int level, int nvars) {
  if (level < 0) throw ConfigError("universe level must be nonnegative");
  if (nvars < 0) throw ConfigError("universe variable count must be nonnegative");
  IndexSet set(D);
  std::vector<MixedIndex> stack{root_index(D)};
  set.insert(stack.back());
  while (!stack.empty()) {
    const MixedIndex x = stack.back();
    stack.pop_back();
    if (x.alpha.size() + static_cast<std::size_t>(level) <= static_cast<std::size_t>(x.order())) {
      continue;
    }
    std::vector<MixedIndex> next;
    for (std::size_t i = 0; i < x.alpha.size(); ++i) {
      MixedIndex z = x;
      ++z.alpha[i];
      next.push_back(std::move(z));
    }
    for (int j = 1; j <= nvars; ++j) next.push_back(MixedIndex{x.alpha, x.beta.incremented(j)});
    for (auto& z : next) {
      if (set.size() > 100 * kMaxUniverse) {
        throw ConfigError("universe is far larger than the brute-force cap");
      }
      if (set.insert(z)) stack.push_back(std::move(z));
    }
  }
  return set;
}

BruteForceResult build_set_bruteforce(const IndexSet& universe, Estimator& estimator,
                                      SelectionCriterion criterion, const WorkModel* work,
                                      const ErrorModel* error) {
  if (universe.size() > kMaxUniverse) {
    throw ConfigError("universe has " + std::to_string(universe.size()) +
                      " members; the brute-force cap is " + std::to_string(kMaxUniverse));
  }
  if (universe.empty() || !universe.is_downward_closed()) {
    throw ConfigError("universe must be a nonempty downward-closed set");
  }
  const int D = universe.spatial_dims();
  const MixedIndex root = root_index(D);
  const bool budget_mode = criterion.kind == SelectionCriterion::Kind::budget;
  if (budget_mode && static_cast<double>(work_of(root)) > criterion.value) {
    throw ConfigError("budget smaller than the root index's work (" +
                      std::to_string(work_of(root)) + ")");
  }

  std::vector<MixedIndex> grids;
  for (const auto& m : universe) {
    alternating_sum(m.alpha, [&](const std::vector<int>& a) {
      grids.push_back(MixedIndex{a, m.beta});
      return 0.0;
    });
  }
  estimator.prefetch(grids);

  BruteForceResult res;
  for (const auto& m : universe) {
    ProfitEntry e;
    e.index = m;
    e.dE = std::fabs(estimator.mixed_difference(m));
    e.dW = static_cast<double>(work_of(m));
    e.profit = e.dE / e.dW;
    res.actual.push_back(e);
    if (work && error) res.modeled.push_back(entry_for(m, *work, *error));
  }

  std::vector<double> levels;
  for (const auto& e : res.actual) levels.push_back(e.profit);
  std::sort(levels.begin(), levels.end(), std::greater<>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  auto select = [&](double eps) {
    IndexSet s(D);
    s.insert(root);
    for (const auto& e : res.actual) {
      if (e.profit >= eps) s.insert(e.index);
    }
    s.close();
    return s;
  };

  SetBuildResult& sel = res.selection;
  if (budget_mode) {
    sel.set = select(std::numeric_limits<double>::infinity());
    sel.epsilon = std::numeric_limits<double>::infinity();
    for (double eps : levels) {
      IndexSet s = select(eps);
      if (static_cast<double>(total_work(s)) > criterion.value) break;
      sel.set = std::move(s);
      sel.epsilon = eps;
    }
  } else {
    sel.set = select(criterion.value);
    sel.epsilon = criterion.value;
  }
  for (const auto& e : res.actual) {
    if (!sel.set.contains(e.index)) continue;
    ProfitEntry copy = e;
    copy.closure_added = e.profit < sel.epsilon && !(e.index == root);
    sel.entries.push_back(copy);
  }
  sel.work = total_work(sel.set);
  return res;
}

ErrorModel fit_rates(const std::vector<RateSample>& samples, double r_fem) {
  if (samples.empty()) throw NumericalError("no samples to fit");
  if (!(r_fem > 0.0)) throw ConfigError("r_fem must be positive");
  int J = 0;
  for (const auto& s : samples) {
    if (!(s.value > 0.0) || !std::isfinite(s.value)) {
      throw NumericalError("rate samples must be positive and finite");
    }
    J = std::max(J, s.index.beta.last_active());
  }
  const auto rows = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, J + 1);
  Eigen::VectorXd b(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& s = samples[static_cast<std::size_t>(r)];
    A(r, 0) = 1.0;
    for (const auto& [j, level] : s.index.beta.entries()) {
      A(r, j) = -static_cast<double>(level_to_nodes(level - 1));
    }
    int a = 0;
    for (int v : s.index.alpha) a += v;
    b(r) = std::log(s.value) + a * r_fem * std::numbers::ln2;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  const auto rank = qr.rank();
  if (rank < A.cols()) {
    // A direction is unidentifiable when dropping its column keeps the rank.
    std::string bad;
    for (int j = 1; j <= J; ++j) {
      Eigen::MatrixXd reduced(rows, J);
      reduced << A.leftCols(j), A.rightCols(J - j);
      if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(reduced).rank() == rank) {
        bad += (bad.empty() ? "" : ", ") + std::to_string(j);
      }
    }
    if (bad.empty()) bad = "intercept";
    throw NumericalError("rank-deficient rate fit; unidentifiable directions: " + bad);
  }
  const Eigen::VectorXd x = qr.solve(b);
  ErrorModel m;
  m.r_fem = r_fem;
  m.C_E = std::exp(x(0));
  for (int j = 1; j <= J; ++j) m.g_tilde.push_back(x(j));
  m.residual = (A * x - b).norm();
  return m;
}

std::vector<MixedIndex> pilot_design(int D, int nvars, int depth) {
  if (depth < 2) throw ConfigError("pilot depth must be at least 2");
  if (nvars < 0) throw ConfigError("number of fitted variables must be nonnegative");
  std::vector<MixedIndex> out;
  const MixedIndex root = root_index(D);
  for (int j = 1; j <= nvars; ++j) {
    for (int k = 1; k <= depth; ++k) {
      MixedIndex x = root;
      x.beta.set(j, 1 + k);
      out.push_back(std::move(x));
    }
  }
  for (int k = 1; k <= depth; ++k) {
    MixedIndex x = root;
    for (auto& a : x.alpha) a += k;
    out.push_back(x);
    if (nvars >= 1) {
      x.beta.set(1, 1 + k);
      out.push_back(std::move(x));
    }
  }
  return out;
}

std::vector<RateSample> pilot_samples(Estimator& estimator, int nvars, int depth,
                                      double noise_floor) {
  const int D = estimator.problem().spatial_dims;
  const auto design = pilot_design(D, nvars, depth);
  std::vector<MixedIndex> grids;
  for (const auto& m : design) {
    alternating_sum(m.alpha, [&](const std::vector<int>& a) {
      grids.push_back(MixedIndex{a, m.beta});
      return 0.0;
    });
  }
  estimator.prefetch(grids);

  std::vector<RateSample> all;
  std::set<int> covered;
  auto measure = [&](const MixedIndex& m) {
    const double v = std::fabs(estimator.mixed_difference(m));
    if (!(v > noise_floor)) return false;
    all.push_back(RateSample{m, v});
    for (const auto& [j, level] : m.beta.entries()) covered.insert(j);
    return true;
  };
  for (const auto& m : design) measure(m);

  // A mode can vanish on the coarsest mesh (e.g. cos(k pi x) at every face
  // midpoint when k h is an even integer); sweep it again on finer meshes.
  for (int j = 1; j <= nvars; ++j) {
    for (int shift = 1; shift < depth && !covered.count(j); ++shift) {
      for (int k = 1; k <= depth; ++k) {
        MixedIndex x = root_index(D);
        for (auto& a : x.alpha) a += shift;
        x.beta.set(j, 1 + k);
        measure(x);
      }
    }
  }

  int keep = 0;
  while (keep < nvars && covered.count(keep + 1)) ++keep;
  std::vector<RateSample> out;
  for (auto& s : all) {
    if (s.index.beta.last_active() <= keep) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace misc
