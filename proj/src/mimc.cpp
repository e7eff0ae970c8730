#include "misc/mimc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "misc/errors.hpp"

namespace misc {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t level_seed(std::uint64_t seed, const std::vector<int>& alpha) {
  std::uint64_t h = splitmix(seed);
  for (int a : alpha) h = splitmix(h ^ static_cast<std::uint64_t>(a));
  return h;
}

double spatial_difference(const Problem& problem, const std::vector<int>& alpha,
                          const SparsePoint& y) {
  return alternating_sum(alpha, [&](const std::vector<int>& a) { return problem.eval(a, y); });
}

}  // namespace

std::vector<std::vector<int>> mimc_levels(int D, int levels) {
  if (D < 1) throw ConfigError("at least one spatial dimension is required");
  if (levels < 1) throw ConfigError("mimc.levels must be at least 1");
  std::vector<std::vector<int>> out;
  std::vector<int> alpha(static_cast<std::size_t>(D), 1);
  // Odometer over alpha in [1, levels]^D, keeping the total-degree ones.
  while (true) {
    int excess = 0;
    for (int a : alpha) excess += a - 1;
    if (excess < levels) out.push_back(alpha);
    int i = D - 1;
    while (i >= 0) {
      if (++alpha[static_cast<std::size_t>(i)] <= levels) break;
      alpha[static_cast<std::size_t>(i)] = 1;
      --i;
    }
    if (i < 0) break;
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    int sa = 0, sb = 0;
    for (int v : a) sa += v;
    for (int v : b) sb += v;
    return sa != sb ? sa < sb : a < b;
  });
  return out;
}

std::int64_t mimc_sample_cost(const Problem& problem, const std::vector<int>& alpha) {
  std::int64_t w = 0;
  alternating_sum(alpha, [&](const std::vector<int>& a) {
    w += problem.cost(a);
    return 0.0;
  });
  return w;
}

MimcResult mimc_estimate(const Problem& problem, const MimcSetup& setup,
                         const std::vector<std::int64_t>& samples, std::uint64_t seed,
                         int threads) {
  if (setup.variables < 0 || setup.variables > problem.max_variable) {
    throw ConfigError("mimc.variables must lie in 0.." + std::to_string(problem.max_variable));
  }
  MimcResult res;
  res.levels = mimc_levels(problem.spatial_dims, setup.levels);
  if (samples.size() != res.levels.size()) {
    throw ConfigError("expected " + std::to_string(res.levels.size()) + " sample counts");
  }
  res.samples = samples;

  for (std::size_t l = 0; l < res.levels.size(); ++l) {
    const auto& alpha = res.levels[l];
    const std::int64_t M = samples[l];
    if (M < 1) throw ConfigError("every level needs at least one sample");
    const std::int64_t cost = mimc_sample_cost(problem, alpha);

    if (setup.variables == 0) {
      res.means.push_back(spatial_difference(problem, alpha, {}));
      res.variances.push_back(0.0);
      res.work += cost;
      res.samples[l] = 1;
      continue;
    }

    // Draw all parameters up front so the result does not depend on threading.
    std::mt19937_64 rng(level_seed(seed, alpha));
    std::vector<SparsePoint> ys(static_cast<std::size_t>(M));
    for (auto& y : ys) {
      for (int j = 1; j <= setup.variables; ++j) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        y.emplace_back(j, 2.0 * u - 1.0);
      }
    }
    std::vector<double> values(ys.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      while (true) {
        const std::size_t k = next++;
        if (k >= ys.size()) return;
        try {
          values[k] = spatial_difference(problem, alpha, ys[k]);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = ys.size();
          return;
        }
      }
    };
    const auto nthreads = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), ys.size());
    if (nthreads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(M);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var = M > 1 ? var / static_cast<double>(M - 1) : 0.0;
    res.means.push_back(mean);
    res.variances.push_back(var);
    res.work += cost * M;
  }
  for (std::size_t l = 0; l < res.levels.size(); ++l) {
    res.value += res.means[l];
    res.variance += res.variances[l] / static_cast<double>(res.samples[l]);
  }
  return res;
}

std::vector<std::int64_t> mimc_allocation(const Problem& problem, const MimcSetup& setup,
                                          double budget, std::int64_t pilot, std::uint64_t seed,
                                          int threads) {
  const auto levels = mimc_levels(problem.spatial_dims, setup.levels);
  if (setup.variables == 0) return std::vector<std::int64_t>(levels.size(), 1);
  if (pilot < 2) throw ConfigError("mimc.pilot_samples must be at least 2");
  const auto trial = mimc_estimate(problem, setup, std::vector<std::int64_t>(levels.size(), pilot),
                                   splitmix(seed ^ 0x5eedULL), threads);
  double total = 0.0;
  std::vector<double> cost(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    cost[l] = static_cast<double>(mimc_sample_cost(problem, levels[l]));
    total += std::sqrt(trial.variances[l] * cost[l]);
  }
  std::vector<std::int64_t> counts(levels.size(), 1);
  if (total <= 0.0) return counts;
  const double lambda = budget / total;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const double m = lambda * std::sqrt(trial.variances[l] / cost[l]);
    counts[l] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(m)));
  }
  return counts;
}

}  // namespace misc
