#pragma once

#include <cstdint>
#include <vector>

#include "misc/estimator.hpp"

namespace misc {

/// Multi-index Monte Carlo comparator: total-degree spatial hierarchy with
/// |alpha - 1| < levels and uniform sampling of y_1..y_variables.
struct MimcSetup {
  int levels = 4;
  int variables = 0;
};

/// Level hierarchy in evaluation order (by |alpha|, then lexicographic).
std::vector<std::vector<int>> mimc_levels(int D, int levels);

/// Unknowns touched by one sample of the spatial difference at alpha.
std::int64_t mimc_sample_cost(const Problem& problem, const std::vector<int>& alpha);

struct MimcResult {
  double value = 0.0;
  double variance = 0.0;  // estimated variance of the estimator
  std::int64_t work = 0;
  std::vector<std::vector<int>> levels;
  std::vector<std::int64_t> samples;
  std::vector<double> means;
  std::vector<double> variances;  // per-sample variance at each level
};

/// Sample mean of the spatial differences with the given counts per level.
/// With zero variables the differences are deterministic and each level
/// contributes its single value exactly.
MimcResult mimc_estimate(const Problem& problem, const MimcSetup& setup,
                         const std::vector<std::int64_t>& samples, std::uint64_t seed,
                         int threads = 1);

/// Counts proportional to sqrt(V / W) per level, scaled to spend roughly
/// `budget` unknowns; V comes from `pilot` samples drawn from a separate stream.
std::vector<std::int64_t> mimc_allocation(const Problem& problem, const MimcSetup& setup,
                                          double budget, std::int64_t pilot, std::uint64_t seed,
                                          int threads = 1);

}  // namespace misc
