#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace misc {

/// Largest quadrature level accepted anywhere; m(30) is about 5e8 nodes.
inline constexpr int kMaxQuadLevel = 30;

/// Number of nested Clenshaw-Curtis nodes at level beta:
/// m(0) = 0, m(1) = 1, m(beta) = 2^(beta-1) + 1.
std::int64_t level_to_nodes(int beta);

/// Univariate rule on [-1, 1] for the probability measure dy/2.
struct QuadRule {
  std::vector<double> points;   // strictly decreasing
  std::vector<double> weights;  // sum to one
};

std::vector<double> cc_points(int beta);
std::vector<double> cc_weights(int beta);

/// Cached rule for a level; references stay valid for the process lifetime.
const QuadRule& cc_rule(int beta);

/// Nested-difference Lebesgue constant: sum of |w_beta - w_{beta-1}| over the
/// shared nodes plus |w_beta| over the nodes born at beta. Equals 1 at beta = 1.
double leb_delta(int beta);

/// Identity of a nested node independent of the level it is viewed from:
/// the level where it first appears and its index in that level's rule.
struct PointId {
  int level = 1;
  std::int64_t index = 0;

  friend bool operator==(const PointId&, const PointId&) = default;
  friend auto operator<=>(const PointId&, const PointId&) = default;

  bool is_center() const { return level == 1; }
};

PointId point_id(int beta, std::int64_t index);
double point_coordinate(PointId id);

/// Indices of the nodes of level beta that are not nodes of level beta - 1.
std::vector<std::int64_t> new_point_indices(int beta);

/// Sparse map j -> beta_j over stochastic directions j >= 1. Missing entries
/// are level 1; only levels >= 2 are stored, sorted by j.
class SparseLevelVector {
 public:
  SparseLevelVector() = default;
  SparseLevelVector(std::initializer_list<std::pair<int, int>> entries);

  int operator[](int j) const;
  void set(int j, int level);

  std::span<const std::pair<int, int>> entries() const { return entries_; }
  std::vector<int> support() const;
  bool empty() const { return entries_.empty(); }
  std::size_t active_count() const { return entries_.size(); }
  int max_level() const;
  int last_active() const;  // 0 when empty
  /// sum_j (beta_j - 1)
  int excess() const;

  SparseLevelVector incremented(int j) const;
  SparseLevelVector decremented(int j) const;

  friend bool operator==(const SparseLevelVector&, const SparseLevelVector&) = default;
  friend auto operator<=>(const SparseLevelVector&, const SparseLevelVector&) = default;

 private:
  std::vector<std::pair<int, int>> entries_;
};

/// A point of the parameter space with finitely many non-zero coordinates,
/// sorted by direction; absent directions sit at y_j = 0.
using SparsePoint = std::vector<std::pair<int, double>>;

/// Tensor quadrature over the grid prod_{j in support} P^{m(beta_j)}.
/// Summation order is fixed (lexicographic over the support), so results are
/// reproducible bit for bit.
double tensor_quadrature(const SparseLevelVector& beta,
                         const std::function<double(const SparsePoint&)>& f);

/// Number of grid points of the full tensor rule.
std::int64_t tensor_point_count(const SparseLevelVector& beta);

/// prod_j (m(beta_j) - m(beta_j - 1)): nodes contributed by the difference.
std::int64_t new_point_count(const SparseLevelVector& beta);

}  // namespace misc
