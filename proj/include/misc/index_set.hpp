#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "misc/quadrature.hpp"

namespace misc {

/// (alpha, beta): dense spatial levels and sparse quadrature levels.
struct MixedIndex {
  std::vector<int> alpha;
  SparseLevelVector beta;

  /// |alpha| + |beta - 1|
  int order() const;
  /// Every index obtained by lowering one component that is >= 2.
  std::vector<MixedIndex> backward_neighbors() const;

  friend bool operator==(const MixedIndex&, const MixedIndex&) = default;
  friend auto operator<=>(const MixedIndex&, const MixedIndex&) = default;
};

/// The all-ones index for D spatial dimensions.
MixedIndex root_index(int D);

std::string to_string(const MixedIndex& idx);

class IndexSet {
 public:
  IndexSet() = default;
  explicit IndexSet(int spatial_dims) : D_(spatial_dims) {}

  int spatial_dims() const { return D_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(const MixedIndex& idx) const { return members_.count(idx) > 0; }
  /// Returns true when the index was not already present.
  bool insert(const MixedIndex& idx);

  const std::set<MixedIndex>& members() const { return members_; }
  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

  bool is_downward_closed() const;
  /// Adds all backward neighbors transitively; returns the indices added.
  std::vector<MixedIndex> close();

  /// Largest spatial level, largest quadrature level, largest active
  /// direction and largest number of simultaneously active directions.
  int max_alpha() const;
  int max_beta() const;
  int last_var() const;
  int joint_vars() const;

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  int D_ = 1;
  std::set<MixedIndex> members_;
};

/// c_{alpha,beta} = sum over binary offsets e with [alpha, beta] + e in the set
/// of (-1)^|e|. Throws ConfigError if the set is not downward closed.
std::map<MixedIndex, int> combination_coefficients(const IndexSet& set);

/// Work of the estimator: sum over members of N(alpha) * new nodes at beta.
std::int64_t total_work(const IndexSet& set);
std::int64_t work_of(const MixedIndex& idx);

}  // namespace misc
