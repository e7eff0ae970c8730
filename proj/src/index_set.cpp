#include "misc/index_set.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "misc/errors.hpp"
#include "misc/pde_solver.hpp"

namespace misc {

int MixedIndex::order() const {
  return std::accumulate(alpha.begin(), alpha.end(), 0) + beta.excess();
}

std::vector<MixedIndex> MixedIndex::backward_neighbors() const {
  std::vector<MixedIndex> out;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] >= 2) {
      MixedIndex n = *this;
      --n.alpha[i];
      out.push_back(std::move(n));
    }
  }
  for (const auto& [j, level] : beta.entries()) {
    out.push_back(MixedIndex{alpha, beta.decremented(j)});
  }
  return out;
}

MixedIndex root_index(int D) {
  if (D < 1) throw std::invalid_argument("at least one spatial dimension is required");
  return MixedIndex{std::vector<int>(static_cast<std::size_t>(D), 1), {}};
}

std::string to_string(const MixedIndex& idx) {
  std::ostringstream os;
  os << "([";
  for (std::size_t i = 0; i < idx.alpha.size(); ++i) os << (i ? "," : "") << idx.alpha[i];
  os << "], {";
  bool first = true;
  for (const auto& [j, level] : idx.beta.entries()) {
    os << (first ? "" : ",") << j << ":" << level;
    first = false;
  }
  os << "})";
  return os.str();
}

bool IndexSet::insert(const MixedIndex& idx) {
  if (static_cast<int>(idx.alpha.size()) != D_) {
    throw std::invalid_argument("index " + to_string(idx) + " has the wrong spatial dimension");
  }
  for (int a : idx.alpha) {
    if (a < 1) throw std::invalid_argument("spatial levels start at 1");
  }
  return members_.insert(idx).second;
}

bool IndexSet::is_downward_closed() const {
  for (const auto& m : members_) {
    for (const auto& b : m.backward_neighbors()) {
      if (!contains(b)) return false;
    }
  }
  return true;
}

std::vector<MixedIndex> IndexSet::close() {
  std::vector<MixedIndex> added;
  std::vector<MixedIndex> stack(members_.begin(), members_.end());
  while (!stack.empty()) {
    MixedIndex m = std::move(stack.back());
    stack.pop_back();
    for (auto& b : m.backward_neighbors()) {
      if (members_.insert(b).second) {
        added.push_back(b);
        stack.push_back(std::move(b));
      }
    }
  }
  std::sort(added.begin(), added.end());
  return added;
}

int IndexSet::max_alpha() const {
  int mx = 0;
  for (const auto& m : members_) mx = std::max(mx, *std::max_element(m.alpha.begin(), m.alpha.end()));
  return mx;
}

int IndexSet::max_beta() const {
  int mx = members_.empty() ? 0 : 1;
  for (const auto& m : members_) mx = std::max(mx, m.beta.max_level());
  return mx;
}

int IndexSet::last_var() const {
  int mx = 0;
  for (const auto& m : members_) mx = std::max(mx, m.beta.last_active());
  return mx;
}

int IndexSet::joint_vars() const {
  std::size_t mx = 0;
  for (const auto& m : members_) mx = std::max(mx, m.beta.active_count());
  return static_cast<int>(mx);
}

std::map<MixedIndex, int> combination_coefficients(const IndexSet& set) {
  if (!set.is_downward_closed()) {
    throw ConfigError("combination coefficients need a downward-closed index set");
  }
  std::set<int> dirs;
  for (const auto& m : set) {
    for (const auto& [j, level] : m.beta.entries()) dirs.insert(j);
  }
  std::map<MixedIndex, int> coeff;
  for (const auto& m : set) {
    // Forward directions that stay inside the set; by closure, a multi-step
    // offset can only be a member if each of its single steps is.
    std::vector<int> spatial;
    for (std::size_t i = 0; i < m.alpha.size(); ++i) {
      MixedIndex n = m;
      ++n.alpha[i];
      if (set.contains(n)) spatial.push_back(static_cast<int>(i));
    }
    std::vector<int> stochastic;
    for (int j : dirs) {
      if (set.contains(MixedIndex{m.alpha, m.beta.incremented(j)})) stochastic.push_back(j);
    }
    // Depth-first over offsets in increasing direction order. If n + e_t is
    // not a member, no larger offset containing t is either.
    const std::size_t ns = spatial.size(), nt = stochastic.size();
    auto step = [&](const MixedIndex& n, std::size_t t) {
      MixedIndex out = n;
      if (t < ns) {
        ++out.alpha[static_cast<std::size_t>(spatial[t])];
      } else {
        out.beta = out.beta.incremented(stochastic[t - ns]);
      }
      return out;
    };
    int c = 0;
    auto visit = [&](auto&& self, const MixedIndex& n, std::size_t from, int sign) -> void {
      c += sign;
      for (std::size_t t = from; t < ns + nt; ++t) {
        MixedIndex next = step(n, t);
        if (set.contains(next)) self(self, next, t + 1, -sign);
      }
    };
    visit(visit, m, 0, 1);
    coeff.emplace(m, c);
  }
  return coeff;
}

std::int64_t work_of(const MixedIndex& idx) { return unknowns(idx.alpha) * new_point_count(idx.beta); }

std::int64_t total_work(const IndexSet& set) {
  std::int64_t w = 0;
  for (const auto& m : set) w += work_of(m);
  return w;
}

}  // namespace misc
