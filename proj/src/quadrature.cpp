#include "misc/quadrature.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "misc/errors.hpp"

namespace misc {

namespace {

void check_level(int beta, int lowest) {
  if (beta < lowest) {
    throw std::invalid_argument("quadrature level " + std::to_string(beta) +
                                " below " + std::to_string(lowest));
  }
  if (beta > kMaxQuadLevel) {
    throw std::invalid_argument("quadrature level " + std::to_string(beta) +
                                " exceeds the cap of " + std::to_string(kMaxQuadLevel));
  }
}

double moment(int k) { return (k % 2 == 0) ? 1.0 / (k + 1) : 0.0; }

// Solves sum_i w_i p_i^k = moment(k), k < m, by Gaussian elimination with
// partial pivoting. Only used for m <= 5, where the system is benign.
std::vector<double> moment_weights(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<long double> a(m * (m + 1));
  auto at = [&](std::size_t r, std::size_t c) -> long double& { return a[r * (m + 1) + c]; };
  for (std::size_t k = 0; k < m; ++k) {
    long double pw = 1.0L;
    for (std::size_t i = 0; i < m; ++i) {
      pw = 1.0L;
      for (std::size_t e = 0; e < k; ++e) pw *= p[i];
      at(k, i) = pw;
    }
    at(k, m) = moment(static_cast<int>(k));
  }
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r) {
      if (std::fabs(at(r, c)) > std::fabs(at(piv, c))) piv = r;
    }
    for (std::size_t k = 0; k <= m; ++k) std::swap(at(c, k), at(piv, k));
    for (std::size_t r = 0; r < m; ++r) {
      if (r == c) continue;
      const long double f = at(r, c) / at(c, c);
      for (std::size_t k = c; k <= m; ++k) at(r, k) -= f * at(c, k);
    }
  }
  std::vector<double> w(m);
  for (std::size_t i = 0; i < m; ++i) w[i] = static_cast<double>(at(i, m) / at(i, i));
  return w;
}

// Closed-form Clenshaw-Curtis weights on n + 1 nodes (n even), normalized to
// the probability measure: w_j = c_j / (2n) (1 - sum_k b_k cos(2 k theta_j) / (4k^2 - 1)).
std::vector<double> cosine_weights(std::int64_t n) {
  const std::int64_t half = n / 2;
  std::vector<double> w(static_cast<std::size_t>(n + 1));
  if (n <= 2048) {
    for (std::int64_t j = 0; j <= half; ++j) {
      long double s = 1.0L;
      for (std::int64_t k = 1; k <= half; ++k) {
        const long double b = (2 * k == n) ? 1.0L : 2.0L;
        const long double angle =
            std::numbers::pi_v<long double> * static_cast<long double>((2 * k * j) % (2 * n)) /
            static_cast<long double>(n);
        s -= b * std::cos(angle) / static_cast<long double>(4 * k * k - 1);
      }
      const long double c = (j == 0 || j == n) ? 1.0L : 2.0L;
      w[static_cast<std::size_t>(j)] = static_cast<double>(c * s / (2.0L * n));
    }
  } else {
    // Same sum as a type-I DCT over even-indexed coefficients.
    std::vector<double> x(static_cast<std::size_t>(n + 1), 0.0), y(x.size());
    x[0] = 1.0;
    for (std::int64_t k = 1; k < half; ++k) {
      x[static_cast<std::size_t>(2 * k)] = -1.0 / static_cast<double>(4 * k * k - 1);
    }
    x[static_cast<std::size_t>(n)] = -1.0 / (static_cast<double>(n) * n - 1.0);
    static std::mutex plan_mutex;
    fftw_plan plan;
    {
      std::lock_guard lock(plan_mutex);
      plan = fftw_plan_r2r_1d(static_cast<int>(n + 1), x.data(), y.data(), FFTW_REDFT00,
                              FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
      std::lock_guard lock(plan_mutex);
      fftw_destroy_plan(plan);
    }
    for (std::int64_t j = 0; j <= half; ++j) {
      const double c = (j == 0 || j == n) ? 1.0 : 2.0;
      w[static_cast<std::size_t>(j)] = c * y[static_cast<std::size_t>(j)] / (2.0 * n);
    }
  }
  for (std::int64_t j = half + 1; j <= n; ++j) {
    w[static_cast<std::size_t>(j)] = w[static_cast<std::size_t>(n - j)];
  }
  return w;
}

}  // namespace

std::int64_t level_to_nodes(int beta) {
  check_level(beta, 0);
  if (beta == 0) return 0;
  if (beta == 1) return 1;
  return (std::int64_t{1} << (beta - 1)) + 1;
}

std::vector<double> cc_points(int beta) {
  check_level(beta, 1);
  if (beta == 1) return {0.0};
  const std::int64_t n = level_to_nodes(beta) - 1;
  std::vector<double> p(static_cast<std::size_t>(n + 1));
  const std::int64_t half = n / 2;
  for (std::int64_t i = 0; i < half; ++i) {
    p[static_cast<std::size_t>(i)] =
        std::cos(static_cast<double>(i) * std::numbers::pi / static_cast<double>(n));
  }
  p[static_cast<std::size_t>(half)] = 0.0;
  for (std::int64_t i = half + 1; i <= n; ++i) {
    p[static_cast<std::size_t>(i)] = -p[static_cast<std::size_t>(n - i)];
  }
  return p;
}

std::vector<double> cc_weights(int beta) {
  check_level(beta, 1);
  if (beta == 1) return {1.0};
  const std::int64_t m = level_to_nodes(beta);
  if (m < 9) return moment_weights(cc_points(beta));
  return cosine_weights(m - 1);
}

const QuadRule& cc_rule(int beta) {
  check_level(beta, 1);
  static std::array<std::once_flag, kMaxQuadLevel + 1> flags;
  static std::array<std::unique_ptr<QuadRule>, kMaxQuadLevel + 1> rules;
  std::call_once(flags[static_cast<std::size_t>(beta)], [beta] {
    rules[static_cast<std::size_t>(beta)] =
        std::make_unique<QuadRule>(QuadRule{cc_points(beta), cc_weights(beta)});
  });
  return *rules[static_cast<std::size_t>(beta)];
}

double leb_delta(int beta) {
  check_level(beta, 1);
  if (beta == 1) return 1.0;
  const auto& fine = cc_rule(beta).weights;
  const auto& coarse = cc_rule(beta - 1).weights;
  double total = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    bool shared = false;
    std::size_t ci = 0;
    if (beta == 2) {
      shared = (i == 1);
    } else if (i % 2 == 0) {
      shared = true;
      ci = i / 2;
    }
    total += shared ? std::fabs(fine[i] - coarse[ci]) : std::fabs(fine[i]);
  }
  return total;
}

PointId point_id(int beta, std::int64_t index) {
  check_level(beta, 1);
  if (index < 0 || index >= level_to_nodes(beta)) {
    throw std::out_of_range("node index outside rule of level " + std::to_string(beta));
  }
  if (beta == 1) return {1, 0};
  while (beta >= 3 && index % 2 == 0) {
    index /= 2;
    --beta;
  }
  if (beta == 2 && index == 1) return {1, 0};
  return {beta, index};
}

double point_coordinate(PointId id) {
  return cc_rule(id.level).points[static_cast<std::size_t>(id.index)];
}

std::vector<std::int64_t> new_point_indices(int beta) {
  check_level(beta, 1);
  if (beta == 1) return {0};
  if (beta == 2) return {0, 2};
  std::vector<std::int64_t> idx;
  const std::int64_t m = level_to_nodes(beta);
  for (std::int64_t i = 1; i < m; i += 2) idx.push_back(i);
  return idx;
}

SparseLevelVector::SparseLevelVector(std::initializer_list<std::pair<int, int>> entries) {
  for (const auto& [j, level] : entries) set(j, level);
}

int SparseLevelVector::operator[](int j) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), j,
                             [](const auto& e, int key) { return e.first < key; });
  return (it != entries_.end() && it->first == j) ? it->second : 1;
}

void SparseLevelVector::set(int j, int level) {
  if (j < 1) throw std::invalid_argument("stochastic directions start at 1");
  check_level(level, 1);
  auto it = std::lower_bound(entries_.begin(), entries_.end(), j,
                             [](const auto& e, int key) { return e.first < key; });
  const bool present = it != entries_.end() && it->first == j;
  if (level == 1) {
    if (present) entries_.erase(it);
  } else if (present) {
    it->second = level;
  } else {
    entries_.insert(it, {j, level});
  }
}

std::vector<int> SparseLevelVector::support() const {
  std::vector<int> s;
  s.reserve(entries_.size());
  for (const auto& e : entries_) s.push_back(e.first);
  return s;
}

int SparseLevelVector::max_level() const {
  int mx = 1;
  for (const auto& e : entries_) mx = std::max(mx, e.second);
  return mx;
}

int SparseLevelVector::last_active() const { return entries_.empty() ? 0 : entries_.back().first; }

int SparseLevelVector::excess() const {
  int s = 0;
  for (const auto& e : entries_) s += e.second - 1;
  return s;
}

SparseLevelVector SparseLevelVector::incremented(int j) const {
  SparseLevelVector out = *this;
  out.set(j, (*this)[j] + 1);
  return out;
}

SparseLevelVector SparseLevelVector::decremented(int j) const {
  const int level = (*this)[j];
  if (level <= 1) throw std::invalid_argument("cannot decrement a level-1 direction");
  SparseLevelVector out = *this;
  out.set(j, level - 1);
  return out;
}

std::int64_t tensor_point_count(const SparseLevelVector& beta) {
  std::int64_t n = 1;
  for (const auto& [j, level] : beta.entries()) n *= level_to_nodes(level);
  return n;
}

std::int64_t new_point_count(const SparseLevelVector& beta) {
  std::int64_t n = 1;
  for (const auto& [j, level] : beta.entries()) {
    n *= level_to_nodes(level) - level_to_nodes(level - 1);
  }
  return n;
}

double tensor_quadrature(const SparseLevelVector& beta,
                         const std::function<double(const SparsePoint&)>& f) {
  const auto entries = beta.entries();
  const std::size_t dims = entries.size();
  if (dims == 0) return f(SparsePoint{});

  std::vector<const QuadRule*> rules(dims);
  for (std::size_t k = 0; k < dims; ++k) rules[k] = &cc_rule(entries[k].second);

  std::vector<std::size_t> idx(dims, 0);
  SparsePoint y;
  y.reserve(dims);
  double sum = 0.0;
  while (true) {
    y.clear();
    double w = 1.0;
    for (std::size_t k = 0; k < dims; ++k) {
      const double coord = rules[k]->points[idx[k]];
      w *= rules[k]->weights[idx[k]];
      if (coord != 0.0) y.emplace_back(entries[k].first, coord);
    }
    sum += w * f(y);

    std::size_t k = dims;
    while (k > 0) {
      --k;
      if (++idx[k] < rules[k]->points.size()) break;
      idx[k] = 0;
      if (k == 0) return sum;
    }
  }
}

}  // namespace misc
