#include "misc/random_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "misc/errors.hpp"

namespace misc {

namespace {

constexpr std::size_t kMaxEnumeratedModes = 5'000'000;

int l1(const std::vector<int>& k) { return std::accumulate(k.begin(), k.end(), 0); }

double amplitude(int sum, int nonzeros, int d, double nu) {
  return std::sqrt(3.0) * std::pow(2.0, 0.5 * nonzeros) *
         std::pow(1.0 + static_cast<double>(sum) * sum, -(nu + 0.5 * d) / 2.0);
}

// Appends every surviving (k, ell) with |k| <= kmax.
void enumerate(int d, double nu, int kmax, std::vector<Mode>& out) {
  std::vector<int> k(static_cast<std::size_t>(d), 0);
  auto emit = [&] {
    const int nz = static_cast<int>(std::count_if(k.begin(), k.end(), [](int v) { return v > 0; }));
    const double amp = amplitude(l1(k), nz, d, nu);
    for (int bits = 0; bits < (1 << d); ++bits) {
      std::vector<int> ell(static_cast<std::size_t>(d));
      bool degenerate = false;
      for (int i = 0; i < d; ++i) {
        ell[static_cast<std::size_t>(i)] = (bits >> (d - 1 - i)) & 1;
        if (k[static_cast<std::size_t>(i)] == 0 && ell[static_cast<std::size_t>(i)] == 0) {
          degenerate = true;
        }
      }
      if (!degenerate) out.push_back(Mode{k, ell, amp});
    }
    if (out.size() > kMaxEnumeratedModes) {
      throw ConfigError("mode enumeration exceeded " + std::to_string(kMaxEnumeratedModes) +
                        " candidates");
    }
  };
  // Odometer over compositions with total <= kmax.
  while (true) {
    emit();
    int i = d - 1;
    while (i >= 0) {
      ++k[static_cast<std::size_t>(i)];
      if (l1(k) <= kmax) break;
      k[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) return;
  }
}

bool mode_before(const Mode& a, const Mode& b) {
  if (a.amplitude != b.amplitude) return a.amplitude > b.amplitude;
  const int sa = l1(a.k), sb = l1(b.k);
  if (sa != sb) return sa < sb;
  if (a.k != b.k) return a.k < b.k;
  return a.ell < b.ell;
}

}  // namespace

double coefficient_A(const std::vector<int>& k, double nu) {
  if (!(nu > 0.0)) throw ConfigError("nu must be positive");
  int nz = 0;
  for (int v : k) {
    if (v < 0) throw std::invalid_argument("frequencies must be nonnegative");
    if (v > 0) ++nz;
  }
  return amplitude(l1(k), nz, static_cast<int>(k.size()), nu);
}

std::vector<Mode> mode_ordering(const FieldSpec& spec) {
  if (spec.d < 1) throw ConfigError("problem.d must be at least 1");
  if (!(spec.nu > 0.0)) throw ConfigError("problem.nu must be positive");
  if (spec.max_modes < 1) throw ConfigError("the number of modes must be at least 1");
  const auto J = static_cast<std::size_t>(spec.max_modes);

  for (int kmax = 1;; kmax *= 2) {
    if (kmax > kMaxFrequencySum) {
      throw ConfigError("cannot enumerate " + std::to_string(J) +
                        " modes with frequency sum up to " + std::to_string(kMaxFrequencySum));
    }
    std::vector<Mode> modes;
    enumerate(spec.d, spec.nu, kmax, modes);
    if (modes.size() < J) continue;
    std::sort(modes.begin(), modes.end(), mode_before);
    // Any mode with |k| > kmax is bounded by the largest possible amplitude at kmax + 1.
    const double tail = amplitude(kmax + 1, spec.d, spec.d, spec.nu);
    if (modes[J - 1].amplitude < tail) continue;
    modes.resize(J);
    return modes;
  }
}

double mode_factor(const Mode& mode, int axis, double x) {
  const auto i = static_cast<std::size_t>(axis);
  const double arg = std::numbers::pi * mode.k[i] * x;
  return mode.ell[i] ? std::cos(arg) : std::sin(arg);
}

RandomField::RandomField(FieldSpec spec) : spec_(spec), modes_(mode_ordering(spec)) {}

double RandomField::psi(int j, const double* x) const {
  const Mode& m = modes_.at(static_cast<std::size_t>(j - 1));
  double v = m.amplitude;
  for (int i = 0; i < spec_.d; ++i) v *= mode_factor(m, i, x[i]);
  return v;
}

void RandomField::check_point(const SparsePoint& y) const {
  for (const auto& [j, v] : y) {
    if (j < 1 || j > size()) {
      throw ConfigError("parameter direction " + std::to_string(j) + " outside the " +
                        std::to_string(size()) + " enumerated modes");
    }
  }
}

double RandomField::kappa(const double* x, const SparsePoint& y) const {
  check_point(y);
  double sum = 0.0;
  for (const auto& [j, v] : y) sum += v * psi(j, x);
  return sum;
}

double RandomField::a(const double* x, const SparsePoint& y) const { return std::exp(kappa(x, y)); }

std::vector<double> b_sequence(int s, const std::vector<Mode>& modes) {
  if (s < 0) throw std::invalid_argument("derivative order must be nonnegative");
  std::vector<double> b;
  b.reserve(modes.size());
  for (const auto& m : modes) {
    const int kmax = *std::max_element(m.k.begin(), m.k.end());
    // pi * k_i >= pi > 1 for any nonzero frequency, so the top-order
    // derivative along the fastest axis dominates.
    const double growth = kmax == 0 ? 1.0 : std::pow(std::numbers::pi * kmax, s);
    b.push_back(m.amplitude * growth);
  }
  return b;
}

SummabilityVariant parse_variant(const std::string& name) {
  if (name == "theory") return SummabilityVariant::theory;
  if (name == "square") return SummabilityVariant::square;
  if (name == "improved") return SummabilityVariant::improved;
  throw ConfigError("unknown variant '" + name + "' (expected theory, square or improved)");
}

std::string to_string(SummabilityVariant v) {
  switch (v) {
    case SummabilityVariant::theory: return "theory";
    case SummabilityVariant::square: return "square";
    case SummabilityVariant::improved: return "improved";
  }
  return "unknown";
}

double p_bound(double s, int d, double nu, SummabilityVariant variant) {
  if (d < 1) throw ConfigError("spatial dimension must be at least 1");
  const double denom = variant == SummabilityVariant::theory
                           ? nu / d + 0.5 - s / d
                           : 2.0 * nu / d + 1.0 - 2.0 * s / d;
  if (!(denom > 0.0)) throw ConfigError("no summability at this s");
  const double p = 1.0 / denom;
  const double ceiling = variant == SummabilityVariant::improved ? 1.0 : 0.5;
  if (p >= ceiling) {
    throw ConfigError("no summability at this s: p_s = " + std::to_string(p) + " reaches " +
                      std::to_string(ceiling));
  }
  return p;
}

double s_sup(int d, double nu, SummabilityVariant variant) {
  switch (variant) {
    case SummabilityVariant::theory: return nu - 1.5 * d;
    case SummabilityVariant::square: return nu - 0.5 * d;
    case SummabilityVariant::improved: return nu;
  }
  return 0.0;
}

}  // namespace misc
