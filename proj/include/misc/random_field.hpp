#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "misc/quadrature.hpp"

namespace misc {

/// Log-uniform coefficient a = exp(kappa) with kappa = sum_j y_j psi_j(x),
/// psi_j = A_k * prod_i cos(pi k_i x_i)^l_i sin(pi k_i x_i)^(1 - l_i).
struct FieldSpec {
  int d = 1;
  double nu = 2.5;
  int max_modes = 128;
};

struct Mode {
  std::vector<int> k;
  std::vector<int> ell;
  double amplitude = 0.0;
};

/// sqrt(3) * 2^(|k|_0 / 2) * (1 + |k|^2)^(-(nu + d/2) / 2), |k| = sum k_i.
double coefficient_A(const std::vector<int>& k, double nu);

/// The first J modes in descending amplitude; ties by ascending |k|, then
/// lexicographic k, then lexicographic ell. Throws ConfigError if J would
/// need frequencies past the enumeration cap.
std::vector<Mode> mode_ordering(const FieldSpec& spec);

/// Largest |k| the enumeration will consider before giving up.
inline constexpr int kMaxFrequencySum = 4096;

/// Value of prod_i cos(pi k_i x_i)^l_i sin(pi k_i x_i)^(1 - l_i) along one axis.
double mode_factor(const Mode& mode, int axis, double x);

class RandomField {
 public:
  explicit RandomField(FieldSpec spec);

  const FieldSpec& spec() const { return spec_; }
  const std::vector<Mode>& modes() const { return modes_; }
  int dim() const { return spec_.d; }
  int size() const { return static_cast<int>(modes_.size()); }

  /// psi_j(x), j is 1-based.
  double psi(int j, const double* x) const;
  double kappa(const double* x, const SparsePoint& y) const;
  double a(const double* x, const SparsePoint& y) const;

  /// Throws if y activates a direction outside 1..size().
  void check_point(const SparsePoint& y) const;

 private:
  FieldSpec spec_;
  std::vector<Mode> modes_;
};

/// b_{s,j} = A_k * max_{|sigma| <= s} prod_i (pi k_i)^sigma_i for j = 1..J.
std::vector<double> b_sequence(int s, const std::vector<Mode>& modes);

enum class SummabilityVariant { theory, square, improved };

SummabilityVariant parse_variant(const std::string& name);
std::string to_string(SummabilityVariant v);

/// Infimal summability exponent p_s. theory: 1 / (nu/d + 1/2 - s/d);
/// square and improved: 1 / (2 nu/d + 1 - 2 s/d). Throws ConfigError when the
/// denominator is not positive or p_s reaches the variant's ceiling
/// (1/2, or 1 for improved).
double p_bound(double s, int d, double nu, SummabilityVariant variant);

/// Supremum of admissible s for the variant (exclusive).
double s_sup(int d, double nu, SummabilityVariant variant);

}  // namespace misc
