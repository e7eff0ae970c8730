#include "misc/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "misc/errors.hpp"
#include "misc/quadrature.hpp"

namespace misc {

double E_delta_residual(double E, double b0_l1_norm, double delta) {
  const double t = std::numbers::pi / E;
  return t - (-b0_l1_norm - std::log(delta) + std::log(std::cos(t)));
}

double solve_E_delta(double b0_l1_norm, double delta) {
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (!(b0_l1_norm >= 0.0)) throw ConfigError("|b0|_1 must be nonnegative");
  // With t = pi/E in (0, pi/2): t - log cos t = R is increasing from 0 to
  // infinity, so a root exists exactly when R > 0.
  const double R = -b0_l1_norm - std::log(delta);
  if (!(R > 0.0)) throw ConfigError("delta too large for ellipse construction");
  double lo = 0.0, hi = std::numbers::pi / 2;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (mid - std::log(std::cos(mid)) < R) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double t = 0.5 * (lo + hi);
  const double E = std::numbers::pi / t;
  if (!(E > 2.0)) throw NumericalError("E_delta root collapsed onto 2");
  return E;
}

EllipseParams ellipse_radii(const std::vector<double>& b, double p, double E_delta) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("summability exponent must lie in (0, 1)");
  if (!(E_delta > 2.0)) throw ConfigError("E_delta must exceed 2");
  if (b.empty()) throw ConfigError("empty b sequence");
  double norm = 0.0;
  for (double v : b) {
    if (!(v > 0.0)) throw ConfigError("b sequence entries must be positive");
    norm += std::pow(v, p);
  }
  EllipseParams out;
  out.E_delta = E_delta;
  for (double v : b) {
    const double tau = std::numbers::pi * std::pow(v, p - 1.0) / (E_delta * norm);
    out.tau.push_back(tau);
    out.rho.push_back(tau + std::sqrt(tau * tau + 1.0));
  }
  return out;
}

double lebesgue_bound(int max_beta) {
  double L = 0.0;
  for (int beta = 1; beta <= max_beta; ++beta) L = std::max(L, leb_delta(beta));
  return L;
}

std::vector<double> g_rates(const std::vector<double>& rho, double L) {
  if (!(L >= 1.0)) throw ConfigError("Lebesgue bound must be at least 1");
  const double cut = 2.0 * std::cbrt(L);
  std::vector<double> g;
  for (double r : rho) {
    if (!(r > 1.0)) throw ConfigError("ellipse radii must exceed 1");
    const double v = r <= cut ? std::log(r) : std::log(r) - std::numbers::ln2 - std::log(L) / 3.0;
    if (!(v > 0.0)) throw NumericalError("non-positive stochastic rate for rho = " + std::to_string(r));
    g.push_back(v);
  }
  return g;
}

double r_det(double s, const std::vector<double>& gamma, const std::vector<double>& d) {
  if (gamma.empty() || gamma.size() != d.size()) {
    throw ConfigError("gamma and d must be nonempty and of equal length");
  }
  double mx = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    mx = std::max(mx, gamma[i] * d[i]);
    sum += gamma[i] * d[i];
  }
  return std::min(1.0 / mx, s / sum);
}

RatePrediction r_misc(double p0, const std::function<double(double)>& ps,
                      const std::function<double(double)>& rdet, const std::vector<double>& s_values,
                      bool relaxed) {
  const double ceiling = relaxed ? 1.0 : 0.5;
  if (!(p0 > 0.0)) throw ConfigError("p_0 must be positive");
  if (p0 >= ceiling) {
    throw ConfigError("method does not converge: p_0 = " + std::to_string(p0) + " is not below " +
                      std::to_string(ceiling));
  }
  if (s_values.empty()) throw ConfigError("no s values to maximize over");
  auto q = [relaxed](double p) { return relaxed ? 1.0 / p - 1.0 : 1.0 / p - 2.0; };

  RatePrediction out;
  out.r_misc = -std::numeric_limits<double>::infinity();
  for (double s : s_values) {
    const double p = ps(s);
    const double r = rdet(s);
    out.s.push_back(s);
    out.p.push_back(p);
    out.r_det.push_back(r);
    if (p < p0 || p >= ceiling) {
      out.violations.push_back("s = " + std::to_string(s) + ": p_s = " + std::to_string(p) +
                               " outside [p_0, " + std::to_string(ceiling) + ")");
    }
    const double value = r <= q(p) ? r : q(p0) / (1.0 + (q(p0) - q(p)) / r);
    if (value > out.r_misc) {
      out.r_misc = value;
      out.s_star = s;
    }
  }
  out.r_misc = std::max(out.r_misc, 0.0);
  return out;
}

double r_misc_closed_form(double nu, int d, double gamma) {
  if (d < 1) throw ConfigError("d must be at least 1");
  if (!(gamma >= 1.0)) throw ConfigError("gamma must be at least 1");
  if (!(nu >= 1.5 * d)) throw ConfigError("nu must be at least 3d/2 for the theory variant");
  const double ratio = nu / d;
  if (ratio >= 1.0 / gamma + 2.5) return 1.0 / gamma;
  return (ratio - 1.5) / (1.0 + gamma);
}

RatePrediction predict_example(double nu, int d, double gamma, SummabilityVariant variant,
                               double p_offset, int grid) {
  if (d < 1) throw ConfigError("d must be at least 1");
  if (!(nu > 0.0)) throw ConfigError("nu must be positive");
  if (!(gamma >= 1.0)) throw ConfigError("gamma must be at least 1");
  if (grid < 2) throw ConfigError("s grid needs at least two points");

  if (variant == SummabilityVariant::theory) {
    RatePrediction out;
    out.variant = to_string(variant);
    out.r_misc = r_misc_closed_form(nu, d, gamma);
    const double smax = std::max(0.0, nu - 1.5 * d);
    // The closed form is attained at s = min(s_max, d).
    out.s_star = std::min(smax, static_cast<double>(d));
    return out;
  }

  const double sup = s_sup(d, nu, variant);
  if (!(sup > 0.0)) {
    throw ConfigError("nu = " + std::to_string(nu) + " is inadmissible for the " +
                      to_string(variant) + " variant");
  }
  const bool relaxed = variant == SummabilityVariant::improved;
  const double ceiling = relaxed ? 1.0 : 0.5;
  auto p_of = [&](double s) {
    const double denom = 2.0 * nu / d + 1.0 - 2.0 * s / d;
    return 1.0 / denom + p_offset;
  };
  std::vector<double> s_values;
  for (int k = 0; k < grid; ++k) {
    const double s = sup * k / grid;
    if (p_of(s) < ceiling) s_values.push_back(s);
  }
  if (s_values.empty()) throw ConfigError("no admissible s for this variant");
  auto rdet = [&](double s) { return 2.0 * std::min(1.0, s / d) / gamma; };
  RatePrediction out = r_misc(p_of(0.0), p_of, rdet, s_values, relaxed);
  out.variant = to_string(variant);
  return out;
}

double r_misc_example(double nu, int d, double gamma, SummabilityVariant variant) {
  return predict_example(nu, d, gamma, variant).r_misc;
}

}  // namespace misc
