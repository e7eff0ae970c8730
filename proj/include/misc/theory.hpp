#pragma once

#include <functional>
#include <string>
#include <vector>

#include "misc/random_field.hpp"

namespace misc {

/// Root E > 2 of pi/E = -|b0|_1 - log(delta) + log cos(pi/E). Throws
/// ConfigError("delta too large for ellipse construction") when none exists.
double solve_E_delta(double b0_l1_norm, double delta);

/// pi/E - (-|b0|_1 - log delta + log cos(pi/E))
double E_delta_residual(double E, double b0_l1_norm, double delta);

struct EllipseParams {
  double E_delta = 0.0;
  std::vector<double> tau;
  std::vector<double> rho;
};

/// tau_j = pi b_j^(p-1) / (E |b|_p^p), rho_j = tau_j + sqrt(tau_j^2 + 1).
EllipseParams ellipse_radii(const std::vector<double>& b, double p, double E_delta);

/// Largest nested-difference Lebesgue constant over levels 1..max_beta.
double lebesgue_bound(int max_beta = 12);

/// g(rho) = log rho when rho <= 2 L^(1/3), otherwise log rho - log 2 - log(L)/3.
std::vector<double> g_rates(const std::vector<double>& rho, double L);

/// min(1 / max_i gamma_i d_i, s / sum_i gamma_i d_i)
double r_det(double s, const std::vector<double>& gamma, const std::vector<double>& d);

struct RatePrediction {
  std::string variant;
  double r_misc = 0.0;
  double s_star = 0.0;
  std::vector<double> s;
  std::vector<double> r_det;
  std::vector<double> p;
  std::vector<std::string> violations;
};

/// Max over the given s of the two-branch rate with effective exponent
/// q(p) = 1/p - 2 (standard) or 1/p - 1 (relaxed):
///   r_det(s)                                      if r_det(s) <= q(p_s)
///   q(p_0) / (1 + (q(p_0) - q(p_s)) / r_det(s))   otherwise.
/// Throws ConfigError when p_0 makes the method diverge.
RatePrediction r_misc(double p0, const std::function<double(double)>& ps,
                      const std::function<double(double)>& rdet, const std::vector<double>& s_values,
                      bool relaxed = false);

/// Closed form for the log-uniform example under the standard exponents:
/// 1/gamma if nu/d >= 1/gamma + 5/2, else (nu/d - 3/2) / (1 + gamma).
double r_misc_closed_form(double nu, int d, double gamma);

/// Rate for the example in one variant. theory uses the closed form; square
/// and improved maximize over a uniform s grid on [0, s_sup) with p_s from
/// the square bound (+ offset) and r_det(s) = 2 min(1, s/d) / gamma.
RatePrediction predict_example(double nu, int d, double gamma, SummabilityVariant variant,
                               double p_offset = 1e-6, int grid = 4000);

double r_misc_example(double nu, int d, double gamma, SummabilityVariant variant);

}  // namespace misc
