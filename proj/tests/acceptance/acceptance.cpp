// One line per acceptance criterion; exit status is non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "misc/driver.hpp"
#include "misc/errors.hpp"
#include "misc/mimc.hpp"

using namespace misc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name,
              o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / x.size();
    my += y[i] / y.size();
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

RunConfig stochastic_1d() {
  // Budgets 5 * 4^k for k = 1..9, i.e. up to about 1.3e6 degrees of freedom.
  return RunConfig::from(Config::parse("problem.d = 1\nproblem.nu = 2.5\nadaptivity.budget_count = 9\n"));
}

}  // namespace

int main() {
  criterion(1, "Lebesgue curve", [] {
    int argmax = 1;
    for (int b = 1; b <= 12; ++b) {
      if (leb_delta(b) > leb_delta(argmax)) argmax = b;
    }
    const double v = leb_delta(argmax);
    return Outcome{argmax == 3 && std::fabs(v - 1.067) <= 0.01,
                   fmt("max at beta = %.0f, value %.6f (target 1.067 +- 0.01)", argmax, v)};
  });

  criterion(2, "quadrature exactness and nestedness", [] {
    double worst = 0.0;
    for (int b = 1; b <= 6; ++b) {
      const auto& r = cc_rule(b);
      for (int k = 0; k < static_cast<int>(r.points.size()); ++k) {
        double q = 0.0;
        for (std::size_t i = 0; i < r.points.size(); ++i) q += r.weights[i] * std::pow(r.points[i], k);
        const double exact = k % 2 ? 0.0 : 1.0 / (k + 1);
        worst = std::max(worst, std::fabs(q - exact));
      }
    }
    bool nested = true;
    for (int b = 1; b < 8; ++b) {
      const auto coarse = cc_points(b);
      const auto fine = cc_points(b + 1);
      for (std::size_t i = 0; i < coarse.size(); ++i) {
        const std::size_t fi = b == 1 ? 1 : 2 * i;
        nested = nested && fine[fi] == coarse[i];
      }
    }
    return Outcome{worst < 1e-12 && nested,
                   fmt("max moment error %.2e (< 1e-12), nested bit-exact to beta 8: ", worst) +
                       (nested ? "yes" : "no")};
  });

  criterion(3, "estimator consistency on 50 random sets", [] {
    auto field = std::make_shared<RandomField>(FieldSpec{1, 2.5, 8});
    const Problem problem = make_pde_problem(field, QoISpec::defaults(1));
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> level(1, 4), dir(1, 4), count(1, 6);
    double worst = 0.0;
    bool sums = true, reuse = true;
    std::size_t members = 0;
    for (int t = 0; t < 50; ++t) {
      IndexSet set(1);
      const int seeds = count(rng);
      for (int k = 0; k < seeds; ++k) {
        MixedIndex m{{level(rng)}, {}};
        const int active = std::uniform_int_distribution<int>(0, 4)(rng);
        for (int a = 0; a < active; ++a) m.beta.set(dir(rng), level(rng));
        set.insert(m);
      }
      set.close();
      members += set.size();
      int total = 0;
      for (const auto& [m, c] : combination_coefficients(set)) total += c;
      sums = sums && total == 1;
      Estimator est(problem);
      const auto s = est.evaluate(set, EvalMode::surplus);
      const auto c = est.evaluate(set, EvalMode::combination);
      const auto again = est.evaluate(set, EvalMode::surplus);
      worst = std::max(worst, std::fabs(s.value - c.value) / std::fabs(c.value));
      reuse = reuse && c.solves == 0 && again.solves == 0 && again.value == s.value;
    }
    return Outcome{worst < 1e-10 && sums && reuse,
                   fmt("%.0f members; max relative surplus/combination gap %.2e (< 1e-10)", members, worst) +
                       "; sum c = 1: " + (sums ? "yes" : "no") +
                       "; zero re-solves: " + (reuse ? "yes" : "no")};
  });

  criterion(4, "deterministic spatial order, d = 1", [] {
    RandomField field({1, 2.5, 1});
    const auto spec = QoISpec::defaults(1);
    std::vector<double> q;
    for (int a = 1; a <= 6; ++a) q.push_back(solve_qoi({a}, {}, field, spec));
    std::vector<double> lx, ly;
    for (int a = 1; a <= 5; ++a) {
      lx.push_back(std::log(mesh_width(a)));
      ly.push_back(std::log(std::fabs(q[a] - q[a - 1])));
    }
    const double s = slope(lx, ly);
    return Outcome{std::fabs(s - 2.0) <= 0.2,
                   fmt("self-convergence slope %.4f over alpha = 1..5 (target 2.0 +- 0.2)", s)};
  });

  criterion(5, "deterministic combination technique, d = 3", [] {
    // Budgets 1.28e5 * 4^k, k = 0..4. Smaller budgets sit in the
    // pre-asymptotic range of the logarithmic factor.
    const auto cfg = RunConfig::from(Config::parse(
        "problem.d = 3\nproblem.nu = 4.5\nproblem.deterministic = true\n"
        "adaptivity.budgets = 1.28e5, 5.12e5, 2.048e6, 8.192e6, 3.2768e7\n"));
    const auto sum = run_study(cfg, false);
    return Outcome{std::fabs(sum.slope + 1.38) <= 0.25,
                   fmt("work-rate slope %.4f for work %.3g..%.3g DOF (target -1.38 +- 0.25)", sum.slope,
                       static_cast<double>(sum.records.front().work),
                       static_cast<double>(sum.records.back().work))};
  });

  criterion(6, "rate predictor", [] {
    const double a = r_misc_example(2.5, 1, 1.0, SummabilityVariant::theory);
    const double b = r_misc_example(4.5, 3, 1.0, SummabilityVariant::theory);
    auto rate = [](double nu, int d, SummabilityVariant v) {
      try {
        return r_misc_example(nu, d, 1.0, v);
      } catch (const ConfigError&) {
        return 0.0;  // inadmissible nu: no convergence guarantee
      }
    };
    int points = 0, violations = 0;
    for (int d : {1, 3}) {
      for (double nu = 0.5 * d; nu <= 6.0 * d + 1e-9; nu += 0.25 * d) {
        const double t = rate(nu, d, SummabilityVariant::theory);
        const double s = rate(nu, d, SummabilityVariant::square);
        const double i = rate(nu, d, SummabilityVariant::improved);
        ++points;
        if (t > s + 1e-12 || s > i + 1e-12) ++violations;
      }
    }
    return Outcome{a == 0.5 && b == 0.0 && violations == 0,
                   fmt("theory(2.5, 1) = %.17g, theory(4.5, 3) = %.17g", a, b) +
                       fmt("; ordering holds at %.0f of %.0f grid points", points - violations, points)};
  });

  criterion(7, "stochastic convergence, d = 1, nu = 2.5", [] {
    const auto sum = run_study(stochastic_1d(), false);
    return Outcome{sum.slope <= -0.5,
                   fmt("slope %.4f up to %.3g DOF (target <= -0.5)", sum.slope,
                       static_cast<double>(sum.records.back().work))};
  });

  criterion(8, "E_delta solver", [] {
    double worst = 0.0, min_e = 1e300;
    for (int i = 0; i < 10; ++i) {
      for (int k = 0; k < 10; ++k) {
        const double b = 0.5 + 2.5 * i / 9.0;
        const double q = 0.05 + 3.95 * k / 9.0;
        const double delta = std::exp(-b) * std::pow(10.0, -q);
        const double E = solve_E_delta(b, delta);
        worst = std::max(worst, std::fabs(E_delta_residual(E, b, delta)));
        min_e = std::min(min_e, E);
      }
    }
    return Outcome{worst < 1e-10 && min_e > 2.0,
                   fmt("max residual %.2e (< 1e-10), min E_delta %.6f (> 2) on 100 points", worst, min_e)};
  });

  criterion(9, "rate-fit oracle", [] {
    ErrorModel truth;
    truth.r_fem = 2.0;
    truth.C_E = 0.37;
    truth.g_tilde = {0.8, 1.3, 1.9, 2.6, 3.4};
    std::vector<RateSample> samples;
    for (const auto& idx : pilot_design(1, 5, 3)) {
      samples.push_back({idx, error_contribution_model(idx, truth)});
    }
    const auto fit = fit_rates(samples, 2.0);
    double worst = std::fabs(fit.C_E - truth.C_E);
    for (std::size_t j = 0; j < truth.g_tilde.size(); ++j) {
      worst = std::max(worst, std::fabs(fit.g_tilde.at(j) - truth.g_tilde[j]));
    }
    // Directions 3 and 4 only ever move together.
    std::vector<RateSample> tied;
    for (const auto& s : samples) {
      if (s.index.beta[3] == 1 && s.index.beta[4] == 1) tied.push_back(s);
    }
    for (int k = 2; k <= 4; ++k) {
      MixedIndex m = root_index(1);
      m.beta.set(3, k);
      m.beta.set(4, k);
      tied.push_back({m, error_contribution_model(m, truth)});
    }
    std::string flagged;
    try {
      fit_rates(tied, 2.0);
    } catch (const NumericalError& e) {
      flagged = e.what();
    }
    const bool named = flagged.find("3, 4") != std::string::npos;
    return Outcome{worst < 1e-8 && named,
                   fmt("max parameter error %.2e (< 1e-8); rank deficiency: ", worst) +
                       (flagged.empty() ? std::string("not flagged") : flagged)};
  });

  criterion(10, "MIMC baseline", [] {
    auto field = std::make_shared<RandomField>(FieldSpec{1, 2.5, 8});
    const Problem problem = make_pde_problem(field, QoISpec::defaults(1));
    const auto det = mimc_estimate(problem, {5, 0}, {7, 7, 7, 7, 7}, 3);
    double telescoped = 0.0;
    for (int a = 1; a <= 5; ++a) {
      const double fine = problem.eval({a}, {});
      telescoped += a == 1 ? fine : fine - problem.eval({a - 1}, {});
    }
    const bool exact = det.value == telescoped && det.variance == 0.0;

    const MimcSetup setup{4, 6};
    const auto counts = std::vector<std::int64_t>{200, 60, 20, 8};
    const auto r1 = mimc_estimate(problem, setup, counts, 99);
    const auto r2 = mimc_estimate(problem, setup, counts, 99);
    const bool repro = r1.value == r2.value && r1.work == r2.work;

    auto cfg = stochastic_1d();
    cfg.seed = 1;
    const auto rows = compare_study(cfg, false);
    const auto& last = rows.back();
    return Outcome{exact && repro && last.misc_error <= last.mimc_error,
                   std::string("zero variance exact: ") + (exact ? "yes" : "no") +
                       "; seed reproducible: " + (repro ? "yes" : "no") +
                       fmt("; at budget %.3g: MISC error %.3e vs MIMC RMS error %.3e", last.budget,
                           last.misc_error, last.mimc_error)};
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
