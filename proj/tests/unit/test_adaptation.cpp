#include <doctest.h>

#include <cmath>
#include <random>

#include "misc/adaptation.hpp"
#include "misc/errors.hpp"

using namespace misc;

namespace {

ErrorModel model(std::vector<double> g, double r = 2.0, double C = 1.0) {
  ErrorModel m;
  m.r_fem = r;
  m.g_tilde = std::move(g);
  m.C_E = C;
  return m;
}

bool subset(const IndexSet& a, const IndexSet& b) {
  for (const auto& m : a) {
    if (!b.contains(m)) return false;
  }
  return true;
}

Problem smooth_problem(int D, int nvars) {
  Problem p;
  p.spatial_dims = D;
  p.max_variable = nvars;
  p.eval = [](const std::vector<int>& alpha, const SparsePoint& y) {
    double s = 1.0;
    for (int a : alpha) s += std::pow(0.25, a);
    double t = 0.0;
    for (const auto& [j, x] : y) t += x * std::pow(0.3, j);
    return s * std::exp(t);
  };
  return p;
}

}  // namespace

TEST_CASE("work and error contributions") {
  CHECK(work_contribution({{1}, {}}, WorkModel::uniform(1)) == 2.0);
  CHECK(work_contribution({{1, 1, 1}, {}}, WorkModel::uniform(3)) == 8.0);
  CHECK(work_contribution({{2}, SparseLevelVector{{1, 3}}}, WorkModel::uniform(1, 1.5)) ==
        doctest::Approx(std::exp2(3.0 + 2.0)));
  CHECK_THROWS(work_contribution({{1}, {}}, WorkModel::uniform(2)));

  const auto m = model({0.7, 1.1}, 2.0, 3.0);
  CHECK(error_contribution_model({{1, 1, 1}, {}}, m) == doctest::Approx(3.0 * std::exp2(-6.0)));
  const double e2 = error_contribution_model({{1}, SparseLevelVector{{2, 2}}}, m);
  const double e3 = error_contribution_model({{1}, SparseLevelVector{{2, 3}}}, m);
  CHECK(e3 / e2 == doctest::Approx(std::exp(-2 * 1.1)));
  CHECK_THROWS_AS(error_contribution_model({{1}, SparseLevelVector{{3, 2}}}, m), ConfigError);
}

TEST_CASE("a-priori sets: simple cases") {
  const auto w = WorkModel::uniform(1);
  const auto root_only = build_set_apriori(1, w, model({}), SelectionCriterion::threshold(1.0));
  CHECK(root_only.set.size() == 1);
  CHECK(root_only.set.contains(root_index(1)));
  CHECK(root_only.entries.size() == 1);
  CHECK(root_only.entries[0].closure_added);

  // Profit 2^(-3 alpha): contiguous levels down to the threshold.
  for (int a_star = 1; a_star <= 8; ++a_star) {
    const double eps = std::exp2(-3.0 * a_star) * 0.99;
    const auto r = build_set_apriori(1, w, model({}), SelectionCriterion::threshold(eps));
    CHECK(r.set.size() == static_cast<std::size_t>(a_star));
    CHECK(r.set.max_alpha() == a_star);
    CHECK(r.set.is_downward_closed());
  }
  CHECK_THROWS_AS(build_set_apriori(1, w, model({}), SelectionCriterion::budget(4)), ConfigError);
  CHECK_THROWS_AS(build_set_apriori(1, w, model({-1.0}), SelectionCriterion::threshold(1e-3)),
                  ConfigError);
}

TEST_CASE("a-priori sets grow monotonically and stay closed") {
  const auto w = WorkModel::uniform(2);
  const auto m = model({0.5, 0.8, 1.2, 1.7, 2.3, 3.0});
  IndexSet previous(2);
  previous.insert(root_index(2));
  for (double eps = 1e-2; eps > 1e-9; eps /= 5) {
    const auto r = build_set_apriori(2, w, m, SelectionCriterion::threshold(eps));
    CHECK(r.set.is_downward_closed());
    CHECK(subset(previous, r.set));
    CHECK(r.work == total_work(r.set));
    for (const auto& e : r.entries) {
      if (!e.closure_added) CHECK(e.profit >= eps);
    }
    previous = r.set;
  }
  CHECK(previous.last_var() >= 3);
}

TEST_CASE("budget mode stops at the longest affordable prefix") {
  const auto w = WorkModel::uniform(1);
  const auto m = model({0.6, 0.9, 1.4, 2.0});
  const auto full = build_set_apriori(1, w, m, SelectionCriterion::threshold(1e-12));
  // Group the greedy acceptance order into equal-profit batches.
  std::vector<std::pair<double, std::int64_t>> batches;
  for (const auto& e : full.entries) {
    if (e.closure_added) continue;
    if (!batches.empty() && batches.back().first == e.profit) {
      batches.back().second += work_of(e.index);
    } else {
      batches.push_back({e.profit, work_of(e.index)});
    }
  }
  for (double budget : {20.0, 100.0, 1e3, 1e4, 1e5, 1e6}) {
    std::int64_t running = 0;
    std::size_t count = 0;
    std::size_t members = 0;
    for (const auto& [p, wk] : batches) {
      if (static_cast<double>(running + wk) > budget) break;
      running += wk;
      ++count;
    }
    for (const auto& e : full.entries) {
      if (e.closure_added) continue;
      std::size_t b = 0;
      double last = e.profit;
      for (; b < batches.size(); ++b) {
        if (batches[b].first == last) break;
      }
      if (b < count) ++members;
    }
    const auto r = build_set_apriori(1, w, m, SelectionCriterion::budget(budget));
    CHECK(r.set.size() == members);
    CHECK(static_cast<double>(r.work) <= budget);
    CHECK(r.work == running);
    CHECK(subset(r.set, full.set));
  }
}

TEST_CASE("universe construction") {
  const auto u = make_universe(1, 2, 1);
  CHECK(u.size() == 6);
  CHECK(u.is_downward_closed());
  CHECK(make_universe(2, 0, 3).size() == 1);
  const auto big = make_universe(2, 3, 2);
  for (const auto& m : big) CHECK(m.order() - 2 <= 3);
  CHECK_THROWS_AS(make_universe(1, -1, 0), ConfigError);
}

TEST_CASE("brute-force selection") {
  Estimator est(smooth_problem(1, 2));
  IndexSet single(1);
  single.insert(root_index(1));
  const auto one = build_set_bruteforce(single, est, SelectionCriterion::threshold(1e300));
  CHECK(one.selection.set.size() == 1);
  REQUIRE(one.actual.size() == 1);
  CHECK(one.actual[0].profit == doctest::Approx(est.tensor({1}, {}) / unknowns({1})));

  const auto universe = make_universe(1, 4, 2);
  const auto w = WorkModel::uniform(1);
  const auto m = model({1.0, 2.0});
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    const auto r = build_set_bruteforce(universe, est, SelectionCriterion::threshold(eps), &w, &m);
    CHECK(r.modeled.size() == universe.size());
    CHECK(r.selection.set.is_downward_closed());
    for (const auto& e : r.actual) {
      if (e.profit >= eps) CHECK(r.selection.set.contains(e.index));
    }
  }
  for (double budget : {50.0, 500.0, 5000.0}) {
    const auto r = build_set_bruteforce(universe, est, SelectionCriterion::budget(budget));
    CHECK(static_cast<double>(r.selection.work) <= budget);
    CHECK(r.selection.set.is_downward_closed());
  }
  CHECK_THROWS_AS(build_set_bruteforce(make_universe(2, 12, 4), est,
                                       SelectionCriterion::threshold(1e-3)),
                  ConfigError);
}

TEST_CASE("rate fitting recovers an exact model") {
  const auto truth = model({0.45, 0.9, 1.6}, 2.0, 0.8);
  std::vector<RateSample> samples;
  for (const auto& idx : pilot_design(2, 3, 3)) {
    samples.push_back({idx, error_contribution_model(idx, truth)});
  }
  const auto fit = fit_rates(samples, 2.0);
  REQUIRE(fit.g_tilde.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) CHECK(std::fabs(fit.g_tilde[j] - truth.g_tilde[j]) < 1e-10);
  CHECK(fit.C_E == doctest::Approx(0.8).epsilon(1e-10));
  CHECK(fit.residual < 1e-10);

  auto twice = samples;
  twice.insert(twice.end(), samples.begin(), samples.end());
  const auto fit2 = fit_rates(twice, 2.0);
  for (std::size_t j = 0; j < 3; ++j) CHECK(fit2.g_tilde[j] == doctest::Approx(fit.g_tilde[j]).epsilon(1e-12));
}

TEST_CASE("rank deficiency names the unidentifiable direction") {
  // Direction 2 only ever appears together with direction 1.
  std::vector<RateSample> s;
  s.push_back({root_index(1), 1.0});
  for (int k = 2; k <= 4; ++k) {
    MixedIndex x = root_index(1);
    x.beta.set(1, k);
    x.beta.set(2, k);
    s.push_back({x, std::exp(-k)});
  }
  try {
    fit_rates(s, 2.0);
    FAIL("expected a rank-deficiency error");
  } catch (const NumericalError& e) {
    const std::string what = e.what();
    CHECK(what.find("1, 2") != std::string::npos);
  }
  CHECK_THROWS_AS(fit_rates({}, 2.0), NumericalError);
  CHECK_THROWS_AS(fit_rates({{root_index(1), 0.0}}, 2.0), NumericalError);
}

TEST_CASE("pilot design") {
  const auto d = pilot_design(1, 2, 3);
  CHECK(d.size() == 2 * 3 + 3 + 3);
  CHECK_THROWS_AS(pilot_design(1, 2, 1), ConfigError);
  CHECK(pilot_design(3, 0, 2).size() == 2);
}

TEST_CASE("pilot rates grow with the mode index") {
  auto field = std::make_shared<RandomField>(FieldSpec{1, 2.5, 12});
  Estimator est(make_pde_problem(field, QoISpec::defaults(1)), 2);
  const auto samples = pilot_samples(est, 10, 3, 1e-14);
  const auto fit = fit_rates(samples, 2.0);
  REQUIRE(fit.g_tilde.size() >= 8);
  for (double g : fit.g_tilde) CHECK(g > 0.0);
  // Beyond the first few modes the fitted rates increase.
  for (std::size_t j = 4; j < fit.g_tilde.size(); ++j) {
    INFO("j = " << j + 1);
    CHECK(fit.g_tilde[j] >= fit.g_tilde[j - 2]);
  }
  CHECK(fit.g_tilde.back() > fit.g_tilde[0]);
}
