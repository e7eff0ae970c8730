#include <doctest.h>

#include <cmath>
#include <random>

#include "misc/errors.hpp"
#include "misc/estimator.hpp"

using namespace misc;

namespace {

Problem mock_problem(int D, int nvars, std::atomic<int>* calls = nullptr) {
  Problem p;
  p.spatial_dims = D;
  p.max_variable = nvars;
  p.eval = [calls](const std::vector<int>& alpha, const SparsePoint& y) {
    if (calls) ++*calls;
    double s = 1.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) s += std::pow(0.25, alpha[i]) * (i + 1);
    double t = 0.0;
    for (const auto& [j, x] : y) t += x / (j * j);
    return s * std::exp(t) + 0.1 * std::sin(s * t);
  };
  return p;
}

// Coefficients straight from the definition: every binary offset over all
// spatial axes and every direction that occurs in the set.
std::map<MixedIndex, int> brute_coefficients(const IndexSet& set) {
  std::set<int> dirs;
  for (const auto& m : set)
    for (const auto& [j, l] : m.beta.entries()) dirs.insert(j);
  const std::vector<int> dv(dirs.begin(), dirs.end());
  const std::size_t D = static_cast<std::size_t>(set.spatial_dims());
  std::map<MixedIndex, int> out;
  for (const auto& m : set) {
    int c = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (D + dv.size())); ++mask) {
      MixedIndex n = m;
      int parity = 0;
      for (std::size_t b = 0; b < D + dv.size(); ++b) {
        if (!((mask >> b) & 1)) continue;
        ++parity;
        if (b < D) ++n.alpha[b];
        else n.beta.set(dv[b - D], n.beta[dv[b - D]] + 1);
      }
      if (set.contains(n)) c += parity % 2 ? -1 : 1;
    }
    out[m] = c;
  }
  return out;
}

IndexSet random_set(std::mt19937_64& rng, int D, int nvars, int max_level, int seeds) {
  IndexSet s(D);
  std::uniform_int_distribution<int> lev(1, max_level), var(0, nvars);
  for (int k = 0; k < seeds; ++k) {
    MixedIndex m = root_index(D);
    for (auto& a : m.alpha) a = lev(rng);
    const int v = var(rng);
    if (v > 0) m.beta.set(v, lev(rng));
    s.insert(m);
  }
  s.close();
  return s;
}

}  // namespace

TEST_CASE("mixed indices") {
  MixedIndex m{{2, 1}, SparseLevelVector{{3, 2}}};
  CHECK(m.order() == 4);
  const auto back = m.backward_neighbors();
  CHECK(back.size() == 2);
  CHECK(to_string(root_index(2)) == to_string(MixedIndex{{1, 1}, {}}));
  IndexSet s(2);
  CHECK(s.insert(m));
  CHECK_FALSE(s.insert(m));
  CHECK_FALSE(s.is_downward_closed());
  CHECK(s.close().size() == 3);
  CHECK(s.is_downward_closed());
  CHECK(s.max_alpha() == 2);
  CHECK(s.max_beta() == 2);
  CHECK(s.last_var() == 3);
  CHECK(s.joint_vars() == 1);
  CHECK_THROWS(s.insert(MixedIndex{{1}, {}}));
  CHECK_THROWS(s.insert(MixedIndex{{0, 1}, {}}));
}

TEST_CASE("combination coefficients on small sets") {
  IndexSet a(1);
  a.insert({{1}, {}});
  a.insert({{2}, {}});
  auto c = combination_coefficients(a);
  CHECK(c[{{1}, {}}] == 0);
  CHECK(c[{{2}, {}}] == 1);

  IndexSet b(2);
  b.insert({{1, 1}, {}});
  b.insert({{2, 1}, {}});
  b.insert({{1, 2}, {}});
  c = combination_coefficients(b);
  CHECK(c[{{1, 1}, {}}] == -1);
  CHECK(c[{{2, 1}, {}}] == 1);
  CHECK(c[{{1, 2}, {}}] == 1);

  IndexSet open(1);
  open.insert({{2}, {}});
  CHECK_THROWS_AS(combination_coefficients(open), ConfigError);
}

TEST_CASE("combination coefficients match the definition on random sets") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 40; ++t) {
    const int D = 1 + t % 3;
    const auto set = random_set(rng, D, 3, 4, 4);
    const auto c = combination_coefficients(set);
    CHECK(c == brute_coefficients(set));
    int total = 0;
    for (const auto& [m, v] : c) total += v;
    CHECK(total == 1);
  }
}

TEST_CASE("differences of a separable tensor factor") {
  auto g = [](int a) { return 1.0 / (a * a); };
  auto h = [](int b) { return std::exp(-b); };
  TensorEvaluator tensor = [&](const std::vector<int>& alpha, const SparseLevelVector& beta) {
    double v = 1.0;
    for (int a : alpha) v *= g(a);
    return v * h(beta[2]);
  };
  CHECK(delta_det({3, 1}, {}, tensor) == doctest::Approx((g(3) - g(2)) * g(1) * h(1)));
  CHECK(mixed_difference({{3, 2}, SparseLevelVector{{2, 4}}}, tensor) ==
        doctest::Approx((g(3) - g(2)) * (g(2) - g(1)) * (h(4) - h(3))));
  CHECK(alternating_sum({1, 1}, [](const std::vector<int>&) { return 5.0; }) == 5.0);
}

TEST_CASE("surplus and combination agree and share every solve") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const int D = 1 + t % 2;
    const auto set = random_set(rng, D, 3, 3, 5);
    Estimator est(mock_problem(D, 3));
    const auto s = est.evaluate(set, EvalMode::surplus);
    const auto c = est.evaluate(set, EvalMode::combination);
    CHECK(std::fabs(s.value - c.value) < 1e-12);
    CHECK(c.solves == 0);
    CHECK(s.work == total_work(set));

    // Independent oracle: combination formula on the library's plain tensor rule.
    const auto p = mock_problem(D, 3);
    double oracle = 0.0;
    for (const auto& [m, cf] : brute_coefficients(set)) {
      if (cf == 0) continue;
      oracle += cf * tensor_quadrature(m.beta, [&](const SparsePoint& y) { return p.eval(m.alpha, y); });
    }
    CHECK(std::fabs(oracle - s.value) < 1e-12);
  }
}

TEST_CASE("nested grids reuse cached solves") {
  std::atomic<int> calls{0};
  Estimator est(mock_problem(1, 2, &calls));
  est.tensor({2}, SparseLevelVector{{1, 2}});
  CHECK(calls == 3);
  est.tensor({2}, SparseLevelVector{{1, 3}});
  CHECK(calls == 5);
  est.tensor({2}, SparseLevelVector{{1, 3}, {2, 2}});
  CHECK(calls == 5 + 10);
  CHECK(est.solves() == calls);
  CHECK(est.cache().size() == static_cast<std::size_t>(calls.load()));
  CHECK(est.cache().hits() > 0);
  CHECK(est.solved_work() == calls * unknowns({2}));
  CHECK_THROWS_AS(est.tensor({2}, SparseLevelVector{{3, 2}}), ConfigError);
  CHECK_THROWS(est.tensor({2, 1}, {}));
}

TEST_CASE("thread count does not change results") {
  std::mt19937_64 rng(9);
  const auto set = random_set(rng, 2, 3, 3, 6);
  Estimator one(mock_problem(2, 3), 1);
  Estimator four(mock_problem(2, 3), 4);
  const auto a = one.evaluate(set, EvalMode::surplus);
  const auto b = four.evaluate(set, EvalMode::surplus);
  CHECK(a.value == b.value);
  CHECK(a.solves == b.solves);
  CHECK(a.evaluated_work == b.evaluated_work);
}

TEST_CASE("PDE problem through the estimator") {
  auto field = std::make_shared<RandomField>(FieldSpec{1, 2.5, 4});
  Estimator est(make_pde_problem(field, QoISpec::defaults(1)), 2);
  IndexSet set(1);
  set.insert({{3}, SparseLevelVector{{1, 3}}});
  set.insert({{2}, SparseLevelVector{{1, 2}, {2, 2}}});
  set.close();
  const auto s = est.evaluate(set, EvalMode::surplus);
  const auto c = est.evaluate(set, EvalMode::combination);
  CHECK(std::fabs(s.value - c.value) < 1e-10);
  CHECK(c.solves == 0);
  CHECK(s.value > 0.0);
  IndexSet empty(1);
  CHECK_THROWS_AS(est.evaluate(empty, EvalMode::surplus), ConfigError);
}
