#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "misc/errors.hpp"
#include "misc/random_field.hpp"

using namespace misc;

namespace {

// All surviving modes with |k| <= kmax, amplitudes from the formula directly.
std::vector<double> brute_amplitudes(int d, double nu, int kmax) {
  std::vector<double> out;
  std::vector<int> k(static_cast<std::size_t>(d), 0);
  std::function<void(int, int)> rec = [&](int axis, int left) {
    if (axis == d) {
      int sum = 0, nz = 0;
      for (int v : k) {
        sum += v;
        nz += v > 0;
      }
      const double a = std::sqrt(3.0) * std::pow(2.0, nz / 2.0) *
                       std::pow(1.0 + double(sum) * sum, -(nu + d / 2.0) / 2.0);
      // 2^nz sign/cosine patterns survive.
      for (int c = 0; c < (1 << nz); ++c) out.push_back(a);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      k[static_cast<std::size_t>(axis)] = v;
      rec(axis + 1, left - v);
    }
  };
  rec(0, kmax);
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace

TEST_CASE("amplitudes") {
  CHECK(coefficient_A({0}, 2.5) == doctest::Approx(std::sqrt(3.0)));
  CHECK(coefficient_A({1}, 2.5) == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-14));
  CHECK(coefficient_A({1, 1, 0}, 4.5) ==
        doctest::Approx(2.0 * std::sqrt(3.0) * std::pow(5.0, -3.0)).epsilon(1e-14));
  CHECK_THROWS_AS(coefficient_A({1}, 0.0), ConfigError);
}

TEST_CASE("mode ordering in one dimension") {
  const auto one = mode_ordering({1, 2.5, 1});
  REQUIRE(one.size() == 1);
  CHECK(one[0].k == std::vector<int>{0});
  CHECK(one[0].ell == std::vector<int>{1});
  CHECK(one[0].amplitude == doctest::Approx(std::sqrt(3.0)));

  const auto m = mode_ordering({1, 2.5, 5});
  CHECK(m[1].k == std::vector<int>{1});
  CHECK(m[1].ell == std::vector<int>{0});
  CHECK(m[2].k == std::vector<int>{1});
  CHECK(m[2].ell == std::vector<int>{1});
  CHECK(m[3].k == std::vector<int>{2});
  CHECK(m[4].k == std::vector<int>{2});
}

TEST_CASE("ordering matches a brute-force sort") {
  for (auto [d, nu, kmax] : {std::tuple{1, 2.5, 400}, std::tuple{1, 4.5, 400}, std::tuple{3, 4.5, 24},
                             std::tuple{3, 6.0, 24}}) {
    const auto modes = mode_ordering({d, nu, 200});
    REQUIRE(modes.size() == 200);
    const auto oracle = brute_amplitudes(d, nu, kmax);
    for (std::size_t j = 0; j < modes.size(); ++j) {
      if (j > 0) CHECK(modes[j].amplitude <= modes[j - 1].amplitude);
      CHECK(modes[j].amplitude == doctest::Approx(oracle[j]).epsilon(1e-14));
      for (std::size_t i = 0; i < modes[j].k.size(); ++i) {
        CHECK_FALSE((modes[j].k[i] == 0 && modes[j].ell[i] == 0));
      }
    }
  }
}

TEST_CASE("enumeration cap") {
  CHECK_THROWS_AS(mode_ordering({1, 2.5, 20000}), ConfigError);
  CHECK_THROWS_AS(mode_ordering({1, 2.5, 0}), ConfigError);
}

TEST_CASE("kappa and a") {
  RandomField f({1, 2.5, 8});
  const double x = 0.5;
  CHECK(f.kappa(&x, {}) == 0.0);
  CHECK(f.a(&x, {}) == 1.0);
  // Direction 2 is sin(pi x) at k = 1.
  CHECK(f.kappa(&x, {{2, 1.0}}) == doctest::Approx(coefficient_A({1}, 2.5)).epsilon(1e-15));
  CHECK_THROWS(f.kappa(&x, {{9, 0.5}}));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RandomField g({3, 4.5, 30});
  double bsum = 0.0;
  for (double b : b_sequence(0, g.modes())) bsum += b;
  for (int t = 0; t < 50; ++t) {
    SparsePoint y, ny;
    for (int j = 1; j <= 30; ++j) {
      const double v = u(rng);
      y.emplace_back(j, v);
      ny.emplace_back(j, -v);
    }
    const double p[3] = {(u(rng) + 1) / 2, (u(rng) + 1) / 2, (u(rng) + 1) / 2};
    CHECK(g.kappa(p, ny) == doctest::Approx(-g.kappa(p, y)).epsilon(1e-14));
    CHECK(g.a(p, y) * g.a(p, ny) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(g.a(p, y) <= std::exp(bsum));
    CHECK(g.a(p, y) >= std::exp(-bsum));
  }
  const double q[3] = {0.1, 0.2, 0.3};
  CHECK(std::log(g.a(q, {{4, 0.25}})) == doctest::Approx(g.kappa(q, {{4, 0.25}})));
}

TEST_CASE("b sequences") {
  for (auto [d, nu] : {std::pair{1, 2.5}, std::pair{3, 4.5}}) {
    const auto modes = mode_ordering({d, nu, 60});
    for (int s = 0; s <= 3; ++s) {
      const auto b = b_sequence(s, modes);
      for (std::size_t j = 0; j < modes.size(); ++j) {
        // Oracle: max over every sigma with |sigma| <= s.
        double best = 0.0;
        std::vector<int> sigma(static_cast<std::size_t>(d), 0);
        std::function<void(int, int)> rec = [&](int axis, int left) {
          if (axis == d) {
            double v = 1.0;
            for (int i = 0; i < d; ++i) {
              v *= std::pow(std::numbers::pi * modes[j].k[static_cast<std::size_t>(i)],
                            sigma[static_cast<std::size_t>(i)]);
            }
            best = std::max(best, v);
            return;
          }
          for (int v = 0; v <= left; ++v) {
            sigma[static_cast<std::size_t>(axis)] = v;
            rec(axis + 1, left - v);
          }
        };
        rec(0, s);
        CHECK(b[j] == doctest::Approx(modes[j].amplitude * best).epsilon(1e-13));
        if (s > 0) CHECK(b[j] >= b_sequence(s - 1, modes)[j]);
      }
    }
  }
  const auto m1 = mode_ordering({1, 2.5, 3});
  CHECK(b_sequence(1, m1)[0] == doctest::Approx(std::sqrt(3.0)));
  CHECK(b_sequence(1, m1)[1] == doctest::Approx(coefficient_A({1}, 2.5) * std::numbers::pi));
}

TEST_CASE("summability exponents") {
  CHECK(p_bound(0, 1, 2.5, SummabilityVariant::theory) == doctest::Approx(1.0 / 3.0));
  CHECK(p_bound(0, 1, 2.5, SummabilityVariant::square) == doctest::Approx(1.0 / 6.0));
  CHECK_THROWS_AS(p_bound(1.0, 1, 2.5, SummabilityVariant::theory), ConfigError);
  CHECK_THROWS_AS(p_bound(10.0, 1, 2.5, SummabilityVariant::square), ConfigError);
  CHECK(p_bound(2.4, 1, 2.5, SummabilityVariant::improved) < 1.0);
  CHECK(s_sup(1, 2.5, SummabilityVariant::theory) == 1.0);
  CHECK(s_sup(3, 4.5, SummabilityVariant::square) == 3.0);
  CHECK(s_sup(3, 4.5, SummabilityVariant::improved) == 4.5);
  CHECK(parse_variant("square") == SummabilityVariant::square);
  CHECK_THROWS_AS(parse_variant("other"), ConfigError);
}

TEST_CASE("tail summability at p above the bound") {
  const auto modes = mode_ordering({1, 2.5, 4096});
  const auto b = b_sequence(0, modes);
  auto partial = [&](std::size_t J) {
    double s = 0.0;
    for (std::size_t j = 0; j < J; ++j) s += std::pow(b[j], 0.4);
    return s;
  };
  // Increments of the doubling sequence shrink geometrically (ratio 2^-0.2).
  double previous = 1.0;
  for (std::size_t J = 256; J <= 2048; J *= 2) {
    const double rel = (partial(2 * J) - partial(J)) / partial(J);
    CHECK(rel < previous);
    previous = rel;
  }
  CHECK((partial(1024) - partial(512)) / partial(512) == doctest::Approx(0.05406).epsilon(1e-3));
  CHECK((partial(2048) - partial(1024)) / partial(1024) < 0.05);
}
