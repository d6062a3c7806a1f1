#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "prefgame/errors.hpp"
#include "prefgame/models.hpp"
#include "prefgame/witnesses.hpp"
#include "support.hpp"

using namespace prefgame;

namespace {

constexpr double kPi = std::numbers::pi;

// Largest number of the six dominant+cycle constraints any one-plane
// embedding satisfies, over a 1 degree grid. Item 0 is fixed at angle 0
// by rotation invariance; magnitudes only scale scores, so unit lengths
// suffice.
int grid_best_d1_dominant_cycle() {
  std::vector<int> positive(360);
  for (int k = 0; k < 360; ++k) positive[k] = std::sin(k * kPi / 180) > kStrictMargin;
  auto beats = [&](int from, int to) { return positive[((to - from) % 360 + 360) % 360]; };
  int best = 0;
  for (int b = 0; b < 360; ++b) {
    for (int c = 0; c < 360; ++c) {
      const int cycle = beats(0, b) + beats(b, c) + beats(c, 0);
      for (int d = 0; d < 360; ++d) {
        const int total = cycle + beats(d, 0) + beats(d, b) + beats(d, c);
        best = std::max(best, total);
      }
    }
  }
  return best;
}

// Brute-force semicircle check: is there a grid angle delta with
// sin(theta_i - delta) > 0 for every i?
bool grid_semicircle(const std::vector<double>& angles) {
  constexpr int kSteps = 62832;  // about 1e-4 radians
  for (int k = 0; k < kSteps; ++k) {
    const double delta = 2 * kPi * k / kSteps;
    bool ok = true;
    for (double t : angles) ok = ok && std::sin(t - delta) > 0;
    if (ok) return true;
  }
  return false;
}

// Largest circular gap between sorted angles.
double largest_gap(std::vector<double> angles) {
  for (double& a : angles) a = std::fmod(std::fmod(a, 2 * kPi) + 2 * kPi, 2 * kPi);
  std::sort(angles.begin(), angles.end());
  double gap = angles.front() + 2 * kPi - angles.back();
  for (std::size_t i = 1; i < angles.size(); ++i) gap = std::max(gap, angles[i] - angles[i - 1]);
  return gap;
}

}  // namespace

TEST_CASE("planar embedding storage") {
  PlanarEmbedding e(2, 2);
  e.set(0, 1, 2.0, -kPi / 2);
  CHECK(e.angle(0, 1) == doctest::Approx(3 * kPi / 2));
  CHECK(e.magnitude(0, 1) == 2.0);
  e.set(1, 0, 1.0, 5 * kPi);
  CHECK(e.angle(1, 0) == doctest::Approx(kPi));
  CHECK_THROWS_AS(e.set(0, 0, -1.0, 0.0), DomainError);
  e.set_cartesian(1, 1, 0.0, -3.0);
  CHECK(e.magnitude(1, 1) == doctest::Approx(3.0));
  CHECK(e.angle(1, 1) == doctest::Approx(3 * kPi / 2));
  const auto xy = e.cartesian(0);
  REQUIRE(xy.size() == 4);
  CHECK(std::abs(xy[2]) <= 1e-15);
  CHECK(xy[3] == doctest::Approx(-2.0));
  CHECK_THROWS(e.set(2, 0, 1.0, 0.0));
}

TEST_CASE("geometric score examples") {
  PlanarEmbedding e(2, 1);
  e.set(0, 0, 1.0, 0.0);
  e.set(1, 0, 1.0, kPi / 2);
  CHECK(geometric_score(e, 0, 0) == 0.0);
  CHECK(geometric_score(e, 0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(geometric_score(e, 1, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  const auto table = score_table(e);
  CHECK(table.size() == 4);
  CHECK(table[1] == geometric_score(e, 0, 1));
}

TEST_CASE("geometric score equals the bilinear model score") {
  testing::Rng rng(40);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = testing::uniform_size(rng, 1, 4);
    PlanarEmbedding e(2, d);
    for (std::size_t item = 0; item < 2; ++item) {
      for (std::size_t l = 0; l < d; ++l) {
        e.set(item, l, testing::uniform_real(rng, 0, 3), testing::uniform_real(rng, -10, 10));
      }
    }
    CyclicHead head;
    head.subspaces = d;
    head.gating = false;
    head.unit_norm = false;
    head.projection.assign(4 * d * d, 0.0);
    for (std::size_t k = 0; k < 2 * d; ++k) head.projection[k * 2 * d + k] = 1.0;
    const double bilinear = gpm_score(head, {}, e.cartesian(0), e.cartesian(1));
    CHECK(std::abs(geometric_score(e, 0, 1) - bilinear) <= 1e-10);
    CHECK(geometric_score(e, 0, 1) == -geometric_score(e, 1, 0));
  }
}

TEST_CASE("two-plane construction of a dominant item over a cycle") {
  CHECK_THROWS_AS(build_dominant_cycle_d2(2), DomainError);
  for (std::size_t n = 3; n <= 12; ++n) {
    const auto e = build_dominant_cycle_d2(n);
    REQUIRE(e.items() == n + 1);
    REQUIRE(e.subspaces() == 2);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(geometric_score(e, n, i) == doctest::Approx(1.0).epsilon(1e-14));
      for (std::size_t j = 0; j < n; ++j) {
        const double expected = std::sin(2 * kPi * (double(j) - double(i)) / n);
        CHECK(std::abs(geometric_score(e, i, j) - expected) <= 1e-14);
      }
    }
    if (n % 2 == 1) CHECK(check_pattern(e, SignPattern::rotational(n, true)).ok());
  }
  const auto e3 = build_dominant_cycle_d2(3);
  CHECK(geometric_score(e3, 0, 1) == doctest::Approx(0.8660254).epsilon(1e-7));

  const auto e4 = build_dominant_cycle_d2(4);
  CHECK(std::abs(geometric_score(e4, 0, 2)) <= 1e-15);
  SignPattern antipodal(5);
  antipodal.require(0, 2, 1);
  CHECK_FALSE(check_pattern(e4, antipodal).ok());
  CHECK(check_pattern(e4, SignPattern::rotational(4, true)).ok());

  const auto e5 = build_dominant_cycle_d2(5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(geometric_score(e5, i, (i + 1) % 5) == doctest::Approx(0.9510565).epsilon(1e-7));
  }
}

TEST_CASE("sign patterns") {
  const auto c = SignPattern::cycle(3);
  CHECK(c(0, 1) == 1);
  CHECK(c(1, 0) == -1);
  CHECK(c(2, 0) == 1);
  CHECK(c.constraint_count() == 3);
  const auto r = SignPattern::rotational(3, true);
  CHECK(r.size() == 4);
  CHECK(r.constraint_count() == 6);
  for (std::size_t i = 0; i < 3; ++i) CHECK(r(3, i) == 1);
  CHECK(SignPattern::rotational(4, false).constraint_count() == 4);
  CHECK(SignPattern::cycle(5).constraint_count() == 5);
  CHECK_THROWS_AS(SignPattern(2, {0, 1, 1, 0}), DomainError);
  CHECK_THROWS_AS(SignPattern(2, {1, 0, 0, 0}), DomainError);
  CHECK_THROWS_AS(SignPattern(2, {0, 2, -2, 0}), DomainError);
  CHECK_NOTHROW(SignPattern(2, {0, -1, 1, 0}));
}

TEST_CASE("pattern check counts strict signs") {
  PlanarEmbedding e(3, 1);
  for (std::size_t i = 0; i < 3; ++i) e.set(i, 0, 1.0, 2 * kPi * i / 3);
  const auto check = check_pattern(e, SignPattern::cycle(3));
  CHECK(check.ok());
  CHECK(check.total == 3);
  CHECK(check.min_margin == doctest::Approx(std::sin(2 * kPi / 3)));
  const auto reversed = check_pattern(e, SignPattern::rotational(3, false));
  CHECK(reversed.ok());
  SignPattern backwards(3);
  backwards.require(1, 0, 1);
  const auto bad = check_pattern(e, backwards);
  CHECK(bad.satisfied == 0);
  CHECK(bad.accuracy() == 0.0);
}

TEST_CASE("semicircle examples") {
  const std::vector<double> third{0.0, 2 * kPi / 3, 4 * kPi / 3};
  CHECK_FALSE(d1_dominant_feasible(third).feasible);
  CHECK_FALSE(d1_dominant_feasible(third).witness.has_value());

  const std::vector<double> close{0.1, 0.2, 0.3};
  const auto r = d1_dominant_feasible(close);
  REQUIRE(r.feasible);
  REQUIRE(r.witness.has_value());
  CHECK(r.margin > 0.0);
  double margin = 1.0;
  for (double t : close) margin = std::min(margin, std::sin(t - *r.witness));
  CHECK(r.margin == doctest::Approx(margin));

  const std::vector<double> single{1.0};
  const auto s = d1_dominant_feasible(single);
  REQUIRE(s.feasible);
  CHECK(*s.witness == doctest::Approx(1.0 - kPi / 2));
  CHECK(s.margin == doctest::Approx(1.0));

  CHECK_THROWS_AS(d1_dominant_feasible(std::vector<double>{}), DomainError);
  CHECK_THROWS_AS(d1_dominant_feasible(std::vector<double>{std::nan("")}), DomainError);
}

TEST_CASE("semicircle criterion agrees with a brute-force grid") {
  testing::Rng rng(41);
  int compared = 0, feasible = 0;
  while (compared < 300) {
    const std::size_t n = testing::uniform_size(rng, 1, 6);
    const double centre = testing::uniform_real(rng, -10, 10);
    const double spread = testing::uniform_real(rng, 0.1, 2 * kPi);
    std::vector<double> angles(n);
    for (double& a : angles) a = centre + testing::uniform_real(rng, 0, spread);
    // Skip sets within grid resolution of the half-turn boundary.
    const double gap = largest_gap(angles);
    if (std::abs(gap - kPi) < 0.01) continue;
    const auto r = d1_dominant_feasible(angles);
    CHECK(r.feasible == (gap > kPi));
    CHECK(r.feasible == grid_semicircle(angles));
    if (r.feasible) {
      ++feasible;
      for (double t : angles) CHECK(std::sin(t - *r.witness) >= r.margin - 1e-12);
      CHECK(r.margin > 0.0);
    }
    ++compared;
  }
  CHECK(feasible > 30);
  CHECK(compared - feasible > 30);
}

TEST_CASE("hard cycles have no dominant item in any number of planes") {
  for (std::size_t n : {2u, 3u, 4u, 5u, 7u, 10u, 100u}) {
    for (std::size_t d : {1u, 2u, 5u}) {
      const auto r = hard_cycle_infeasibility(n, d, 3, 500);
      INFO("n " << n << " d " << d);
      CHECK_FALSE(r.feasible);
      CHECK(r.max_min_score <= kStrictMargin);
      CHECK(r.max_min_score == doctest::Approx(-std::cos(kPi / n)).epsilon(1e-9));
      CHECK(r.sampled_max_min <= r.max_min_score + 1e-9);
    }
  }
  CHECK(std::abs(hard_cycle_infeasibility(2, 3).max_min_score) <= 1e-12);
  CHECK_THROWS_AS(hard_cycle_infeasibility(1, 1), DomainError);
  CHECK_THROWS_AS(hard_cycle_infeasibility(3, 0), DomainError);
}

TEST_CASE("capacity search on small patterns") {
  const auto rps = pattern_capacity_search(SignPattern::cycle(3), 1);
  CHECK(rps.accuracy == 1.0);
  CHECK(rps.check.ok());
  CHECK(check_pattern(rps.embedding, SignPattern::cycle(3)).ok());

  const auto dominant = SignPattern::rotational(3, true);
  const auto one = pattern_capacity_search(dominant, 1);
  CHECK(one.accuracy <= 5.0 / 6.0);
  CHECK(one.accuracy == doctest::Approx(5.0 / 6.0));
  CHECK(grid_best_d1_dominant_cycle() == 5);

  const auto two = pattern_capacity_search(dominant, 2);
  CHECK(two.accuracy == 1.0);
  CHECK(check_pattern(two.embedding, dominant).ok());

  CapacitySearchConfig config;
  config.seed = 9;
  config.restarts = 3;
  const auto a = pattern_capacity_search(dominant, 2, config);
  const auto b = pattern_capacity_search(dominant, 2, config);
  CHECK(score_table(a.embedding) == score_table(b.embedding));
}
