#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "curvesec/generator.hpp"
#include "curvesec/section.hpp"
#include "curvesec/variation.hpp"
#include "oracle_helpers.hpp"

using namespace curvesec;

namespace {
constexpr double kHatFullVariation = 0.7698003589195010;  // 2 * hat(1/sqrt(3))
}

TEST_CASE("monotone stretches reduce to endpoint differences") {
  auto s = builtin_section("example-1");
  // hat = t - t^3 is decreasing past 1/sqrt(3)
  const double v = total_variation({&s.hat, 0.8, 0.9, VariationMethod::MonotoneExact});
  CHECK(v == doctest::Approx(0.117).epsilon(1e-12));
  CHECK(v == doctest::Approx(std::abs(s.hat(0.9) - s.hat(0.8))).epsilon(1e-14));
}

TEST_CASE("full-interval variation of the cubic hat") {
  auto s = builtin_section("example-1");
  const double exact = total_variation({&s.hat, 0.0, 1.0, VariationMethod::MonotoneExact});
  CHECK(exact == doctest::Approx(kHatFullVariation).epsilon(1e-12));
  const double adaptive = total_variation({&s.hat, 0.0, 1.0, VariationMethod::Adaptive});
  CHECK(adaptive <= exact + 1e-12);
  CHECK(exact - adaptive <= 1e-6);
}

TEST_CASE("sign convention") {
  auto s = builtin_section("example-1");
  CHECK(total_variation({&s.hat, 0.4, 0.4, VariationMethod::MonotoneExact}) == 0.0);
  CHECK(total_variation({&s.hat, 0.4, 0.4, VariationMethod::Alternating}) == 0.0);
  const double fwd = total_variation({&s.hat, 0.2, 0.9, VariationMethod::MonotoneExact});
  const double bwd = total_variation({&s.hat, 0.9, 0.2, VariationMethod::MonotoneExact});
  CHECK(fwd == doctest::Approx(-bwd).epsilon(1e-14));
  const double bwd_a = total_variation({&s.hat, 0.9, 0.2, VariationMethod::Adaptive});
  CHECK(bwd_a <= 0.0);
  const double bwd_alt = total_variation({&s.hat, 0.9, 0.2, VariationMethod::Alternating});
  CHECK(bwd_alt == doctest::Approx(-fwd).epsilon(1e-6));
}

TEST_CASE("alternating objective on the peak partition") {
  auto s = builtin_section("example-1");
  // Single peak: the three-point alternating partition already attains the
  // full variation 2*hat(peak).
  const double alt = alternating_variation(s.hat, 0.0, 1.0, 4);
  CHECK(alt == doctest::Approx(kHatFullVariation).epsilon(1e-9));
  CHECK(alt <= total_variation({&s.hat, 0.0, 1.0, VariationMethod::MonotoneExact}) + 1e-9);
}

TEST_CASE("alternating objective of a monotone function") {
  auto cube = PiecewiseFunction::power_sum({{1.0, 3.0}});
  const double alt = alternating_variation(cube, 0.2, 0.9, 2);
  CHECK(alt == doctest::Approx(std::pow(0.9, 3) - std::pow(0.2, 3)).epsilon(1e-12));
}

TEST_CASE("alternating matches exact variation on piecewise-monotone sections") {
  for (const char* name : {"example-1", "example-2", "example-5ii", "diag-pi"}) {
    auto s = builtin_section(name);
    for (const auto* f : {&s.hat, &s.tilde}) {
      const double exact = total_variation({f, 0.0, 1.0, VariationMethod::MonotoneExact});
      const double alt = alternating_variation(*f, 0.0, 1.0, 256);
      CHECK(alt <= exact + 1e-9);
      CHECK(exact - alt <= 1e-6);
    }
  }
}

TEST_CASE("additivity over random split points") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const char* name : {"example-1", "example-2", "example-5ii"}) {
    auto s = builtin_section(name);
    for (int k = 0; k < 500; ++k) {
      double a = unif(rng), b = unif(rng), c = unif(rng);
      if (a > b) std::swap(a, b);
      const double mid = a + (b - a) * c;
      const double whole = s.hat.variation(a, b);
      CHECK(whole == doctest::Approx(s.hat.variation(a, mid) + s.hat.variation(mid, b))
                         .epsilon(1e-9));
    }
  }
}

TEST_CASE("subadditivity of sums") {
  auto s1 = builtin_section("example-1");
  auto s2 = builtin_section("example-2");
  auto sum = combine(1.0, s1.hat, 1.0, s2.tilde);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    double a = unif(rng), b = unif(rng);
    if (a > b) std::swap(a, b);
    CHECK(sum.variation(a, b) <= s1.hat.variation(a, b) + s2.tilde.variation(a, b) + 1e-9);
  }
}

TEST_CASE("gap-function variation bounds hold on random pairs") {
  std::vector<SectionPair> sections;
  for (const char* name : {"example-1", "example-2", "example-5ii", "diag-pi"}) {
    sections.push_back(builtin_section(name));
  }
  auto quad = CurveMap::validate(PiecewiseFunction::power_sum({{1.0, 2.0}}));
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    sections.push_back(random_admissible_section(quad, seed));
  }
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const auto& s : sections) {
    for (int k = 0; k < 1000; ++k) {
      double t1 = unif(rng), t2 = unif(rng);
      if (t1 > t2) std::swap(t1, t2);
      const double vh = s.hat.variation(t1, t2);
      const double vt = s.tilde.variation(t1, t2);
      const double dh = s.hat(t2) - s.hat(t1);
      const double dt = s.tilde(t2) - s.tilde(t1);
      const double dphi = s.phi(t2) - s.phi(t1);
      // Variation bounds.
      CHECK(vh <= 2.0 * dphi + dh + 1e-9);
      CHECK(vt <= 2.0 * (t2 - t1) + dt + 1e-9);
      CHECK(vh + vt <= (t2 - t1) + dphi + 1e-9);
      // Pointwise versions.
      CHECK(std::abs(dh) <= 2.0 * dphi + dh + 1e-9);
      CHECK(std::abs(dt) <= 2.0 * (t2 - t1) + dt + 1e-9);
      CHECK(std::abs(dh) + std::abs(dt) <= (t2 - t1) + dphi + 1e-9);
    }
  }
}

TEST_CASE("query validation") {
  CHECK_THROWS_AS(total_variation({nullptr, 0.0, 1.0, VariationMethod::MonotoneExact}),
                  domain_error);
  auto f = PiecewiseFunction::identity();
  CHECK_THROWS_AS(total_variation({&f, -0.1, 0.5, VariationMethod::MonotoneExact}), domain_error);
  CHECK_THROWS_AS(alternating_variation(f, 0.5, 0.5), domain_error);
}
