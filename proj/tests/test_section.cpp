#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "curvesec/config.hpp"
#include "curvesec/generator.hpp"
#include "curvesec/section.hpp"
#include "oracle_helpers.hpp"

using namespace curvesec;

namespace {
// Root of t^2 + t = 1, frozen from the bisection oracle.
constexpr double kGoldenKnot = 0.6180339887498949;
}  // namespace

TEST_CASE("curve map inversion") {
  auto phi = CurveMap::validate(PiecewiseFunction::power_sum({{1.0, 2.0}}));
  CHECK(phi.inverse(0.25) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(phi.inverse(1.0) == 1.0);
  CHECK(phi.inverse(0.0) == 0.0);

  auto s5 = builtin_section("example-5ii");
  CHECK(s5.phi.inverse(0.5) == doctest::Approx(0.5).epsilon(1e-13));

  for (const char* name : {"example-1", "example-2", "example-5ii", "diag-pi"}) {
    auto s = builtin_section(name);
    for (int i = 0; i <= 1024; ++i) {
      const double t = i / 1024.0;
      CHECK(std::abs(s.phi.inverse(s.phi(t)) - t) <= 1e-10);
    }
  }
}

TEST_CASE("curve map rejects flat and unpinned maps") {
  CHECK_THROWS_AS(CurveMap::validate(PiecewiseFunction::power_sum({{0.5, 1.0}, {0.25, 0.0}})),
                  validation_error);
  Piece flat{0.0, 1.0, {}, {{0.0, 0.0}, {0.5, 0.9}, {0.6, 0.9}, {1.0, 1.0}},
             Monotonicity::NonMonotone};
  CHECK_THROWS_AS(CurveMap::validate(PiecewiseFunction::from_pieces({flat})), validation_error);
}

TEST_CASE("validate_section accepts the cubic section and finds its breaks") {
  auto s = builtin_section("example-1");
  REQUIRE(s.hat_breaks.size() == 1);
  REQUIRE(s.tilde_breaks.size() == 1);
  // Oracles: slope roots of t - t^3 and t^2 - t^3.
  const double hb = oracle::bisect_root([](double t) { return 1.0 - 3.0 * t * t; }, 0.0, 1.0);
  const double tb =
      oracle::bisect_root([](double t) { return 2.0 * t - 3.0 * t * t; }, 0.5, 1.0);
  CHECK(s.hat_breaks[0] == doctest::Approx(hb).epsilon(1e-12));
  CHECK(s.tilde_breaks[0] == doctest::Approx(tb).epsilon(1e-12));
  CHECK(s.tilde_breaks[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("validate_section rejects a section above the upper envelope") {
  auto phi = CurveMap::validate(PiecewiseFunction::power_sum({{1.0, 2.0}}));
  CHECK_THROWS_AS(validate_section(phi, PiecewiseFunction::identity()), validation_error);
}

TEST_CASE("the identity section of M validates with a vanishing hat") {
  auto phi = CurveMap::validate(PiecewiseFunction::identity());
  auto s = validate_section(phi, PiecewiseFunction::identity());
  for (int i = 0; i <= 64; ++i) CHECK(std::abs(s.hat(i / 64.0)) <= 1e-12);
}

TEST_CASE("gap functions vanish at both ends and are Lipschitz") {
  for (const char* name : {"example-1", "example-2", "example-5ii", "diag-pi"}) {
    auto s = builtin_section(name);
    CHECK(std::abs(s.hat(0.0)) <= 1e-12);
    CHECK(std::abs(s.hat(1.0)) <= 1e-12);
    CHECK(std::abs(s.tilde(0.0)) <= 1e-12);
    CHECK(std::abs(s.tilde(1.0)) <= 1e-12);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
      double t1 = unif(rng), t2 = unif(rng);
      if (t1 > t2) std::swap(t1, t2);
      // hat rises at most like t and falls at most like phi; tilde mirrors.
      const double dh = s.hat(t2) - s.hat(t1);
      const double dt = s.tilde(t2) - s.tilde(t1);
      const double dphi = s.phi(t2) - s.phi(t1);
      CHECK(dh <= (t2 - t1) + 1e-10);
      CHECK(-dh <= dphi + 1e-10);
      CHECK(dt <= dphi + 1e-10);
      CHECK(-dt <= (t2 - t1) + 1e-10);
    }
  }
}

TEST_CASE("interval family sections") {
  auto quad = CurveMap::validate(PiecewiseFunction::power_sum({{1.0, 2.0}}));
  auto fam = interval_family_section(quad, {{0.0, 1.0}});
  // The knot solves t^2 + t = 1; oracle bisection agrees with the frozen root.
  const double u = oracle::bisect_root([](double t) { return t * t + t - 1.0; }, 0.0, 1.0);
  CHECK(u == doctest::Approx(kGoldenKnot).epsilon(1e-14));
  CHECK(fam.gamma.pieces().front().hi == doctest::Approx(kGoldenKnot).epsilon(1e-12));
  CHECK(fam.gamma(0.3) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fam.gamma(0.8) == doctest::Approx(0.8 * 0.8 + 0.8 - 1.0).epsilon(1e-12));

  auto ident = CurveMap::validate(PiecewiseFunction::identity());
  auto fam2 = interval_family_section(ident, {{0.2, 0.5}});
  CHECK(fam2.gamma(0.35 - 1e-9) == doctest::Approx(0.2).epsilon(1e-8));  // knot at (a+b)/2
  CHECK(fam2.gamma(0.1) == doctest::Approx(0.1).epsilon(1e-12));

  // No intervals: the lower envelope min{t, phi(t)} = t^2 for the quadratic map.
  auto env = interval_family_section(quad, {});
  for (int i = 0; i <= 64; ++i) {
    const double t = i / 64.0;
    CHECK(env.gamma(t) == doctest::Approx(t * t).epsilon(1e-12));
  }

  CHECK_THROWS_AS(interval_family_section(quad, {{0.1, 0.4}, {0.3, 0.6}}), domain_error);
  CHECK_THROWS_AS(interval_family_section(quad, {{-0.1, 0.4}}), domain_error);
}

TEST_CASE("section config files parse, including rational exponents") {
  const char* doc = R"({
    "name": "quad-cubic",
    "phi":   {"pieces": [{"domain": [0, 1], "kind": "power-sum", "terms": [[1, 2]]}]},
    "gamma": {"pieces": [{"domain": [0, [2,2]], "kind": "power-sum", "terms": [[1, [6,2]]]}]}
  })";
  auto s = section_from_json(nlohmann::json::parse(doc));
  CHECK(s.name == "quad-cubic");
  CHECK(s.gamma(0.5) == doctest::Approx(0.125).epsilon(1e-14));

  const char* table_doc = R"({
    "name": "tabled",
    "phi":   {"pieces": [{"domain": [0, 1], "kind": "power-sum", "terms": [[1, 1]]}]},
    "gamma": {"pieces": [{"kind": "table", "knots": [[0, 0], [0.5, 0.25], [1, 1]]}]}
  })";
  auto st = section_from_json(nlohmann::json::parse(table_doc));
  CHECK(st.gamma(0.25) == doctest::Approx(0.125).epsilon(1e-14));

  CHECK_THROWS_AS(section_from_json(nlohmann::json::parse("{\"phi\": 3}")), parse_error);
  const char* bad = R"({
    "phi":   {"pieces": [{"domain": [0, 0.5], "kind": "power-sum", "terms": [[1, 1]]}]},
    "gamma": {"pieces": [{"domain": [0, 1], "kind": "power-sum", "terms": [[1, 1]]}]}
  })";
  CHECK_THROWS_AS(section_from_json(nlohmann::json::parse(bad)), parse_error);

  for (const char* doc : {
           "[1,2,3]",
           "{\"phi\": {\"pieces\": 1}, \"gamma\": {\"pieces\": []}}",
           "{\"phi\": {\"pieces\": [{\"kind\": \"spline\"}]}, \"gamma\": {\"pieces\": []}}",
           "{\"phi\": {\"pieces\": [{\"domain\": [0,1], \"kind\": \"power-sum\","
           " \"terms\": [[1, [2, 0]]]}]}, \"gamma\": {\"pieces\": []}}",
           "{\"phi\": {\"pieces\": [{\"kind\": \"table\", \"knots\": [[0, 0]]}]},"
           " \"gamma\": {\"pieces\": []}}",
           "{\"phi\": {\"pieces\": [{\"domain\": [0,1], \"kind\": \"power-sum\","
           " \"terms\": [[1, \"x\"]]}]}, \"gamma\": {\"pieces\": []}}",
       }) {
    CHECK_THROWS_AS(section_from_json(nlohmann::json::parse(doc)), parse_error);
  }
}

TEST_CASE("builtin names resolve and example-3 aliases the same section") {
  for (const auto& n : builtin_names()) CHECK_NOTHROW(builtin_section(n));
  CHECK_THROWS_AS(builtin_section("nope"), parse_error);
  auto a = builtin_section("example-2");
  auto b = builtin_section("example-3");
  for (int i = 0; i <= 257; ++i) {
    const double t = i / 257.0;
    CHECK(a.gamma(t) == b.gamma(t));
  }
}

TEST_CASE("the piecewise builtin's tilde matches its closed-form branches") {
  auto s = builtin_section("example-5ii");
  auto closed = [](double t) {
    if (t <= 0.25) return std::sqrt(t) / 2.0 - t + t * t;
    if (t <= 0.5) return -t / 8.0 + 3.0 / 32.0;
    if (t <= 0.75) return 1.0 / 32.0;
    if (t <= 0.875) return 4.0 * t * t / 7.0 - t / 4.0 - 23.0 / 224.0;
    return 4.0 * t * t / 7.0 - 2.0 * t + 10.0 / 7.0;
  };
  for (int i = 0; i <= 512; ++i) {
    const double t = i / 512.0;
    CHECK(s.tilde(t) == doctest::Approx(closed(t)).epsilon(1e-12));
  }
  // Interior maxima of tilde: the root of 1/(4 sqrt(t)) - 1 + 2t in (0, 1/4)
  // (equals (3 - sqrt(5))/8) and the junction at 7/8.
  const double bump = oracle::bisect_root(
      [](double t) { return 1.0 / (4.0 * std::sqrt(t)) - 1.0 + 2.0 * t; }, 0.01, 0.24);
  CHECK(bump == doctest::Approx((3.0 - std::sqrt(5.0)) / 8.0).epsilon(1e-10));
  bool has_bump = false, has_ridge = false;
  for (double b : s.tilde_breaks) {
    has_bump = has_bump || std::abs(b - bump) < 1e-9;
    has_ridge = has_ridge || std::abs(b - 0.875) < 1e-12;
  }
  CHECK(has_bump);
  CHECK(has_ridge);
  CHECK(std::max(s.tilde(bump), s.tilde(0.875)) < 0.25);
}

TEST_CASE("random admissible sections always validate") {
  // Generation is admissible by construction; validate_section re-checks.
  std::vector<CurveMap> pool;
  pool.push_back(CurveMap::validate(PiecewiseFunction::power_sum({{1.0, 2.0}})));
  pool.push_back(CurveMap::validate(PiecewiseFunction::identity()));
  pool.push_back(CurveMap::validate(PiecewiseFunction::power_sum({{1.0, 0.5}})));
  pool.push_back(builtin_section("example-5ii").phi);
  int made = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto& phi = pool[seed % pool.size()];
    auto s = random_admissible_section(phi, seed, 8, 256);
    made += s.gamma(1.0) > 0.999999 ? 1 : 0;
  }
  CHECK(made == 10000);
}
