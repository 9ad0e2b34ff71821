#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "curvesec/checkerboard.hpp"
#include "curvesec/checks.hpp"
#include "curvesec/section.hpp"
#include "curvesec/simplex.hpp"

using namespace curvesec;

TEST_CASE("simplex solves small dense programs") {
  // max x0 + 2 x1 subject to x0 + x1 = 1.
  DenseLP lp;
  lp.rows = 1;
  lp.cols = 2;
  lp.a = {1.0, 1.0};
  lp.rhs = {1.0};
  lp.objective = {1.0, 2.0};
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == SimplexSolution::Status::Optimal);
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(sol.x[1] == doctest::Approx(1.0).epsilon(1e-12));

  // Infeasible: x0 + x1 = -1 with x >= 0.
  DenseLP bad = lp;
  bad.rhs = {-1.0};
  bad.objective = {1.0, 1.0};
  CHECK(solve_lp(bad).status == SimplexSolution::Status::Infeasible);

  // Redundant duplicated row stays solvable.
  DenseLP dup;
  dup.rows = 2;
  dup.cols = 2;
  dup.a = {1.0, 1.0, 1.0, 1.0};
  dup.rhs = {1.0, 1.0};
  dup.objective = {3.0, 1.0};
  auto sol2 = solve_lp(dup);
  REQUIRE(sol2.status == SimplexSolution::Status::Optimal);
  CHECK(sol2.objective == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("a pinned comonotone section forces the M mass") {
  auto ident = CurveMap::validate(PiecewiseFunction::identity());
  auto s = validate_section(ident, PiecewiseFunction::identity(), 512, "delta-m");
  EvalContext ctx(s);
  CHECK(lp_sup_at(ctx, 4, 2, 2) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("curve knots pin the objective to the section value") {
  auto s = builtin_section("example-1");
  EvalContext ctx(s);
  CheckerboardProblem p;
  const double v = lp_sup_at(ctx, 16, 8, 8, &p);
  CHECK(v == doctest::Approx(0.125).epsilon(1e-9));
  CHECK_NOTHROW(p.verify(1e-8));
}

TEST_CASE("off-curve nodes sit inside the sandwich band") {
  auto s = builtin_section("example-1");
  EvalContext ctx(s);
  const double mesh = checkerboard_mesh(s, 16);
  for (auto [a, b] : {std::pair{6, 10}, {10, 6}, {3, 13}, {13, 3}, {5, 9}}) {
    const double lp = lp_sup_at(ctx, 16, a, b);
    const double sp =
        surface(ctx, SurfaceKind::Splice, a / 16.0, s.phi(b / 16.0));
    CHECK(lp - sp >= -1e-7);
    CHECK(lp - sp <= 2.0 * mesh);
  }
}

TEST_CASE("the optimal mass extends to a surface passing both grid checks") {
  auto s = builtin_section("example-1");
  EvalContext ctx(s);
  CheckerboardProblem p;
  const double v = lp_sup_at(ctx, 8, 3, 5, &p);
  CHECK(checkerboard_extend(p, p.xs[3], p.ys[5]) == doctest::Approx(v).epsilon(1e-9));
  CHECK(checkerboard_extend(p, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-9));

  std::vector<double> vals;
  for (double x : p.xs) {
    for (double y : p.ys) vals.push_back(checkerboard_extend(p, x, y));
  }
  auto g = GridSurface::from_values(p.xs, p.ys, vals);
  CHECK(check_quasi_copula(g).pass);
  CHECK(check_two_increasing(g).pass);
}

TEST_CASE("a uniform mass is the independence checkerboard") {
  CheckerboardProblem p;
  p.n = 4;
  for (int i = 0; i <= 4; ++i) {
    p.xs.push_back(i / 4.0);
    p.ys.push_back(i / 4.0);
  }
  p.mass.assign(16, 1.0 / 16.0);
  for (int k = 1; k < 4; ++k) p.section_targets.push_back((k / 4.0) * (k / 4.0));
  CHECK_NOTHROW(p.verify());
  CHECK(checkerboard_extend(p, 0.5, 0.5) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(checkerboard_extend(p, 0.3, 0.7) == doctest::Approx(0.21).epsilon(1e-12));
}

TEST_CASE("the gap shrinks on nested grids") {
  auto s = builtin_section("example-1");
  EvalContext ctx(s);
  double prev = 1e9;
  for (int n : {8, 16, 32}) {
    const int a = 5 * n / 8, b = 7 * n / 8;
    const double gap = lp_sup_at(ctx, n, a, b) -
                       surface(ctx, SurfaceKind::Splice, static_cast<double>(a) / n,
                               s.phi(static_cast<double>(b) / n));
    CHECK(gap >= -1e-7);
    CHECK(gap <= prev + 1e-9);
    prev = gap;
  }
}

TEST_CASE("lp construction rejects bad indices") {
  auto s = builtin_section("example-1");
  EvalContext ctx(s);
  CHECK_THROWS_AS(build_checkerboard_lp(ctx, 1, 0, 0), domain_error);
  CHECK_THROWS_AS(build_checkerboard_lp(ctx, 65, 1, 1), domain_error);
  CHECK_THROWS_AS(build_checkerboard_lp(ctx, 8, 0, 4), domain_error);
  CHECK_THROWS_AS(build_checkerboard_lp(ctx, 8, 8, 4), domain_error);
}

TEST_CASE("plain-text dump carries the full instance") {
  auto s = builtin_section("example-1");
  EvalContext ctx(s);
  const auto lp = build_checkerboard_lp(ctx, 4, 2, 2);
  std::ostringstream os;
  write_lp(lp, os);
  const std::string text = os.str();
  CHECK(text.rfind("rows 11", 0) == 0);
  CHECK(text.find("cols 16") != std::string::npos);
  CHECK(text.find("objective") != std::string::npos);
  CHECK(text.find("constraints") != std::string::npos);
  // rows/cols/"objective"/coeff line/"constraints" headers plus 11 rows
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n' ? 1 : 0;
  CHECK(lines == 5 + 11);
}
