#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "curvesec/errors.hpp"
#include "curvesec/simplex.hpp"
#include "curvesec/surfaces.hpp"

namespace curvesec {

/// Checkerboard mass grid over the section's knots: x nodes at i/n and y
/// nodes at phi(i/n), so every curve knot is a grid node and the section
/// constraints are exactly representable. mass[i*n+j] is the cell
/// [xs[i],xs[i+1]] x [ys[j],ys[j+1]].
struct CheckerboardProblem {
  int n = 0;
  std::vector<double> xs;               // n+1
  std::vector<double> ys;               // n+1
  std::vector<double> mass;             // n*n, row-major in the x cell index
  std::vector<double> section_targets;  // gamma(xs[k]) for k = 1..n-1

  double cell(int i, int j) const { return mass[static_cast<std::size_t>(i) * n + j]; }

  /// Strip sums must match the node increments and the cumulative mass at
  /// every curve knot must hit the section value.
  void verify(double tol = 1e-10) const {
    for (int i = 0; i < n; ++i) {
      double row = 0.0, col = 0.0;
      for (int j = 0; j < n; ++j) {
        row += cell(i, j);
        col += cell(j, i);
        if (cell(i, j) < -tol) throw validation_error("negative checkerboard cell mass");
      }
      if (std::abs(row - (xs[i + 1] - xs[i])) > tol) {
        throw validation_error("x-strip mass mismatch at cell row " + std::to_string(i));
      }
      if (std::abs(col - (ys[i + 1] - ys[i])) > tol) {
        throw validation_error("y-strip mass mismatch at cell column " + std::to_string(i));
      }
    }
    for (int k = 1; k < n; ++k) {
      double cum = 0.0;
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) cum += cell(i, j);
      }
      if (std::abs(cum - section_targets[static_cast<std::size_t>(k) - 1]) > tol) {
        throw validation_error("section constraint missed at knot " + std::to_string(k));
      }
    }
  }
};

/// Mesh size max_i (dx_i + dy_i) of the n-knot grid; the LP upper bound can
/// exceed the analytic supremum by at most about this much.
inline double checkerboard_mesh(const SectionPair& s, int n) {
  double mesh = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double dx = 1.0 / n;
    const double dy = s.phi(static_cast<double>(i) / n) - s.phi(static_cast<double>(i - 1) / n);
    mesh = std::max(mesh, dx + dy);
  }
  return mesh;
}

/// LP over cell masses: marginal strip equalities, cumulative section
/// equalities at the interior knots, objective = cumulative mass over
/// [0, xs[a]] x [0, ys[b]].
inline DenseLP build_checkerboard_lp(const EvalContext& ctx, int n, int a, int b) {
  if (n < 2 || n > 64) throw domain_error("checkerboard knot count must be in [2, 64]");
  if (a <= 0 || a >= n || b <= 0 || b >= n) {
    throw domain_error("objective node indices must be interior (0 < a,b < n)");
  }
  const SectionPair& s = ctx.section();
  DenseLP lp;
  lp.cols = n * n;
  lp.rows = 3 * n - 1;
  lp.a.assign(static_cast<std::size_t>(lp.rows) * lp.cols, 0.0);
  lp.rhs.assign(lp.rows, 0.0);
  lp.objective.assign(lp.cols, 0.0);
  auto var = [n](int i, int j) { return i * n + j; };
  int row = 0;
  for (int i = 0; i < n; ++i, ++row) {
    for (int j = 0; j < n; ++j) lp.at(row, var(i, j)) = 1.0;
    lp.rhs[row] = (i + 1.0) / n - static_cast<double>(i) / n;
  }
  for (int j = 0; j < n; ++j, ++row) {
    for (int i = 0; i < n; ++i) lp.at(row, var(i, j)) = 1.0;
    lp.rhs[row] = s.phi((j + 1.0) / n) - s.phi(static_cast<double>(j) / n);
  }
  for (int k = 1; k < n; ++k, ++row) {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) lp.at(row, var(i, j)) = 1.0;
    }
    lp.rhs[row] = s.gamma(static_cast<double>(k) / n);
  }
  for (int i = 0; i < a; ++i) {
    for (int j = 0; j < b; ++j) lp.objective[var(i, j)] = 1.0;
  }
  return lp;
}

/// Maximal cumulative mass over [0, xs[a]] x [0, ys[b]] subject to the
/// checkerboard constraints. Every copula with this section induces a
/// feasible mass with the same objective value, so the optimum dominates
/// the analytic supremum at grid nodes; feasibility is guaranteed (the
/// Bertino copula restricted to cells is feasible).
inline double lp_sup_at(const EvalContext& ctx, int n, int a, int b,
                        CheckerboardProblem* out = nullptr) {
  const DenseLP lp = build_checkerboard_lp(ctx, n, a, b);
  const SimplexSolution sol = solve_lp(lp);
  if (sol.status == SimplexSolution::Status::Infeasible) {
    throw validation_error("checkerboard LP infeasible: section data is inconsistent");
  }
  if (sol.status != SimplexSolution::Status::Optimal) {
    throw convergence_error("checkerboard LP did not reach an optimum");
  }
  if (out != nullptr) {
    const SectionPair& s = ctx.section();
    out->n = n;
    out->xs.clear();
    out->ys.clear();
    for (int i = 0; i <= n; ++i) {
      out->xs.push_back(static_cast<double>(i) / n);
      out->ys.push_back(s.phi(static_cast<double>(i) / n));
    }
    out->mass = sol.x;
    out->section_targets.clear();
    for (int k = 1; k < n; ++k) {
      out->section_targets.push_back(s.gamma(static_cast<double>(k) / n));
    }
  }
  return sol.objective;
}

/// Cumulative distribution of the checkerboard mass, bilinear within each
/// cell. The extension of any feasible mass passes the quasi-copula and
/// two-increasing grid checks on its own node grid.
inline double checkerboard_extend(const CheckerboardProblem& p, double x, double y) {
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
    throw domain_error("checkerboard extension outside the unit square");
  }
  auto locate = [](const std::vector<double>& cs, double v) {
    auto it = std::upper_bound(cs.begin(), cs.end(), v);
    int i = static_cast<int>(it - cs.begin()) - 1;
    return std::clamp(i, 0, static_cast<int>(cs.size()) - 2);
  };
  const int ci = locate(p.xs, x);
  const int cj = locate(p.ys, y);
  const double fx = (x - p.xs[ci]) / (p.xs[ci + 1] - p.xs[ci]);
  const double fy = (y - p.ys[cj]) / (p.ys[cj + 1] - p.ys[cj]);
  double full = 0.0, strip_x = 0.0, strip_y = 0.0;
  for (int i = 0; i < ci; ++i) {
    for (int j = 0; j < cj; ++j) full += p.cell(i, j);
    strip_y += p.cell(i, cj);
  }
  for (int j = 0; j < cj; ++j) strip_x += p.cell(ci, j);
  return full + fx * strip_x + fy * strip_y + fx * fy * p.cell(ci, cj);
}

}  // namespace curvesec
