#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "curvesec/errors.hpp"
#include "curvesec/surfaces.hpp"

namespace curvesec {

/// Values of a bivariate surface on a rectangular grid, row-major in x.
/// Immutable after fill.
struct GridSurface {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> values;  // values[i * ys.size() + j] = surface(xs[i], ys[j])
  std::optional<SurfaceKind> kind;

  double at(std::size_t i, std::size_t j) const { return values[i * ys.size() + j]; }
  std::size_t nx() const { return xs.size(); }
  std::size_t ny() const { return ys.size(); }

  /// Unchecked carrier for externally produced values (tests, checkerboard
  /// extensions). The check routines report any defect instead of throwing.
  static GridSurface from_values(std::vector<double> xs, std::vector<double> ys,
                                 std::vector<double> values,
                                 std::optional<SurfaceKind> kind = std::nullopt) {
    if (values.size() != xs.size() * ys.size()) {
      throw domain_error("grid values size does not match coordinates");
    }
    return GridSurface{std::move(xs), std::move(ys), std::move(values), kind};
  }
};

/// n equispaced coordinates covering [0,1].
inline std::vector<double> uniform_coords(int n) {
  if (n < 2) throw domain_error("a coordinate axis needs at least 2 points");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n - 1);
  out.front() = 0.0;
  out.back() = 1.0;
  return out;
}

inline void validate_coords(const std::vector<double>& cs) {
  if (cs.size() < 2 || cs.front() != 0.0 || cs.back() != 1.0) {
    throw domain_error("grid coordinates must run from 0 to 1");
  }
  for (std::size_t i = 0; i + 1 < cs.size(); ++i) {
    if (!(cs[i] < cs[i + 1])) throw domain_error("grid coordinates must be strictly increasing");
  }
}

/// Fills the full matrix. Deterministic for fixed inputs regardless of the
/// worker count: rows are partitioned and each worker evaluates through its
/// own context, so no result depends on scheduling.
inline GridSurface fill_grid(const EvalContext& ctx, SurfaceKind kind, std::vector<double> xs,
                             std::vector<double> ys, int workers = 1) {
  validate_coords(xs);
  validate_coords(ys);
  GridSurface g;
  g.kind = kind;
  g.xs = std::move(xs);
  g.ys = std::move(ys);
  g.values.assign(g.xs.size() * g.ys.size(), 0.0);
  const SectionPair& section = ctx.section();

  auto fill_rows = [&](std::size_t i_begin, std::size_t i_end) {
    EvalContext local(section);
    for (std::size_t i = i_begin; i < i_end; ++i) {
      for (std::size_t j = 0; j < g.ys.size(); ++j) {
        g.values[i * g.ys.size() + j] = surface(local, kind, g.xs[i], g.ys[j]);
      }
    }
  };

  const std::size_t rows = g.xs.size();
  const int nw = std::max(1, std::min<int>(workers, static_cast<int>(rows)));
  if (nw == 1) {
    fill_rows(0, rows);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (rows + nw - 1) / nw;
    for (int w = 0; w < nw; ++w) {
      const std::size_t b = std::min(rows, static_cast<std::size_t>(w) * chunk);
      const std::size_t e = std::min(rows, b + chunk);
      if (b < e) pool.emplace_back(fill_rows, b, e);
    }
    for (auto& t : pool) t.join();
  }

  // Every surface except the raw f1/f2 operands must stay inside the
  // Frechet-Hoeffding band; a value outside it is an evaluator defect.
  if (kind == SurfaceKind::F1 || kind == SurfaceKind::F2) return g;
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.ny(); ++j) {
      const double v = g.at(i, j);
      const double w = std::max(g.xs[i] + g.ys[j] - 1.0, 0.0);
      const double m = std::min(g.xs[i], g.ys[j]);
      if (v < w - 1e-9 || v > m + 1e-9) {
        throw convergence_error("grid value escapes the W..M band at (" +
                                std::to_string(g.xs[i]) + "," + std::to_string(g.ys[j]) + ")");
      }
    }
  }
  return g;
}

}  // namespace curvesec
