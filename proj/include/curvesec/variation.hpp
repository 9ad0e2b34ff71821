#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "curvesec/errors.hpp"
#include "curvesec/piecewise.hpp"

namespace curvesec {

enum class VariationMethod { MonotoneExact, Adaptive, Alternating };

/// Interval variation request. a > b is allowed and flips the sign:
/// variation from b to a equals minus the variation from a to b, and the
/// degenerate interval gives zero.
struct VariationQuery {
  const PiecewiseFunction* f = nullptr;
  double a = 0.0;
  double b = 1.0;
  VariationMethod method = VariationMethod::MonotoneExact;
};

namespace detail {

inline double partition_sum(const PiecewiseFunction& f, double lo, double hi, long n) {
  double sum = 0.0;
  double prev = f(lo);
  for (long i = 1; i <= n; ++i) {
    const double t = lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(n));
    const double v = f(t);
    sum += std::abs(v - prev);
    prev = v;
  }
  return sum;
}

inline double adaptive_variation(const PiecewiseFunction& f, double lo, double hi) {
  if (lo == hi) return 0.0;
  // Point sampling misses a smooth peak by (distance to nearest node)^2,
  // and whole refinement levels can tie exactly away from the peak, so the
  // successive-difference test only starts once the lattice is fine enough
  // for that blind spot to sit below the tolerance.
  double prev = partition_sum(f, lo, hi, 1L << 17);
  for (int depth = 18; depth <= 24; ++depth) {
    const double cur = partition_sum(f, lo, hi, 1L << depth);
    if (cur - prev < 1e-9) return cur;
    prev = cur;
  }
  const double last = partition_sum(f, lo, hi, 1L << 24);
  throw convergence_error("adaptive variation did not settle at max depth; last estimates " +
                          std::to_string(prev) + " and " + std::to_string(last));
}

}  // namespace detail

/// Best value of the alternating objective
///   2*sum f(x_odd) - 2*sum f(x_even interior) - f(a) - f(b)
/// over alternating partitions assembled from the trend reversal points of
/// f plus dyadic refinements up to roughly `partitions` subdivisions.
/// Always a lower bound on the total variation; equal to it when the trend
/// breaks are known exactly.
inline double alternating_variation(const PiecewiseFunction& f, double a, double b,
                                    int partitions = 256) {
  if (!(a < b)) throw domain_error("alternating variation needs a < b");
  auto objective_on = [&](const std::vector<double>& pts) {
    // Keep peaks and valleys of the polyline, then pad so that odd slots
    // hold the peaks, duplicating an endpoint when the walk starts or ends
    // on a descent. The padded sequence satisfies
    // f(y_{2k-1}) >= max(f(y_{2k-2}), f(y_{2k})).
    std::vector<double> v;
    v.reserve(pts.size());
    for (double t : pts) v.push_back(f(t));
    std::vector<double> kept{v.front()};
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      const double dl = v[i] - kept.back(), dr = v[i + 1] - v[i];
      if ((dl > 0.0 && dr < 0.0) || (dl < 0.0 && dr > 0.0)) kept.push_back(v[i]);
    }
    kept.push_back(v.back());
    std::vector<double> alt;
    alt.push_back(kept.front());
    for (std::size_t i = 1; i < kept.size(); ++i) {
      const bool rising = kept[i] >= kept[i - 1];
      const bool odd_slot = alt.size() % 2 == 1;
      if (rising != odd_slot) alt.push_back(alt.back());  // duplicate to re-phase
      alt.push_back(kept[i]);
    }
    if (alt.size() % 2 == 0) alt.push_back(alt.back());
    double odd = 0.0, even_interior = 0.0;
    for (std::size_t i = 1; i + 1 < alt.size(); ++i) {
      if (i % 2 == 1) {
        odd += alt[i];
      } else {
        even_interior += alt[i];
      }
    }
    return 2.0 * odd - 2.0 * even_interior - alt.front() - alt.back();
  };

  double best = 0.0;
  // Trend-break partition.
  {
    std::vector<double> pts{a};
    for (double t : f.monotone_breaks()) {
      if (t > a && t < b) pts.push_back(t);
    }
    pts.push_back(b);
    best = std::max(best, objective_on(pts));
  }
  // Dyadic refinements, with the trend breaks merged in.
  for (int n = 2; n <= std::max(2, partitions); n *= 2) {
    std::vector<double> pts;
    for (int i = 0; i <= n; ++i) pts.push_back(a + (b - a) * (static_cast<double>(i) / n));
    for (double t : f.monotone_breaks()) {
      if (t > a && t < b) pts.push_back(t);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    best = std::max(best, objective_on(pts));
  }
  return best;
}

/// Signed total variation per the query's method.
inline double total_variation(const VariationQuery& q) {
  if (q.f == nullptr) throw domain_error("variation query without a function");
  const double lo = std::min(q.a, q.b), hi = std::max(q.a, q.b);
  if (!(lo >= 0.0 && hi <= 1.0)) throw domain_error("variation interval outside [0,1]");
  double v = 0.0;
  switch (q.method) {
    case VariationMethod::MonotoneExact:
      if (!q.f->profile().resolved) {
        throw validation_error("monotone-exact variation requested without monotone metadata");
      }
      v = q.f->variation(lo, hi);
      break;
    case VariationMethod::Adaptive:
      v = detail::adaptive_variation(*q.f, lo, hi);
      break;
    case VariationMethod::Alternating:
      v = (lo == hi) ? 0.0 : alternating_variation(*q.f, lo, hi);
      break;
  }
  return q.a <= q.b ? v : -v;
}

}  // namespace curvesec
