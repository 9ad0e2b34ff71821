#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "curvesec/errors.hpp"
#include "curvesec/piecewise.hpp"
#include "curvesec/section.hpp"

namespace curvesec {

/// Draws an admissible section for the given curve map, admissible by
/// construction rather than by rejection:
///
///   raw(t) = integral of lambda(s) d(s + phi(s)) with lambda piecewise
///   constant in [0,1], rebalanced so raw(1) = 1 (scaled down when the mass
///   exceeds 1, blended toward full density when it falls short; both keep
///   lambda inside [0,1]). gamma = min{raw, t, phi(t)} then satisfies both
///   admissibility properties, and raw(1) = 1 pins the lower bound.
///
/// Requires a curve map whose pieces are pure power sums.
inline SectionPair random_admissible_section(const CurveMap& phi, std::uint64_t seed,
                                             int lambda_pieces = 8, int samples = 512,
                                             std::string name = {}) {
  for (const Piece& p : phi.fn().pieces()) {
    if (!p.knots.empty()) {
      throw domain_error("section generator needs a power-sum curve map");
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Density breakpoints: even spacing united with the curve map's pieces.
  std::vector<double> cuts;
  for (int i = 0; i <= lambda_pieces; ++i) {
    cuts.push_back(static_cast<double>(i) / lambda_pieces);
  }
  for (const Piece& p : phi.fn().pieces()) cuts.push_back(p.hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return std::abs(a - b) <= 1e-13; }),
             cuts.end());
  std::vector<double> lambda(cuts.size() - 1);
  for (double& l : lambda) l = unif(rng);

  auto mass_of = [&](const std::vector<double>& lam) {
    double m = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      m += lam[k] * ((cuts[k + 1] - cuts[k]) + (phi(cuts[k + 1]) - phi(cuts[k])));
    }
    return m;
  };
  const double mass = mass_of(lambda);
  if (mass > 1.0) {
    for (double& l : lambda) l /= mass;
  } else if (mass < 1.0) {
    const double alpha = 1.0 / (2.0 - mass);
    for (double& l : lambda) l = alpha * l + (1.0 - alpha);
  }

  // raw as exact power-sum pieces: raw(t) = base + lambda*(t + phi(t) - c).
  struct RawPiece {
    double lo, hi, lam, offset;  // value = offset + lam*t + lam*phi_terms(t)
    std::vector<Term> terms;
  };
  std::vector<RawPiece> raw;
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    RawPiece rp;
    rp.lo = cuts[k];
    rp.hi = cuts[k + 1];
    rp.lam = lambda[k];
    rp.offset = acc - lambda[k] * (cuts[k] + phi(cuts[k]));
    const Piece& src = phi.fn().piece_at(0.5 * (rp.lo + rp.hi));
    rp.terms.push_back({rp.offset, 0.0});
    bool merged = false;
    for (const Term& tm : src.terms) {
      Term scaled{lambda[k] * tm.coef, tm.exponent};
      if (scaled.exponent == 1.0) {
        scaled.coef += lambda[k];
        merged = true;
      }
      rp.terms.push_back(scaled);
    }
    if (!merged) rp.terms.push_back({lambda[k], 1.0});
    acc += lambda[k] * ((cuts[k + 1] - cuts[k]) + (phi(cuts[k + 1]) - phi(cuts[k])));
    raw.push_back(std::move(rp));
  }

  auto raw_value = [&](double t) {
    auto it = std::upper_bound(raw.begin(), raw.end(), t,
                               [](double v, const RawPiece& r) { return v < r.lo; });
    std::size_t i = static_cast<std::size_t>(it - raw.begin());
    if (i > 0) --i;
    double v = 0.0;
    for (const Term& tm : raw[i].terms) v += tm.coef * (tm.exponent == 0.0 ? 1.0 : std::pow(t, tm.exponent));
    return v;
  };

  auto raw_slope = [&](double t) {
    auto it = std::upper_bound(raw.begin(), raw.end(), t,
                               [](double v, const RawPiece& r) { return v < r.lo; });
    std::size_t i = static_cast<std::size_t>(it - raw.begin());
    if (i > 0) --i;
    return raw[i].lam * (1.0 + phi.fn().piece_at(t).slope(t));
  };

  // gamma = min of {raw, id, phi}: split at every pairwise sign change.
  // Roots are bracketed between the slope extrema of each difference so a
  // shallow double crossing inside one cell cannot slip through.
  std::vector<double> bounds = cuts;
  auto bisect_root = [](auto&& f, double a, double b, double va) {
    while (b - a > 1e-15) {
      const double m = 0.5 * (a + b);
      const double vm = f(m);
      if (vm == 0.0) return m;
      if ((vm < 0.0) == (va < 0.0)) {
        a = m;
        va = vm;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  };
  auto add_crossings = [&](auto&& f, auto&& fslope) {
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      std::vector<double> marks{cuts[k]};
      const int grid = 64;
      const double w = cuts[k + 1] - cuts[k];
      double prev_t = cuts[k] + w * (0.25 / grid);
      double prev_s = fslope(prev_t);
      for (int i = 1; i < grid; ++i) {
        const double t = cuts[k] + w * ((i + 0.25) / grid);
        const double s = fslope(t);
        if ((prev_s < 0.0 && s > 0.0) || (prev_s > 0.0 && s < 0.0)) {
          marks.push_back(bisect_root(fslope, prev_t, t, prev_s));
        }
        prev_t = t;
        prev_s = s;
      }
      marks.push_back(cuts[k + 1]);
      for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
        const double va = f(marks[i]), vb = f(marks[i + 1]);
        if ((va < 0.0 && vb > 0.0) || (va > 0.0 && vb < 0.0)) {
          bounds.push_back(bisect_root(f, marks[i], marks[i + 1], va));
        }
      }
    }
  };
  add_crossings([&](double t) { return raw_value(t) - t; },
                [&](double t) { return raw_slope(t) - 1.0; });
  add_crossings([&](double t) { return raw_value(t) - phi(t); },
                [&](double t) { return raw_slope(t) - phi.fn().piece_at(t).slope(t); });
  add_crossings([&](double t) { return phi(t) - t; },
                [&](double t) { return phi.fn().piece_at(t).slope(t) - 1.0; });
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end(),
                           [](double a, double b) { return std::abs(a - b) <= 1e-13; }),
               bounds.end());
  if (bounds.front() != 0.0) bounds.front() = 0.0;
  if (bounds.back() != 1.0) bounds.back() = 1.0;

  std::vector<Piece> pieces;
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    const double lo = bounds[k], hi = bounds[k + 1];
    const double mid = 0.5 * (lo + hi);
    const double rv = raw_value(mid), iv = mid, pv = phi(mid);
    Piece p;
    p.lo = lo;
    p.hi = hi;
    if (rv <= iv && rv <= pv) {
      auto it = std::upper_bound(raw.begin(), raw.end(), mid,
                                 [](double v, const RawPiece& r) { return v < r.lo; });
      std::size_t i = static_cast<std::size_t>(it - raw.begin());
      if (i > 0) --i;
      p.terms = raw[i].terms;
    } else if (iv <= pv) {
      p.terms = {{1.0, 1.0}};
    } else {
      p.terms = phi.fn().piece_at(mid).terms;
    }
    pieces.push_back(std::move(p));
  }
  PiecewiseFunction gamma = PiecewiseFunction::from_pieces(std::move(pieces));
  return validate_section(phi, std::move(gamma), samples,
                          name.empty() ? "generated-" + std::to_string(seed) : std::move(name));
}

}  // namespace curvesec
