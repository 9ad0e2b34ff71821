#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "curvesec/errors.hpp"
#include "curvesec/piecewise.hpp"

namespace curvesec {

inline constexpr double kAdmissibilityTol = 1e-10;

/// A validated reparametrisation of [0,1]: continuous, strictly increasing,
/// fixing 0 and 1. Evaluation is exact at the endpoints; inversion uses the
/// closed form of a piece when it has one and bracketed bisection otherwise.
class CurveMap {
 public:
  static CurveMap validate(PiecewiseFunction f, int samples = 1024) {
    if (std::abs(f(0.0)) > kJunctionTol || std::abs(f(1.0) - 1.0) > kJunctionTol) {
      throw validation_error("curve map must fix the endpoints: f(0)=0, f(1)=1");
    }
    double prev = f(0.0);
    for (int i = 1; i <= samples; ++i) {
      const double t = static_cast<double>(i) / samples;
      const double v = f(t);
      if (!(v - prev > kJunctionTol)) {
        throw validation_error("curve map not strictly increasing near t=" + std::to_string(t));
      }
      prev = v;
    }
    CurveMap m;
    m.f_ = std::move(f);
    m.build_seed_table();
    return m;
  }

  double operator()(double t) const {
    if (t <= 0.0) {
      if (t < 0.0) throw domain_error("curve map eval outside [0,1]");
      return 0.0;
    }
    if (t >= 1.0) {
      if (t > 1.0) throw domain_error("curve map eval outside [0,1]");
      return 1.0;
    }
    return f_(t);
  }

  /// t with |f(t) - y| <= 1e-12; exact 0 and 1 at the ends.
  double inverse(double y) const {
    if (y <= 0.0) {
      if (y < 0.0) throw domain_error("curve map inverse outside [0,1]");
      return 0.0;
    }
    if (y >= 1.0) {
      if (y > 1.0) throw domain_error("curve map inverse outside [0,1]");
      return 1.0;
    }
    const Piece& p = bracket_piece(y);
    if (auto t = closed_form_inverse(p, y)) {
      if (*t >= p.lo - 1e-12 && *t <= p.hi + 1e-12) return std::clamp(*t, 0.0, 1.0);
    }
    // Bisection on the bracketing monotone piece, tightened by the seed table.
    double lo = p.lo, hi = p.hi;
    auto seed = std::lower_bound(seeds_.begin(), seeds_.end(), std::make_pair(y, 0.0));
    if (seed != seeds_.end()) hi = std::min(hi, seed->second);
    if (seed != seeds_.begin()) lo = std::max(lo, std::prev(seed)->second);
    double flo = (*this)(lo) - y;
    if (flo > 1e-9) throw convergence_error("inverse bracketing failed: bad monotonicity data");
    for (int it = 0; it < 200 && hi - lo > 5e-17; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = f_(mid) - y;
      if (fm == 0.0) return mid;
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }

  const PiecewiseFunction& fn() const { return f_; }

 private:
  PiecewiseFunction f_;
  std::vector<std::pair<double, double>> seeds_;  // (y, t) bracketing aid

  void build_seed_table() {
    seeds_.clear();
    const int n = 256;
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      seeds_.push_back({(*this)(t), t});
    }
  }

  const Piece& bracket_piece(double y) const {
    // Pieces are increasing, so their value ranges tile [0,1] in order.
    const auto& ps = f_.pieces();
    std::size_t lo = 0, hi = ps.size();
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (ps[mid].value(ps[mid].lo) <= y) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return ps[lo];
  }

  static std::optional<double> closed_form_inverse(const Piece& p, double y) {
    if (!p.knots.empty()) {
      if (!p.terms.empty()) return std::nullopt;
      // Piecewise-linear inverse.
      const auto& ks = p.knots;
      for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
        if (y >= ks[i][1] - 1e-15 && y <= ks[i + 1][1] + 1e-15) {
          const double dv = ks[i + 1][1] - ks[i][1];
          if (dv <= 0.0) continue;
          return ks[i][0] + (ks[i + 1][0] - ks[i][0]) * (y - ks[i][1]) / dv;
        }
      }
      return std::nullopt;
    }
    double c0 = 0.0;
    const Term* pow_term = nullptr;
    for (const Term& tm : p.terms) {
      if (tm.exponent == 0.0) {
        c0 += tm.coef;
      } else if (pow_term == nullptr) {
        pow_term = &tm;
      } else {
        return std::nullopt;  // two non-constant terms: no closed form here
      }
    }
    if (pow_term == nullptr || pow_term->coef == 0.0) return std::nullopt;
    const double z = (y - c0) / pow_term->coef;
    if (z < 0.0) return std::nullopt;
    if (pow_term->exponent == 1.0) return z;
    return std::pow(z, 1.0 / pow_term->exponent);
  }
};

/// A validated pair (phi, gamma) together with the derived gap functions
/// hat = t - gamma(t) and tilde = phi(t) - gamma(t) and their trend
/// reversal points. Immutable after validation.
struct SectionPair {
  std::string name;
  CurveMap phi;
  PiecewiseFunction gamma;
  PiecewiseFunction hat;
  PiecewiseFunction tilde;
  std::vector<double> hat_breaks;    // interior extrema of hat
  std::vector<double> tilde_breaks;  // interior extrema of tilde

  /// Union of all trend breakpoints of hat, tilde and phi, interior only.
  std::vector<double> all_breaks() const {
    std::vector<double> out = hat.monotone_breaks();
    for (double b : tilde.monotone_breaks()) out.push_back(b);
    for (double b : phi.fn().monotone_breaks()) out.push_back(b);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

/// Checks admissibility of gamma against phi and builds the SectionPair.
///
/// Property (i):   max{0, t+phi(t)-1} <= gamma(t) <= min{t, phi(t)}
/// Property (ii):  0 <= gamma(t2)-gamma(t1) <= (t2-t1) + (phi(t2)-phi(t1))
///
/// Both are certified on `samples` equispaced points enriched with every
/// piece boundary and trend break; (ii) is checked on all sampled pairs.
inline SectionPair validate_section(CurveMap phi, PiecewiseFunction gamma, int samples = 1024,
                                    std::string name = {}) {
  if (samples < 256) samples = 256;
  std::vector<double> ts;
  ts.reserve(static_cast<std::size_t>(samples) + 32);
  for (int i = 0; i <= samples; ++i) ts.push_back(static_cast<double>(i) / samples);
  for (const Piece& p : gamma.pieces()) ts.push_back(p.hi);
  for (const Piece& p : phi.fn().pieces()) ts.push_back(p.hi);
  for (double b : gamma.monotone_breaks()) ts.push_back(b);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  while (!ts.empty() && ts.back() > 1.0) ts.pop_back();

  const double g1 = gamma(1.0);
  if (std::abs(g1 - 1.0) > kAdmissibilityTol) {
    throw validation_error("section endpoint violated: gamma(1) = " + std::to_string(g1));
  }

  std::vector<double> gs(ts.size()), fs(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    gs[i] = gamma(ts[i]);
    fs[i] = phi(ts[i]);
    const double lo = std::max(0.0, ts[i] + fs[i] - 1.0);
    const double hi = std::min(ts[i], fs[i]);
    if (gs[i] < lo - kAdmissibilityTol || gs[i] > hi + kAdmissibilityTol) {
      throw validation_error("admissibility (i) violated at t=" + std::to_string(ts[i]) +
                             ": gamma=" + std::to_string(gs[i]) + " outside [" +
                             std::to_string(lo) + "," + std::to_string(hi) + "]");
    }
  }
  for (std::size_t i = 0; i < ts.size(); ++i) {
    for (std::size_t j = i + 1; j < ts.size(); ++j) {
      const double dg = gs[j] - gs[i];
      if (dg < -kAdmissibilityTol ||
          dg > (ts[j] - ts[i]) + (fs[j] - fs[i]) + kAdmissibilityTol) {
        throw validation_error("admissibility (ii) violated on pair t1=" + std::to_string(ts[i]) +
                               ", t2=" + std::to_string(ts[j]));
      }
    }
  }

  SectionPair s;
  s.name = std::move(name);
  s.hat = combine(1.0, PiecewiseFunction::identity(), -1.0, gamma);
  s.tilde = combine(1.0, phi.fn(), -1.0, gamma);
  s.phi = std::move(phi);
  s.gamma = std::move(gamma);
  s.hat_breaks = s.hat.interior_extrema();
  s.tilde_breaks = s.tilde.interior_extrema();

  // Pointwise reconstruction identities.
  for (double t : ts) {
    if (std::abs(s.hat(t) + s.gamma(t) - t) > kJunctionTol ||
        std::abs(s.tilde(t) + s.gamma(t) - s.phi(t)) > 2e-12) {
      throw validation_error("derived gap functions inconsistent at t=" + std::to_string(t));
    }
  }
  return s;
}

namespace detail {

/// Unique root of phi(t) + t = target inside [lo, hi].
inline double solve_monotone_sum(const CurveMap& phi, double target, double lo, double hi) {
  auto h = [&](double t) { return phi(t) + t - target; };
  double a = lo, b = hi, ha = h(a);
  if (ha > 1e-12 || h(b) < -1e-12) {
    throw validation_error("knot solve failed: interval data incompatible with curve map");
  }
  for (int it = 0; it < 200 && b - a > 5e-17; ++it) {
    const double m = 0.5 * (a + b);
    const double hm = h(m);
    if (hm == 0.0) return m;
    if ((hm < 0.0) == (ha < 0.0)) {
      a = m;
      ha = hm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

/// Sign-change points of phi(t) - t inside (lo, hi).
inline std::vector<double> curve_identity_crossings(const CurveMap& phi, double lo, double hi) {
  std::vector<double> out;
  const int n = 512;
  auto g = [&](double t) { return phi(t) - t; };
  double prev_t = lo, prev_v = g(lo);
  for (int i = 1; i <= n; ++i) {
    const double t = lo + (hi - lo) * (static_cast<double>(i) / n);
    const double v = g(t);
    if ((prev_v < 0.0 && v > 0.0) || (prev_v > 0.0 && v < 0.0)) {
      double a = prev_t, b = t, va = prev_v;
      for (int k = 0; k < 200 && b - a > 5e-17; ++k) {
        const double m = 0.5 * (a + b);
        const double vm = g(m);
        if (vm == 0.0) {
          a = b = m;
          break;
        }
        if ((vm < 0.0) == (va < 0.0)) {
          a = m;
          va = vm;
        } else {
          b = m;
        }
      }
      out.push_back(0.5 * (a + b));
    }
    prev_t = t;
    prev_v = v;
  }
  return out;
}

/// Pieces of min{t, phi(t)} over [lo, hi], appended to dst.
inline void append_lower_envelope(const CurveMap& phi, double lo, double hi,
                                  std::vector<Piece>& dst) {
  std::vector<double> cuts{lo};
  for (const Piece& p : phi.fn().pieces()) {
    if (p.hi > lo && p.hi < hi) cuts.push_back(p.hi);
  }
  for (double c : curve_identity_crossings(phi, lo, hi)) cuts.push_back(c);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return std::abs(a - b) <= 1e-14; }),
             cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const double mid = 0.5 * (a + b);
    Piece p;
    p.lo = a;
    p.hi = b;
    if (phi(mid) <= mid) {
      p.terms = phi.fn().piece_at(mid).terms;
      p.knots = phi.fn().piece_at(mid).knots;
    } else {
      p.terms = {{1.0, 1.0}};
    }
    dst.push_back(std::move(p));
  }
}

}  // namespace detail

/// Section determined by a family of pairwise disjoint open intervals
/// (a_i, b_i): constant at min{a_i, phi(a_i)} up to the interior knot u_i,
/// then phi(t) + t - max{b_i, phi(b_i)} up to b_i, and min{t, phi(t)}
/// elsewhere. The knot solves phi(t) + t = min{a_i, phi(a_i)} + max{b_i, phi(b_i)}.
inline SectionPair interval_family_section(CurveMap phi,
                                           std::vector<std::pair<double, double>> intervals,
                                           int samples = 1024, std::string name = {}) {
  std::sort(intervals.begin(), intervals.end());
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& [a, b] = intervals[i];
    if (!(a >= 0.0 && b <= 1.0 && a < b)) {
      throw domain_error("interval family: intervals must be inside [0,1] and non-empty");
    }
    if (i > 0 && intervals[i - 1].second > a) {
      throw domain_error("interval family: intervals must be pairwise disjoint");
    }
  }
  std::vector<Piece> pieces;
  double cursor = 0.0;
  for (const auto& [a, b] : intervals) {
    if (a > cursor) detail::append_lower_envelope(phi, cursor, a, pieces);
    const double m = std::min(a, phi(a));
    const double big = std::max(b, phi(b));
    const double knot = detail::solve_monotone_sum(phi, m + big, a, b);
    if (knot > a) {
      Piece flat;
      flat.lo = a;
      flat.hi = knot;
      flat.terms = {{m, 0.0}};
      pieces.push_back(std::move(flat));
    }
    // phi(t) + t - big, split along phi's own pieces
    std::vector<double> cuts{knot};
    for (const Piece& p : phi.fn().pieces()) {
      if (p.hi > knot && p.hi < b) cuts.push_back(p.hi);
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      Piece ramp;
      ramp.lo = cuts[i];
      ramp.hi = cuts[i + 1];
      const Piece& src = phi.fn().piece_at(0.5 * (cuts[i] + cuts[i + 1]));
      ramp.terms = src.terms;
      ramp.knots = src.knots;
      bool merged_lin = false, merged_const = false;
      for (Term& tm : ramp.terms) {
        if (tm.exponent == 1.0) {
          tm.coef += 1.0;
          merged_lin = true;
        }
        if (tm.exponent == 0.0) {
          tm.coef -= big;
          merged_const = true;
        }
      }
      if (!merged_lin) ramp.terms.push_back({1.0, 1.0});
      if (!merged_const) ramp.terms.push_back({-big, 0.0});
      pieces.push_back(std::move(ramp));
    }
    cursor = b;
  }
  if (cursor < 1.0) detail::append_lower_envelope(phi, cursor, 1.0, pieces);
  PiecewiseFunction gamma = PiecewiseFunction::from_pieces(std::move(pieces));
  return validate_section(std::move(phi), std::move(gamma), samples, std::move(name));
}

/// Built-in sections used throughout the tests and the CLI.
inline SectionPair builtin_section(std::string_view name, int samples = 1024) {
  auto quad = [] { return CurveMap::validate(PiecewiseFunction::power_sum({{1.0, 2.0}})); };
  if (name == "example-1") {
    return validate_section(quad(), PiecewiseFunction::power_sum({{1.0, 3.0}}), samples,
                            "example-1");
  }
  if (name == "example-2" || name == "example-3") {
    // Flat start, two ramps of slope 1 + phi', flat middle; ends on the curve.
    const double t0 = (std::sqrt(1229.0) / 15.0 - 1.0) / 2.0;  // root of t^2 + t = 251/225
    const double c = 26.0 / 225.0;
    std::vector<Piece> ps(4);
    ps[0] = {0.0, 1.0 / 3.0, {{0.0, 0.0}}, {}, Monotonicity::Increasing};
    ps[1] = {1.0 / 3.0, 0.4, {{-4.0 / 9.0, 0.0}, {1.0, 1.0}, {1.0, 2.0}}, {}, Monotonicity::Increasing};
    ps[2] = {0.4, t0, {{c, 0.0}}, {}, Monotonicity::Increasing};
    ps[3] = {t0, 1.0, {{-1.0, 0.0}, {1.0, 1.0}, {1.0, 2.0}}, {}, Monotonicity::Increasing};
    return validate_section(quad(), PiecewiseFunction::from_pieces(std::move(ps)), samples,
                            std::string(name));
  }
  if (name == "example-5ii") {
    std::vector<Piece> phi_ps(3);
    phi_ps[0] = {0.0, 0.25, {{0.5, 0.5}}, {}, Monotonicity::Increasing};
    phi_ps[1] = {0.25, 0.75, {{1.0, 1.0}}, {}, Monotonicity::Increasing};
    phi_ps[2] = {0.75, 1.0, {{3.0 / 7.0, 0.0}, {4.0 / 7.0, 2.0}}, {}, Monotonicity::Increasing};
    std::vector<Piece> g_ps(5);
    g_ps[0] = {0.0, 0.25, {{1.0, 1.0}, {-1.0, 2.0}}, {}, Monotonicity::Increasing};
    g_ps[1] = {0.25, 0.5, {{-3.0 / 32.0, 0.0}, {9.0 / 8.0, 1.0}}, {}, Monotonicity::Increasing};
    g_ps[2] = {0.5, 0.75, {{-1.0 / 32.0, 0.0}, {1.0, 1.0}}, {}, Monotonicity::Increasing};
    g_ps[3] = {0.75, 0.875, {{17.0 / 32.0, 0.0}, {0.25, 1.0}}, {}, Monotonicity::Increasing};
    g_ps[4] = {0.875, 1.0, {{-1.0, 0.0}, {2.0, 1.0}}, {}, Monotonicity::Increasing};
    return validate_section(CurveMap::validate(PiecewiseFunction::from_pieces(std::move(phi_ps))),
                            PiecewiseFunction::from_pieces(std::move(g_ps)), samples,
                            "example-5ii");
  }
  if (name == "diag-pi") {
    return validate_section(CurveMap::validate(PiecewiseFunction::identity()),
                            PiecewiseFunction::power_sum({{1.0, 2.0}}), samples, "diag-pi");
  }
  throw parse_error("unknown builtin section: " + std::string(name));
}

inline std::vector<std::string> builtin_names() {
  return {"example-1", "example-2", "example-5ii", "diag-pi"};
}

}  // namespace curvesec
