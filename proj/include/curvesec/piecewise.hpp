#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "curvesec/errors.hpp"

namespace curvesec {

inline constexpr double kJunctionTol = 1e-12;

enum class Monotonicity { Increasing, Decreasing, NonMonotone };

/// One addend of a power sum: coef * t^exponent, exponent >= 0.
struct Term {
  double coef = 0.0;
  double exponent = 0.0;
};

/// A piece of a scalar function on a subinterval of [0,1].
///
/// The value is the sum of a power series part and an optional
/// piecewise-linear part (knots interpolated linearly). Plain power-sum
/// pieces have no knots; plain tables have no terms. Differences of the
/// two kinds stay representable, which keeps derived functions exact.
struct Piece {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<Term> terms;
  std::vector<std::array<double, 2>> knots;  // (t, value), strictly increasing in t
  Monotonicity mono = Monotonicity::NonMonotone;

  double value(double t) const {
    double v = 0.0;
    for (const Term& tm : terms) {
      if (tm.exponent == 0.0) {
        v += tm.coef;
      } else if (tm.exponent == 1.0) {
        v += tm.coef * t;
      } else if (tm.exponent == 2.0) {
        v += tm.coef * t * t;
      } else if (tm.exponent == 3.0) {
        v += tm.coef * t * t * t;
      } else {
        v += tm.coef * std::pow(t, tm.exponent);
      }
    }
    if (!knots.empty()) v += linear_value(t);
    return v;
  }

  /// Analytic derivative of the power part plus the local table slope.
  /// May be +/-inf at t=0 for exponents below one.
  double slope(double t) const {
    double s = 0.0;
    for (const Term& tm : terms) {
      if (tm.exponent == 0.0) continue;
      if (tm.exponent == 1.0) {
        s += tm.coef;
      } else if (tm.exponent == 2.0) {
        s += 2.0 * tm.coef * t;
      } else if (tm.exponent == 3.0) {
        s += 3.0 * tm.coef * t * t;
      } else {
        s += tm.coef * tm.exponent * std::pow(t, tm.exponent - 1.0);
      }
    }
    if (knots.size() >= 2) {
      std::size_t k = segment_index(t);
      const double dt = knots[k + 1][0] - knots[k][0];
      if (dt > 0.0) s += (knots[k + 1][1] - knots[k][1]) / dt;
    }
    return s;
  }

  /// True when the power part is a polynomial of degree <= max_degree
  /// (integer exponents) and there is no table part.
  bool is_polynomial(int max_degree) const {
    return knots.empty() && power_degree_leq(max_degree);
  }

  bool power_degree_leq(int max_degree) const {
    for (const Term& tm : terms) {
      const double e = tm.exponent;
      if (e != std::floor(e) || e < 0.0 || e > static_cast<double>(max_degree)) return false;
    }
    return true;
  }

  double linear_value(double t) const {
    if (knots.size() == 1) return knots.front()[1];
    std::size_t k = segment_index(t);
    const double t0 = knots[k][0], t1 = knots[k + 1][0];
    const double v0 = knots[k][1], v1 = knots[k + 1][1];
    if (t1 == t0) return v0;
    const double w = (t - t0) / (t1 - t0);
    return v0 + w * (v1 - v0);
  }

 private:
  std::size_t segment_index(double t) const {
    // Last segment whose start is <= t, clamped to valid range.
    std::size_t n = knots.size();
    auto it = std::upper_bound(knots.begin(), knots.end(), t,
                               [](double v, const std::array<double, 2>& k) { return v < k[0]; });
    std::size_t idx = static_cast<std::size_t>(it - knots.begin());
    if (idx > 0) --idx;
    if (idx >= n - 1) idx = n - 2;
    return idx;
  }
};

/// Monotone decomposition of a piecewise function: break locations where
/// the trend can change, values there, prefix sums of absolute increments
/// and the per-segment direction (+1, -1, or 0 for flat).
struct MonotoneProfile {
  std::vector<double> breaks;
  std::vector<double> values;
  std::vector<double> prefix;  // prefix[i] = variation from breaks[0] to breaks[i]
  std::vector<int> dir;        // size breaks.size()-1
  bool resolved = true;        // false when some piece defied the trend scan
};

namespace detail {

inline int sign_of(double x, double eps = 0.0) {
  if (x > eps) return 1;
  if (x < -eps) return -1;
  return 0;
}

/// Roots of q2 t^2 + q1 t + q0 in the open interval (lo, hi).
inline std::vector<double> quadratic_roots_in(double q2, double q1, double q0, double lo,
                                              double hi) {
  std::vector<double> out;
  auto push = [&](double r) {
    if (r > lo && r < hi) out.push_back(r);
  };
  if (std::abs(q2) < 1e-300) {
    if (std::abs(q1) > 1e-300) push(-q0 / q1);
    return out;
  }
  const double disc = q1 * q1 - 4.0 * q2 * q0;
  if (disc < 0.0) return out;
  const double sq = std::sqrt(disc);
  // Stable pairing: avoid cancellation in the small root.
  const double q = -0.5 * (q1 + (q1 >= 0.0 ? sq : -sq));
  if (std::abs(q2) > 0.0) push(q / q2);
  if (std::abs(q) > 0.0) push(q0 / q);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

/// A scalar function on [0,1] stored as contiguous pieces, immutable after
/// construction. Construction validates the partition, junction continuity
/// and per-piece monotonicity flags, and precomputes the monotone profile
/// used for exact interval variation and extrema queries.
class PiecewiseFunction {
 public:
  PiecewiseFunction() = default;

  static PiecewiseFunction from_pieces(std::vector<Piece> pieces) {
    PiecewiseFunction f;
    f.init(std::move(pieces));
    return f;
  }

  /// Single power-sum over all of [0,1].
  static PiecewiseFunction power_sum(std::vector<Term> terms) {
    Piece p;
    p.lo = 0.0;
    p.hi = 1.0;
    p.terms = std::move(terms);
    return from_pieces({std::move(p)});
  }

  static PiecewiseFunction identity() { return power_sum({{1.0, 1.0}}); }

  bool empty() const { return pieces_.empty(); }
  const std::vector<Piece>& pieces() const { return pieces_; }
  const MonotoneProfile& profile() const { return profile_; }

  double operator()(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw domain_error("piecewise eval: argument " + std::to_string(t) + " outside [0,1]");
    }
    return pieces_[piece_index(t)].value(t);
  }

  /// Piece containing t; at an interior junction the left piece wins.
  const Piece& piece_at(double t) const { return pieces_[piece_index(t)]; }

  /// Unsigned total variation over [a,b], a <= b, exact on the profile.
  double variation(double a, double b) const {
    check_interval(a, b);
    if (a == b) return 0.0;
    std::size_t sa = segment_of(a), sb = segment_of(b);
    const double fa = (*this)(a), fb = (*this)(b);
    if (sa == sb) return std::abs(fb - fa);
    double v = std::abs(profile_.values[sa + 1] - fa);
    v += profile_.prefix[sb] - profile_.prefix[sa + 1];
    v += std::abs(fb - profile_.values[sb]);
    return v;
  }

  double interval_min(double a, double b) const { return interval_extremum(a, b, true); }
  double interval_max(double a, double b) const { return interval_extremum(a, b, false); }

  /// All interior profile breaks (monotone-segment boundaries).
  std::vector<double> monotone_breaks() const {
    std::vector<double> out;
    for (std::size_t i = 1; i + 1 < profile_.breaks.size(); ++i) out.push_back(profile_.breaks[i]);
    return out;
  }

  /// Interior points where the trend reverses; for flat plateaus between
  /// opposite trends both plateau edges are reported.
  std::vector<double> interior_extrema() const {
    std::vector<double> out;
    const auto& d = profile_.dir;
    int last = 0;             // last non-flat direction seen
    std::size_t last_i = 0;   // segment index where it ended
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d[i] == 0) continue;
      if (last != 0 && d[i] != last) {
        out.push_back(profile_.breaks[last_i + 1]);
        if (i != last_i + 1) out.push_back(profile_.breaks[i]);  // plateau far edge
      }
      last = d[i];
      last_i = i;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  std::vector<Piece> pieces_;
  std::vector<double> piece_his_;
  MonotoneProfile profile_;

  std::size_t piece_index(double t) const {
    auto it = std::lower_bound(piece_his_.begin(), piece_his_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - piece_his_.begin());
    if (i >= pieces_.size()) i = pieces_.size() - 1;
    return i;
  }

  std::size_t segment_of(double t) const {
    const auto& br = profile_.breaks;
    auto it = std::upper_bound(br.begin(), br.end(), t);
    std::size_t i = static_cast<std::size_t>(it - br.begin());
    if (i > 0) --i;
    if (i >= br.size() - 1) i = br.size() - 2;
    return i;
  }

  void check_interval(double a, double b) const {
    if (!(a >= 0.0 && b <= 1.0 && a <= b)) {
      throw domain_error("interval [" + std::to_string(a) + "," + std::to_string(b) +
                         "] not inside [0,1]");
    }
  }

  double interval_extremum(double a, double b, bool want_min) const {
    check_interval(a, b);
    double best = (*this)(a);
    const double fb = (*this)(b);
    best = want_min ? std::min(best, fb) : std::max(best, fb);
    const auto& br = profile_.breaks;
    const std::size_t first =
        static_cast<std::size_t>(std::upper_bound(br.begin(), br.end(), a) - br.begin());
    const std::size_t last =
        static_cast<std::size_t>(std::lower_bound(br.begin(), br.end(), b) - br.begin());
    for (std::size_t k = first; k < last; ++k) {
      best = want_min ? std::min(best, profile_.values[k]) : std::max(best, profile_.values[k]);
    }
    return best;
  }

  void init(std::vector<Piece> pieces) {
    if (pieces.empty()) throw validation_error("piecewise function needs at least one piece");
    std::sort(pieces.begin(), pieces.end(),
              [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
    if (std::abs(pieces.front().lo) > kJunctionTol || std::abs(pieces.back().hi - 1.0) > kJunctionTol) {
      throw validation_error("piece domains must cover [0,1]");
    }
    pieces.front().lo = 0.0;
    pieces.back().hi = 1.0;
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
      if (std::abs(pieces[i].hi - pieces[i + 1].lo) > kJunctionTol) {
        throw validation_error("non-contiguous pieces at t=" + std::to_string(pieces[i].hi));
      }
      pieces[i + 1].lo = pieces[i].hi;
      const double left = pieces[i].value(pieces[i].hi);
      const double right = pieces[i + 1].value(pieces[i + 1].lo);
      if (std::abs(left - right) > kJunctionTol) {
        throw validation_error("discontinuity " + std::to_string(left - right) + " at junction t=" +
                               std::to_string(pieces[i].hi));
      }
    }
    for (const Piece& p : pieces) {
      if (!(p.hi > p.lo)) throw validation_error("empty piece domain");
      for (const Term& tm : p.terms) {
        if (!std::isfinite(tm.coef) || !std::isfinite(tm.exponent) || tm.exponent < 0.0) {
          throw validation_error("power-sum term must have finite coef and exponent >= 0");
        }
      }
      for (std::size_t k = 0; k + 1 < p.knots.size(); ++k) {
        if (!(p.knots[k][0] < p.knots[k + 1][0])) {
          throw validation_error("table knots must be strictly increasing in t");
        }
      }
      if (!p.knots.empty() &&
          (p.knots.front()[0] > p.lo + kJunctionTol || p.knots.back()[0] < p.hi - kJunctionTol)) {
        throw validation_error("table knots must span the piece domain");
      }
    }
    pieces_ = std::move(pieces);
    piece_his_.clear();
    for (const Piece& p : pieces_) piece_his_.push_back(p.hi);
    build_profile();
    verify_flags();
  }

  // Candidate trend breaks inside one piece: table kinks plus slope roots.
  std::vector<double> piece_breaks(const Piece& p) const {
    std::vector<double> cand;
    for (const auto& k : p.knots) {
      if (k[0] > p.lo && k[0] < p.hi) cand.push_back(k[0]);
    }
    auto scan_segment = [&](double lo, double hi) {
      if (p.power_degree_leq(3)) {
        // Slope is at most quadratic; the table slope is constant between
        // knots, so roots come in closed form.
        double q0 = 0.0, q1 = 0.0, q2 = 0.0;
        for (const Term& tm : p.terms) {
          if (tm.exponent == 1.0) q0 += tm.coef;
          if (tm.exponent == 2.0) q1 += 2.0 * tm.coef;
          if (tm.exponent == 3.0) q2 += 3.0 * tm.coef;
        }
        if (p.knots.size() >= 2) {
          const double mid = 0.5 * (lo + hi);
          q0 += p.slope(mid) - (q0 + q1 * mid + q2 * mid * mid);
        }
        for (double r : detail::quadratic_roots_in(q2, q1, q0, lo, hi)) {
          const double eps = 1e-9 * std::max(1.0, hi - lo);
          const double sl = p.slope(std::max(lo, r - eps));
          const double sr = p.slope(std::min(hi, r + eps));
          if (detail::sign_of(sl) * detail::sign_of(sr) < 0) cand.push_back(r);
        }
        return;
      }
      // General case: sample the analytic slope and bisect sign changes.
      const int n = 256;
      const double span = hi - lo;
      double prev_t = lo + span * (0.5 / n);
      double prev_s = p.slope(prev_t);
      for (int i = 1; i < n; ++i) {
        const double t = lo + span * ((i + 0.5) / n);
        const double s = p.slope(t);
        if (detail::sign_of(prev_s) * detail::sign_of(s) < 0) {
          double a = prev_t, b = t, sa = prev_s;
          for (int it = 0; it < 100 && (b - a) > 1e-15; ++it) {
            const double m = 0.5 * (a + b);
            const double sm = p.slope(m);
            if (detail::sign_of(sm) == detail::sign_of(sa)) {
              a = m;
              sa = sm;
            } else {
              b = m;
            }
          }
          cand.push_back(0.5 * (a + b));
        }
        prev_t = t;
        prev_s = s;
      }
    };
    if (p.knots.size() >= 2) {
      double seg_lo = p.lo;
      for (std::size_t k = 0; k < p.knots.size(); ++k) {
        const double kt = p.knots[k][0];
        if (kt <= seg_lo || kt >= p.hi) continue;
        scan_segment(seg_lo, kt);
        seg_lo = kt;
      }
      scan_segment(seg_lo, p.hi);
    } else {
      scan_segment(p.lo, p.hi);
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    return cand;
  }

  void build_profile() {
    std::vector<double> breaks;
    breaks.push_back(0.0);
    for (Piece& p : pieces_) {
      for (double c : piece_breaks(p)) breaks.push_back(c);
      breaks.push_back(p.hi);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end(),
                             [](double a, double b) { return std::abs(a - b) <= 1e-14; }),
                 breaks.end());
    profile_.breaks = std::move(breaks);
    profile_.values.clear();
    for (double b : profile_.breaks) profile_.values.push_back((*this)(b));
    profile_.prefix.assign(profile_.breaks.size(), 0.0);
    profile_.dir.assign(profile_.breaks.size() - 1, 0);
    for (std::size_t i = 0; i + 1 < profile_.breaks.size(); ++i) {
      const double d = profile_.values[i + 1] - profile_.values[i];
      profile_.prefix[i + 1] = profile_.prefix[i] + std::abs(d);
      profile_.dir[i] = detail::sign_of(d);
    }
    // Per-piece flags derived from the profile segments they cover.
    for (Piece& p : pieces_) {
      bool up = false, down = false;
      for (std::size_t i = 0; i + 1 < profile_.breaks.size(); ++i) {
        const double mid = 0.5 * (profile_.breaks[i] + profile_.breaks[i + 1]);
        if (mid < p.lo || mid > p.hi) continue;
        if (profile_.dir[i] > 0) up = true;
        if (profile_.dir[i] < 0) down = true;
      }
      p.mono = (up && down) ? Monotonicity::NonMonotone
                            : (down ? Monotonicity::Decreasing : Monotonicity::Increasing);
    }
  }

  void verify_flags() {
    for (const Piece& p : pieces_) {
      if (p.mono == Monotonicity::NonMonotone) continue;
      const int expect = p.mono == Monotonicity::Increasing ? 1 : -1;
      double prev = p.value(p.lo);
      for (int i = 1; i <= 64; ++i) {
        const double t = p.lo + (p.hi - p.lo) * (i / 64.0);
        const double v = p.value(t);
        if (expect * (v - prev) < -kJunctionTol) {
          profile_.resolved = false;
          throw validation_error("monotonicity flag violated inside piece at t=" +
                                 std::to_string(t));
        }
        prev = v;
      }
    }
    // Segment-level spot check so the exact variation queries can trust dir.
    for (std::size_t i = 0; i + 1 < profile_.breaks.size(); ++i) {
      const double lo = profile_.breaks[i], hi = profile_.breaks[i + 1];
      double prev = profile_.values[i];
      for (int k = 1; k <= 16; ++k) {
        const double t = lo + (hi - lo) * (k / 16.0);
        const double v = (*this)(t);
        if (profile_.dir[i] * (v - prev) < -1e-11) {
          profile_.resolved = false;
          throw validation_error("trend scan failed to isolate a monotone segment near t=" +
                                 std::to_string(t));
        }
        prev = v;
      }
    }
  }
};

/// alpha*f + beta*g as a piecewise function; exact for power sums and
/// for linear table parts (re-knotted on the union of positions).
inline PiecewiseFunction combine(double alpha, const PiecewiseFunction& f, double beta,
                                 const PiecewiseFunction& g) {
  std::vector<double> bounds;
  for (const Piece& p : f.pieces()) {
    bounds.push_back(p.lo);
    bounds.push_back(p.hi);
  }
  for (const Piece& p : g.pieces()) {
    bounds.push_back(p.lo);
    bounds.push_back(p.hi);
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end(),
                           [](double a, double b) { return std::abs(a - b) <= kJunctionTol; }),
               bounds.end());
  std::vector<Piece> out;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const double lo = bounds[i], hi = bounds[i + 1];
    const double mid = 0.5 * (lo + hi);
    const Piece& pf = f.piece_at(mid);
    const Piece& pg = g.piece_at(mid);
    Piece p;
    p.lo = lo;
    p.hi = hi;
    auto add_terms = [&p](double w, const std::vector<Term>& ts) {
      for (const Term& t : ts) {
        bool merged = false;
        for (Term& u : p.terms) {
          if (u.exponent == t.exponent) {
            u.coef += w * t.coef;
            merged = true;
            break;
          }
        }
        if (!merged) p.terms.push_back({w * t.coef, t.exponent});
      }
    };
    add_terms(alpha, pf.terms);
    add_terms(beta, pg.terms);
    if (!pf.knots.empty() || !pg.knots.empty()) {
      std::vector<double> pos{lo, hi};
      for (const auto& k : pf.knots)
        if (k[0] > lo && k[0] < hi) pos.push_back(k[0]);
      for (const auto& k : pg.knots)
        if (k[0] > lo && k[0] < hi) pos.push_back(k[0]);
      std::sort(pos.begin(), pos.end());
      pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
      for (double t : pos) {
        const double lv = (pf.knots.empty() ? 0.0 : alpha * pf.linear_value(t)) +
                          (pg.knots.empty() ? 0.0 : beta * pg.linear_value(t));
        p.knots.push_back({t, lv});
      }
    }
    out.push_back(std::move(p));
  }
  return PiecewiseFunction::from_pieces(std::move(out));
}

}  // namespace curvesec
