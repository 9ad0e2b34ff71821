#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvesec/grid.hpp"
#include "curvesec/surfaces.hpp"

namespace curvesec {

struct Witness {
  std::vector<double> coords;
  double slack = 0.0;
  bool boundary = false;
};

/// Outcome of one criterion. `pass` means pass-at-resolution: the condition
/// held at every tested point or pair, which is not a proof over the
/// continuum. A failing report carries at least one witness whose slack is
/// below -tolerance.
struct VerdictReport {
  std::string check;
  bool pass = true;
  int resolution = 0;
  double tolerance = 1e-9;
  std::vector<Witness> witnesses;

  bool boundary_flagged() const {
    for (const Witness& w : witnesses) {
      if (w.boundary) return true;
    }
    return false;
  }

  nlohmann::json to_json() const {
    nlohmann::json ws = nlohmann::json::array();
    for (const Witness& w : witnesses) {
      ws.push_back({{"coords", w.coords}, {"slack", w.slack}, {"boundary", w.boundary}});
    }
    return {{"check", check},
            {"verdict", pass ? "pass-at-resolution" : "fail"},
            {"resolution", resolution},
            {"tolerance", tolerance},
            {"witnesses", ws}};
  }
};

namespace detail {

/// Keeps the most negative-slack witnesses, deterministically ordered.
class WitnessSink {
 public:
  explicit WitnessSink(std::size_t cap = 16) : cap_(cap) {}

  void add(Witness w) {
    items_.push_back(std::move(w));
    std::sort(items_.begin(), items_.end(), order);
    if (items_.size() > cap_) items_.resize(cap_);
  }

  std::vector<Witness> take() && { return std::move(items_); }
  bool empty() const { return items_.empty(); }

 private:
  static bool order(const Witness& a, const Witness& b) {
    if (a.slack != b.slack) return a.slack < b.slack;
    return a.coords < b.coords;
  }
  std::size_t cap_;
  std::vector<Witness> items_;
};

/// Criterion scan points: n+1 equispaced nodes enriched with every trend
/// break of hat, tilde and phi.
inline std::vector<double> scan_points(const SectionPair& s, int n) {
  std::vector<double> ts;
  ts.reserve(static_cast<std::size_t>(n) + 16);
  for (int i = 0; i <= n; ++i) ts.push_back(static_cast<double>(i) / n);
  for (double b : s.all_breaks()) ts.push_back(b);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

}  // namespace detail

/// Boundary values, monotonicity in each variable and the 1-Lipschitz bound,
/// all on adjacent grid nodes.
inline VerdictReport check_quasi_copula(const GridSurface& g, double tol = 1e-9) {
  VerdictReport r;
  r.check = "quasi-copula";
  r.tolerance = tol;
  r.resolution = static_cast<int>(std::max(g.nx(), g.ny()));
  detail::WitnessSink sink;
  auto note = [&](double x, double y, double slack) {
    if (slack < -tol) {
      r.pass = false;
      sink.add({{x, y}, slack, false});
    }
  };
  for (std::size_t i = 0; i < g.nx(); ++i) {
    note(g.xs[i], 0.0, -std::abs(g.at(i, 0)));
    note(g.xs[i], 1.0, -std::abs(g.at(i, g.ny() - 1) - g.xs[i]));
  }
  for (std::size_t j = 0; j < g.ny(); ++j) {
    note(0.0, g.ys[j], -std::abs(g.at(0, j)));
    note(1.0, g.ys[j], -std::abs(g.at(g.nx() - 1, j) - g.ys[j]));
  }
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.ny(); ++j) {
      if (i + 1 < g.nx()) {
        const double d = g.at(i + 1, j) - g.at(i, j);
        note(0.5 * (g.xs[i] + g.xs[i + 1]), g.ys[j], d);                       // (Q1)
        note(0.5 * (g.xs[i] + g.xs[i + 1]), g.ys[j], g.xs[i + 1] - g.xs[i] - std::abs(d));  // (Q2)
      }
      if (j + 1 < g.ny()) {
        const double d = g.at(i, j + 1) - g.at(i, j);
        note(g.xs[i], 0.5 * (g.ys[j] + g.ys[j + 1]), d);
        note(g.xs[i], 0.5 * (g.ys[j] + g.ys[j + 1]), g.ys[j + 1] - g.ys[j] - std::abs(d));
      }
    }
  }
  r.witnesses = std::move(sink).take();
  return r;
}

/// Non-negative rectangle volumes over all adjacent cells. On failure a
/// local search over coarser rectangles around the worst cell reports the
/// most negative volume found.
inline VerdictReport check_two_increasing(const GridSurface& g, double tol = 1e-9) {
  VerdictReport r;
  r.check = "two-increasing";
  r.tolerance = tol;
  r.resolution = static_cast<int>(std::max(g.nx(), g.ny()));
  detail::WitnessSink sink;
  double worst = 0.0;
  std::size_t wi = 0, wj = 0;
  for (std::size_t i = 0; i + 1 < g.nx(); ++i) {
    for (std::size_t j = 0; j + 1 < g.ny(); ++j) {
      const double v = g.at(i + 1, j + 1) - g.at(i + 1, j) - g.at(i, j + 1) + g.at(i, j);
      if (v < worst) {
        worst = v;
        wi = i;
        wj = j;
      }
      if (v < -tol) {
        r.pass = false;
        sink.add({{g.xs[i], g.ys[j], g.xs[i + 1], g.ys[j + 1]}, v, false});
      }
    }
  }
  if (!r.pass) {
    // Multi-cell rectangles around the worst witness.
    const std::size_t span = 8;
    const std::size_t i_lo = wi > span ? wi - span : 0;
    const std::size_t j_lo = wj > span ? wj - span : 0;
    const std::size_t i_hi = std::min(g.nx() - 1, wi + 1 + span);
    const std::size_t j_hi = std::min(g.ny() - 1, wj + 1 + span);
    double best = 0.0;
    std::array<std::size_t, 4> loc{0, 0, 0, 0};
    for (std::size_t a = i_lo; a <= wi; ++a) {
      for (std::size_t b = wi + 1; b <= i_hi; ++b) {
        for (std::size_t c = j_lo; c <= wj; ++c) {
          for (std::size_t d = wj + 1; d <= j_hi; ++d) {
            const double v = g.at(b, d) - g.at(b, c) - g.at(a, d) + g.at(a, c);
            if (v < best) {
              best = v;
              loc = {a, c, b, d};
            }
          }
        }
      }
    }
    if (best < worst) {
      sink.add({{g.xs[loc[0]], g.ys[loc[1]], g.xs[loc[2]], g.ys[loc[3]]}, best, false});
    }
  }
  r.witnesses = std::move(sink).take();
  return r;
}

namespace detail {

/// max of the three copulahood residuals at a pair (exact variation).
inline double copulahood_residual(const EvalContext& ctx, double x1, double x2) {
  const SectionPair& s = ctx.section();
  const double vh = s.hat.variation(x1, x2);
  const double vt = s.tilde.variation(x1, x2);
  const double r2 = vh - (s.hat(x1) + s.hat(x2));
  const double r3 = vt - (s.tilde(x1) + s.tilde(x2));
  const double r4 = (vh + vt) - ((x2 - x1) + (s.phi(x2) - s.phi(x1)));
  return std::max({r2, r3, r4});
}

/// 20 rounds of shrinking 3x3 search refining a worst pair/point.
template <typename F>
inline std::array<double, 2> refine_pair(F&& objective, double x1, double x2, double radius) {
  double bx1 = x1, bx2 = x2;
  double best = objective(bx1, bx2);
  for (int round = 0; round < 20; ++round) {
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        const double c1 = std::clamp(bx1 + di * radius, 0.0, 1.0);
        const double c2 = std::clamp(bx2 + dj * radius, 0.0, 1.0);
        if (!(c1 < c2)) continue;
        const double v = objective(c1, c2);
        if (v < best) {
          best = v;
          bx1 = c1;
          bx2 = c2;
        }
      }
    }
    radius *= 0.5;
  }
  return {bx1, bx2};
}

}  // namespace detail

/// Copulahood of the splice: for every scanned pair x1 < x2 at least one of
///   V(hat)  >= hat(x1) + hat(x2)
///   V(tilde) >= tilde(x1) + tilde(x2)
///   V(hat) + V(tilde) >= (x2 - x1) + (phi(x2) - phi(x1))
/// must hold. A failing pair certifies the splice is not a copula; passing
/// certifies it at this resolution only.
inline VerdictReport copulahood_criterion(const EvalContext& ctx, int pairs_resolution,
                                          double tol = 1e-9) {
  const SectionPair& s = ctx.section();
  VerdictReport r;
  r.check = "copulahood";
  r.tolerance = tol;
  r.resolution = pairs_resolution;
  const std::vector<double> ts = detail::scan_points(s, pairs_resolution);
  const std::size_t n = ts.size();
  std::vector<double> hat(n), tilde(n), phi(n), vhat(n), vtilde(n);
  for (std::size_t i = 0; i < n; ++i) {
    hat[i] = s.hat(ts[i]);
    tilde[i] = s.tilde(ts[i]);
    phi[i] = s.phi(ts[i]);
    vhat[i] = s.hat.variation(0.0, ts[i]);
    vtilde[i] = s.tilde.variation(0.0, ts[i]);
  }
  double worst = 1e300;
  std::array<double, 2> worst_pair{0.0, 1.0};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double vh = vhat[j] - vhat[i];
      const double vt = vtilde[j] - vtilde[i];
      const double r2 = vh - (hat[i] + hat[j]);
      const double r3 = vt - (tilde[i] + tilde[j]);
      const double r4 = (vh + vt) - ((ts[j] - ts[i]) + (phi[j] - phi[i]));
      const double rm = std::max({r2, r3, r4});
      if (rm < worst) {
        worst = rm;
        worst_pair = {ts[i], ts[j]};
      }
    }
  }
  if (worst < -tol) {
    r.pass = false;
    const double spacing = 1.0 / pairs_resolution;
    const auto tight = detail::refine_pair(
        [&](double a, double b) { return detail::copulahood_residual(ctx, a, b); }, worst_pair[0],
        worst_pair[1], spacing);
    const double slack = detail::copulahood_residual(ctx, tight[0], tight[1]);
    r.witnesses.push_back({{tight[0], tight[1]}, slack, false});
    if (tight != worst_pair) r.witnesses.push_back({{worst_pair[0], worst_pair[1]}, worst, false});
  } else {
    // Worst pair is informative even when passing. Equality in the combined
    // inequality is the expected case, so it carries no boundary flag.
    r.witnesses.push_back({{worst_pair[0], worst_pair[1]}, worst, false});
  }
  return r;
}

enum class DerivativeVerdict { SufficientPass, Inconclusive };

/// Sufficient slope test: on the set where gamma sits strictly below
/// min{t, phi(t)}, the slope must be 0 or 1 + phi'(t) almost everywhere.
/// Central differences with h = 1e-6, skipping a 1e-4 margin around junctions
/// and trend breaks (the criterion is an almost-everywhere statement).
inline DerivativeVerdict derivative_criterion(const EvalContext& ctx, int samples = 4096) {
  const SectionPair& s = ctx.section();
  const double h = 1e-6;
  std::vector<double> avoid = s.all_breaks();
  for (const Piece& p : s.gamma.pieces()) avoid.push_back(p.hi);
  for (const Piece& p : s.phi.fn().pieces()) avoid.push_back(p.hi);
  std::sort(avoid.begin(), avoid.end());
  for (int i = 1; i < samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    if (t < 10 * h || t > 1.0 - 10 * h) continue;
    auto it = std::lower_bound(avoid.begin(), avoid.end(), t - 1e-4);
    if (it != avoid.end() && *it < t + 1e-4) continue;
    const double margin = std::min(t, s.phi(t)) - s.gamma(t);
    if (margin <= 1e-9) continue;  // outside the strict set
    const double slope = (s.gamma(t + h) - s.gamma(t - h)) / (2.0 * h);
    const double target = 1.0 + s.phi.fn().piece_at(t).slope(t);
    if (std::min(std::abs(slope), std::abs(slope - target)) > 1e-6) {
      return DerivativeVerdict::Inconclusive;
    }
  }
  return DerivativeVerdict::SufficientPass;
}

/// Coincidence of the splice with the greatest quasi-copula, via the
/// interval form: whenever hat (resp. tilde) dips strictly below both
/// endpoint values on [x, y], the gap y - phi(x) (resp. phi(y) - x) must
/// strictly exceed both endpoint values. Near-equalities within the
/// tolerance are flagged as boundary and do not fail the verdict.
inline VerdictReport coincidence_criterion(const EvalContext& ctx, int pairs_resolution,
                                           double tol = 1e-9) {
  const SectionPair& s = ctx.section();
  VerdictReport r;
  r.check = "coincidence";
  r.tolerance = tol;
  r.resolution = pairs_resolution;
  const std::vector<double> ts = detail::scan_points(s, pairs_resolution);
  const std::size_t n = ts.size();
  std::vector<double> hat(n), tilde(n), phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    hat[i] = s.hat(ts[i]);
    tilde[i] = s.tilde(ts[i]);
    phi[i] = s.phi(ts[i]);
  }
  detail::WitnessSink sink;
  double worst = 1e300;
  std::array<double, 2> worst_pair{0.0, 1.0};
  int worst_cond = 0;
  // Scan points contain every trend break, so running minima over the scan
  // equal the true interval minima.
  for (std::size_t i = 0; i < n; ++i) {
    double run_min_hat = hat[i], run_min_tilde = tilde[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dip_t = std::min(tilde[i], tilde[j]) - std::min(run_min_tilde, tilde[j]);
      const double dip_h = std::min(hat[i], hat[j]) - std::min(run_min_hat, hat[j]);
      if (dip_t > tol) {
        const double slack = (phi[j] - ts[i]) - std::max(tilde[i], tilde[j]);
        if (slack < worst) {
          worst = slack;
          worst_pair = {ts[i], ts[j]};
          worst_cond = 1;
        }
        if (slack < -tol) {
          r.pass = false;
        } else if (slack <= tol) {
          sink.add({{ts[i], ts[j]}, slack, true});
        }
      }
      if (dip_h > tol) {
        const double slack = (ts[j] - phi[i]) - std::max(hat[i], hat[j]);
        if (slack < worst) {
          worst = slack;
          worst_pair = {ts[i], ts[j]};
          worst_cond = 2;
        }
        if (slack < -tol) {
          r.pass = false;
        } else if (slack <= tol) {
          sink.add({{ts[i], ts[j]}, slack, true});
        }
      }
      run_min_hat = std::min(run_min_hat, hat[j]);
      run_min_tilde = std::min(run_min_tilde, tilde[j]);
    }
  }
  if (!r.pass) {
    const double spacing = 1.0 / pairs_resolution;
    auto objective = [&](double a, double b) {
      // Only meaningful while the dip persists; outside it the pair is benign.
      const auto& f = worst_cond == 1 ? s.tilde : s.hat;
      const double fa = f(a), fb = f(b);
      if (std::min(fa, fb) - f.interval_min(a, b) <= tol) return 1e300;
      return worst_cond == 1 ? (s.phi(b) - a) - std::max(fa, fb)
                             : (b - s.phi(a)) - std::max(fa, fb);
    };
    const auto tight = detail::refine_pair(objective, worst_pair[0], worst_pair[1], spacing);
    sink.add({{tight[0], tight[1]}, objective(tight[0], tight[1]), false});
  }
  r.witnesses = std::move(sink).take();
  if (r.pass && r.witnesses.empty() && worst < 1e299) {
    r.witnesses.push_back({{worst_pair[0], worst_pair[1]}, worst, false});
  }
  return r;
}

/// True when neither gap function has an interior dip below its endpoint
/// values on any scanned pair (both quasi-concave at this resolution).
inline bool phi_simple_check(const EvalContext& ctx, int pairs_resolution, double tol = 1e-9) {
  const SectionPair& s = ctx.section();
  const std::vector<double> ts = detail::scan_points(s, pairs_resolution);
  const std::size_t n = ts.size();
  std::vector<double> hat(n), tilde(n);
  for (std::size_t i = 0; i < n; ++i) {
    hat[i] = s.hat(ts[i]);
    tilde[i] = s.tilde(ts[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double run_min_hat = hat[i], run_min_tilde = tilde[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::min(hat[i], hat[j]) - std::min(run_min_hat, hat[j]) > tol) return false;
      if (std::min(tilde[i], tilde[j]) - std::min(run_min_tilde, tilde[j]) > tol) return false;
      run_min_hat = std::min(run_min_hat, hat[j]);
      run_min_tilde = std::min(run_min_tilde, tilde[j]);
    }
  }
  return true;
}

/// K is a copula iff both 2t - gamma(t) and 2t - gamma(phi_inv(t)) are
/// non-decreasing; checked on adjacent sample pairs enriched with breaks.
inline bool k_copula_condition(const EvalContext& ctx, int samples = 2048, double tol = 1e-9) {
  const SectionPair& s = ctx.section();
  const std::vector<double> ts = detail::scan_points(s, samples);
  double prev1 = 0.0, prev2 = 0.0;
  bool first = true;
  for (double t : ts) {
    const double g1 = 2.0 * t - s.gamma(t);
    const double g2 = 2.0 * t - s.gamma(ctx.phi_inv(t));
    if (!first && (g1 - prev1 < -tol || g2 - prev2 < -tol)) return false;
    prev1 = g1;
    prev2 = g2;
    first = false;
  }
  return true;
}

/// Interior grid nodes where the surface equals min(x, y) within tol.
inline std::vector<std::array<double, 2>> m_behavior_scan(const GridSurface& g,
                                                          double tol = 1e-9) {
  std::vector<std::array<double, 2>> out;
  for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
    for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
      if (std::abs(g.at(i, j) - std::min(g.xs[i], g.ys[j])) <= tol) {
        out.push_back({g.xs[i], g.ys[j]});
      }
    }
  }
  return out;
}

}  // namespace curvesec
