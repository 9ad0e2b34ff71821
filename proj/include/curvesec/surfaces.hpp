#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <tuple>

#include "curvesec/errors.hpp"
#include "curvesec/section.hpp"

namespace curvesec {

enum class SurfaceKind { F1, F2, C1, C2, Splice, Bertino, AUpper, K, W, M, Pi };

inline const char* surface_name(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::F1: return "f1";
    case SurfaceKind::F2: return "f2";
    case SurfaceKind::C1: return "c1";
    case SurfaceKind::C2: return "c2";
    case SurfaceKind::Splice: return "splice";
    case SurfaceKind::Bertino: return "bertino";
    case SurfaceKind::AUpper: return "a-upper";
    case SurfaceKind::K: return "k";
    case SurfaceKind::W: return "w";
    case SurfaceKind::M: return "m";
    case SurfaceKind::Pi: return "pi";
  }
  return "?";
}

inline SurfaceKind surface_kind_from(std::string_view s) {
  for (SurfaceKind k :
       {SurfaceKind::F1, SurfaceKind::F2, SurfaceKind::C1, SurfaceKind::C2, SurfaceKind::Splice,
        SurfaceKind::Bertino, SurfaceKind::AUpper, SurfaceKind::K, SurfaceKind::W, SurfaceKind::M,
        SurfaceKind::Pi}) {
    if (s == surface_name(k)) return k;
  }
  throw parse_error("unknown surface kind: " + std::string(s));
}

/// Evaluation context over one section: holds the inverse-map and interval
/// query memos. Queries are pure, so concurrent duplicate inserts are
/// idempotent; each map is guarded by a mutex and grid fills give every
/// worker its own context.
class EvalContext {
 public:
  explicit EvalContext(const SectionPair& s) : s_(&s) {}
  EvalContext(const EvalContext&) = delete;
  EvalContext& operator=(const EvalContext&) = delete;

  const SectionPair& section() const { return *s_; }

  double phi(double t) const { return s_->phi(t); }
  double gamma(double t) const { return s_->gamma(t); }
  double hat(double t) const { return s_->hat(t); }
  double tilde(double t) const { return s_->tilde(t); }

  double phi_inv(double y) const {
    const std::int64_t key = quantize(y);
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = inv_memo_.find(key);
      if (it != inv_memo_.end()) return it->second;
    }
    const double t = s_->phi.inverse(y);
    std::lock_guard<std::mutex> lk(mu_);
    inv_memo_.emplace(key, t);
    return t;
  }

  enum class Q { HatVar, TildeVar, HatMin, HatMax, TildeMin, TildeMax };

  /// Memoized interval query on hat/tilde; a <= b required.
  double interval(Q q, double a, double b) const {
    const auto key = std::make_tuple(static_cast<int>(q), quantize(a), quantize(b));
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = iv_memo_.find(key);
      if (it != iv_memo_.end()) return it->second;
    }
    double v = 0.0;
    switch (q) {
      case Q::HatVar: v = s_->hat.variation(a, b); break;
      case Q::TildeVar: v = s_->tilde.variation(a, b); break;
      case Q::HatMin: v = s_->hat.interval_min(a, b); break;
      case Q::HatMax: v = s_->hat.interval_max(a, b); break;
      case Q::TildeMin: v = s_->tilde.interval_min(a, b); break;
      case Q::TildeMax: v = s_->tilde.interval_max(a, b); break;
    }
    std::lock_guard<std::mutex> lk(mu_);
    iv_memo_.emplace(key, v);
    return v;
  }

  /// Variation of hat from `from` to `to`, signed by orientation.
  double hat_variation_signed(double from, double to) const {
    return from <= to ? interval(Q::HatVar, from, to) : -interval(Q::HatVar, to, from);
  }
  double tilde_variation_signed(double from, double to) const {
    return from <= to ? interval(Q::TildeVar, from, to) : -interval(Q::TildeVar, to, from);
  }

 private:
  const SectionPair* s_;
  mutable std::mutex mu_;
  mutable std::map<std::int64_t, double> inv_memo_;
  mutable std::map<std::tuple<int, std::int64_t, std::int64_t>, double> iv_memo_;

  static std::int64_t quantize(double x) { return std::llround(x * 1e12); }
};

namespace detail {
inline void check_unit_square(double x, double y) {
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
    throw domain_error("surface eval outside the unit square");
  }
}
}  // namespace detail

/// f1(x,y) = x - (V(hat, phi_inv(y) -> x) + hat(x) + hat(phi_inv(y))) / 2.
inline double f1(const EvalContext& ctx, double x, double y) {
  detail::check_unit_square(x, y);
  const double u = ctx.phi_inv(y);
  return x - 0.5 * (ctx.hat_variation_signed(u, x) + ctx.hat(x) + ctx.hat(u));
}

/// f2(x,y) = y - (V(tilde, x -> phi_inv(y)) + tilde(x) + tilde(phi_inv(y))) / 2.
inline double f2(const EvalContext& ctx, double x, double y) {
  detail::check_unit_square(x, y);
  const double u = ctx.phi_inv(y);
  return y - 0.5 * (ctx.tilde_variation_signed(x, u) + ctx.tilde(x) + ctx.tilde(u));
}

inline double surface(const EvalContext& ctx, SurfaceKind kind, double x, double y) {
  detail::check_unit_square(x, y);
  double v = 0.0;
  switch (kind) {
    case SurfaceKind::F1: v = f1(ctx, x, y); break;
    case SurfaceKind::F2: v = f2(ctx, x, y); break;
    case SurfaceKind::C1: v = std::min({x, y, f1(ctx, x, y)}); break;
    case SurfaceKind::C2: v = std::min({x, y, f2(ctx, x, y)}); break;
    case SurfaceKind::Splice:
      // Ties on the curve go to the lower branch; both agree there.
      v = (y <= ctx.phi(x)) ? std::min({x, y, f1(ctx, x, y)}) : std::min({x, y, f2(ctx, x, y)});
      break;
    case SurfaceKind::Bertino: {
      const double u = ctx.phi_inv(y);
      // The interval is [u,x] below the curve and [x,u] above; an inverse
      // off by one ulp on the curve must not flip the orientation.
      const double lo = std::min(u, x), hi = std::max(u, x);
      v = (y <= ctx.phi(x)) ? y - ctx.interval(EvalContext::Q::TildeMin, lo, hi)
                            : x - ctx.interval(EvalContext::Q::HatMin, lo, hi);
      break;
    }
    case SurfaceKind::AUpper: {
      const double u = ctx.phi_inv(y);
      const double lo = std::min(u, x), hi = std::max(u, x);
      v = (y <= ctx.phi(x)) ? std::min(y, x - ctx.interval(EvalContext::Q::HatMax, lo, hi))
                            : std::min(x, y - ctx.interval(EvalContext::Q::TildeMax, lo, hi));
      break;
    }
    case SurfaceKind::K: {
      const double u = ctx.phi_inv(y);
      v = std::min({x, y, 0.5 * (ctx.gamma(x) + ctx.gamma(u))});
      break;
    }
    case SurfaceKind::W: return std::max(x + y - 1.0, 0.0);
    case SurfaceKind::M: return std::min(x, y);
    case SurfaceKind::Pi: return x * y;
  }
  if (v < -1e-9 || v > 1.0 + 1e-9) {
    throw convergence_error(std::string("surface ") + surface_name(kind) + " out of range at (" +
                            std::to_string(x) + "," + std::to_string(y) + "): " +
                            std::to_string(v));
  }
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace curvesec
