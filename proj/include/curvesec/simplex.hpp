#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "curvesec/errors.hpp"
#include "curvesec/format.hpp"

namespace curvesec {

/// max objective . x  subject to  A x = rhs, x >= 0.
struct DenseLP {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;          // row-major rows x cols
  std::vector<double> rhs;        // size rows
  std::vector<double> objective;  // size cols

  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

struct SimplexSolution {
  enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };
  Status status = Status::Optimal;
  double objective = 0.0;
  std::vector<double> x;
};

/// Plain-text dump for external cross-solving:
///   rows R / cols C / objective line / constraints block (coeffs then rhs).
inline void write_lp(const DenseLP& lp, std::ostream& os) {
  os << "rows " << lp.rows << "\n";
  os << "cols " << lp.cols << "\n";
  os << "objective\n";
  for (int c = 0; c < lp.cols; ++c) os << (c ? " " : "") << format_double(lp.objective[c]);
  os << "\nconstraints\n";
  for (int r = 0; r < lp.rows; ++r) {
    for (int c = 0; c < lp.cols; ++c) os << format_double(lp.at(r, c)) << " ";
    os << format_double(lp.rhs[r]) << "\n";
  }
}

/// Dense two-phase simplex on the full tableau. Dantzig pricing with a
/// permanent switch to Bland's rule once the objective stalls, which keeps
/// the heavily degenerate checkerboard instances from cycling.
class SimplexSolver {
 public:
  explicit SimplexSolver(const DenseLP& lp, double eps = 1e-11, long max_iter = 200000)
      : m_(lp.rows), n_(lp.cols), eps_(eps), max_iter_(max_iter) {
    // Tableau columns: n structural + m artificial + rhs.
    width_ = n_ + m_ + 1;
    t_.assign(static_cast<std::size_t>(m_ + 1) * width_, 0.0);
    basis_.resize(m_);
    for (int r = 0; r < m_; ++r) {
      const double sgn = lp.rhs[r] < 0.0 ? -1.0 : 1.0;
      for (int c = 0; c < n_; ++c) cell(r, c) = sgn * lp.at(r, c);
      cell(r, n_ + r) = 1.0;
      cell(r, width_ - 1) = sgn * lp.rhs[r];
      basis_[r] = n_ + r;
    }
    obj_ = lp.objective;
  }

  SimplexSolution solve() {
    SimplexSolution out;
    // Phase 1: minimize the artificial sum == maximize its negative.
    for (int c = 0; c < width_; ++c) {
      double s = 0.0;
      for (int r = 0; r < m_; ++r) s += cell(r, c);
      price(c) = (c >= n_ && c < n_ + m_) ? 0.0 : s;
    }
    if (!iterate(n_ + m_)) {
      out.status = SimplexSolution::Status::IterationLimit;
      return out;
    }
    if (price(width_ - 1) > 1e-7) {
      out.status = SimplexSolution::Status::Infeasible;
      return out;
    }
    purge_artificials();

    // Phase 2 over structural columns only.
    for (int c = 0; c < width_; ++c) price(c) = c < n_ ? obj_[c] : 0.0;
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_ && std::abs(obj_[basis_[r]]) > 0.0) {
        const double w = obj_[basis_[r]];
        for (int c = 0; c < width_; ++c) price(c) -= w * cell(r, c);
      }
    }
    if (!iterate(n_)) {
      out.status = SimplexSolution::Status::IterationLimit;
      return out;
    }
    bool unbounded = false;
    for (int c = 0; c < n_; ++c) {
      if (price(c) > eps_) {
        bool has_pos = false;
        for (int r = 0; r < m_; ++r) {
          if (cell(r, c) > eps_) has_pos = true;
        }
        if (!has_pos) unbounded = true;
      }
    }
    if (unbounded) {
      out.status = SimplexSolution::Status::Unbounded;
      return out;
    }
    out.status = SimplexSolution::Status::Optimal;
    out.x.assign(n_, 0.0);
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_) out.x[basis_[r]] = cell(r, width_ - 1);
    }
    out.objective = -price(width_ - 1);
    return out;
  }

 private:
  int m_, n_;
  double eps_;
  long max_iter_;
  int width_;
  std::vector<double> t_;  // (m_+1) x width_, last row = price row
  std::vector<int> basis_;
  std::vector<double> obj_;

  double& cell(int r, int c) { return t_[static_cast<std::size_t>(r) * width_ + c]; }
  double& price(int c) { return t_[static_cast<std::size_t>(m_) * width_ + c]; }

  void pivot(int pr, int pc) {
    const double pv = cell(pr, pc);
    for (int c = 0; c < width_; ++c) cell(pr, c) /= pv;
    for (int r = 0; r <= m_; ++r) {
      if (r == pr) continue;
      const double w = t_[static_cast<std::size_t>(r) * width_ + pc];
      if (w == 0.0) continue;
      for (int c = 0; c < width_; ++c) t_[static_cast<std::size_t>(r) * width_ + c] -= w * cell(pr, c);
    }
    basis_[pr] = pc;
  }

  // Maximizes the current price row over columns [0, limit).
  bool iterate(int limit) {
    long stall = 0;
    bool bland = false;
    double last = price(width_ - 1);
    for (long it = 0; it < max_iter_; ++it) {
      int pc = -1;
      if (bland) {
        for (int c = 0; c < limit; ++c) {
          if (price(c) > eps_) {
            pc = c;
            break;
          }
        }
      } else {
        double best = eps_;
        for (int c = 0; c < limit; ++c) {
          if (price(c) > best) {
            best = price(c);
            pc = c;
          }
        }
      }
      if (pc < 0) return true;  // optimal
      int pr = -1;
      double best_ratio = 0.0;
      for (int r = 0; r < m_; ++r) {
        if (cell(r, pc) > eps_) {
          const double ratio = std::max(0.0, cell(r, width_ - 1)) / cell(r, pc);
          if (pr < 0 || ratio < best_ratio - 1e-15 ||
              (std::abs(ratio - best_ratio) <= 1e-15 && basis_[r] < basis_[pr])) {
            pr = r;
            best_ratio = ratio;
          }
        }
      }
      if (pr < 0) return true;  // unbounded direction; phase-2 caller re-detects
      pivot(pr, pc);
      const double cur = price(width_ - 1);
      if (std::abs(cur - last) <= 1e-15) {
        if (++stall > 64) bland = true;
      } else {
        stall = 0;
        last = cur;
      }
    }
    return false;
  }

  // Swap remaining artificials out of the basis; drop-dead rows stay with a
  // zero artificial and never pivot again.
  void purge_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      int pc = -1;
      for (int c = 0; c < n_; ++c) {
        if (std::abs(cell(r, c)) > 1e-9) {
          pc = c;
          break;
        }
      }
      if (pc >= 0) pivot(r, pc);
    }
  }
};

inline SimplexSolution solve_lp(const DenseLP& lp) { return SimplexSolver(lp).solve(); }

}  // namespace curvesec
