#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace magrobin {

struct MinResult {
  double argmin = 0.0;
  double value = 0.0;
};

// Golden-section search on [a, b] to absolute argument tolerance `tol`.
// Assumes f is unimodal on the bracket; deterministic.
template <typename F>
MinResult golden_section(F&& f, double a, double b, double tol = 1e-8) {
  if (!(b > a)) throw std::invalid_argument("golden_section: empty bracket");
  constexpr double invphi = 0.6180339887498949;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  const double xm = 0.5 * (a + b);
  return MinResult{xm, f(xm)};
}

// Coarse scan followed by golden-section refinement around the best sample.
// This is the minimization policy used for every xi-minimization here.
template <typename F>
MinResult scan_then_golden(F&& f, double lo, double hi, double step, double tol = 1e-8) {
  if (!(hi > lo)) throw std::invalid_argument("scan_then_golden: empty window");
  if (!(step > 0.0)) throw std::invalid_argument("scan_then_golden: step must be positive");
  const int nsteps = std::max(2, static_cast<int>(std::ceil((hi - lo) / step)));
  double best_x = lo, best_f = f(lo);
  for (int i = 1; i <= nsteps; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / nsteps;
    const double fx = f(x);
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  const double w = (hi - lo) / nsteps;
  const double a = std::max(lo, best_x - w);
  const double b = std::min(hi, best_x + w);
  MinResult r = golden_section(f, a, b, tol);
  if (best_f < r.value) return MinResult{best_x, best_f};
  return r;
}

}  // namespace magrobin
