#pragma once

// Explicit boundary-layer trial states, evaluated as Rayleigh quotients of
// the assembled strip form. Because the quotient is taken in the same
// discrete form the eigensolver minimises, lambda_1(grid) <= E_trial holds
// exactly on every grid, and the upper-bound half of the two-term expansion
// can be checked without trusting any continuum estimate.
//
// The profile is a cutoff product centred at the curvature maximum s0:
//
//   v(s,t) = chi(t / t_width) chi((s-s0) / s_width)
//            * w(t / sqrt(h)) * exp(-i xi (s-s0) / sqrt(h))
//
// with regime-dependent ingredients:
//   epsilon < 1/4 : w = w_n quasimode, xi = argmin of f_n, t_width h^{1/4+eps}
//   epsilon = 1/4 : w = w_1,           xi = zeta/2,        t_width h^{7/16}
//   epsilon > 1/4 : w = exp(-tau),     xi = 0,             t_width h^{3/8}
// and s_width = h^{eps/2} below the critical coupling, h^{1/8} at and above.
//
// chi is 1 on [-1/2, 1/2], falls as cos^2 to 0 at |x| = 1, giving a C^1
// cutoff whose energy cost is quadratic in the inverse width.
//
// Seam handling: the assembled form carries the total flux as a twist on the
// link n_s-1 -> 0, and the curvature maximum often sits exactly there. The
// trial therefore carries a compensating piecewise-constant unitary c_i
// (e^{+-i twist} on the half of the circle reached by crossing the seam) so
// the twist factor cancels on every link inside the support; the c-region
// boundary lies diametrically opposite s0 where the envelope vanishes.

#include <cmath>
#include <complex>
#include <stdexcept>

#include "geometry.hpp"
#include "perturbation.hpp"
#include "strip_solver.hpp"

namespace magrobin {

// C^1 plateau cutoff: 1 on |x| <= 1/2, cos^2(pi(|x|-1/2)) on [1/2, 1], 0 after.
inline double chi_cutoff(double x) {
  double a = std::abs(x);
  if (a <= 0.5) return 1.0;
  if (a >= 1.0) return 0.0;
  double c = std::cos(DomainGeometry::pi() * (a - 0.5));
  return c * c;
}

struct TrialSpec {
  int n = 0;            // series order of the profile (0: bare exp(-tau))
  double xi = 0.0;      // boundary momentum in model units
  double t_width = 0.0; // envelope scale in t
  double s_width = 0.0; // envelope scale in s
  double s0 = 0.0;      // centre (curvature argmax)
  double zeta = 0.0;
};

// Resolve the regime-dependent ingredients. `table` may be null only for
// epsilon > 1/4 where the bare profile is used; `a0` bounds the xi window.
inline TrialSpec resolve_trial_spec(const DomainGeometry& geom, double h, double epsilon,
                                    const PerturbationTable* table, double a0 = 2.7) {
  if (!(h > 0.0) || !(epsilon > 0.0) || !(epsilon <= 0.5))
    throw std::invalid_argument("resolve_trial_spec: bad h or epsilon");
  TrialSpec sp;
  sp.zeta = std::pow(h, epsilon);
  sp.s0 = geom.curvature_argmax();
  if (epsilon < 0.25) {
    if (!table) throw std::invalid_argument("resolve_trial_spec: table required for eps < 1/4");
    sp.n = smallest_n_for_eps(epsilon);
    if (sp.n > table->order)
      throw std::invalid_argument("resolve_trial_spec: table order too low");
    sp.xi = e_n(*table, sp.zeta, a0, sp.n).xi_star;
    sp.t_width = std::pow(h, 0.25 + epsilon);
    sp.s_width = std::pow(h, 0.5 * epsilon);
  } else if (epsilon == 0.25) {
    if (!table) throw std::invalid_argument("resolve_trial_spec: table required for eps = 1/4");
    sp.n = 1;
    sp.xi = 0.5 * sp.zeta;
    sp.t_width = std::pow(h, 7.0 / 16.0);
    sp.s_width = std::pow(h, 0.125);
  } else {
    sp.n = 0;
    sp.xi = 0.0;
    sp.t_width = std::pow(h, 3.0 / 8.0);
    sp.s_width = std::pow(h, 0.125);
  }
  return sp;
}

// Trial vector on the given grid; not normalised (the quotient does that).
inline Eigen::VectorXcd build_trial_vector(const DomainGeometry& geom, const StripGrid& grid,
                                           double h, const TrialSpec& sp,
                                           const PerturbationTable* table) {
  grid.validate();
  const double L = grid.length;
  if (sp.s_width >= 0.45 * L)
    throw std::invalid_argument("build_trial_vector: s envelope too wide for the boundary");
  if (sp.t_width >= grid.t_cut)
    throw std::invalid_argument("build_trial_vector: t envelope exceeds the strip depth");
  const double rh = std::sqrt(h);
  // Any cutoff that clears the localization scale works; the quotient only
  // improves as the envelope widens, so fill the strip when the nominal
  // width would truncate the profile while exp(-t/sqrt(h)) is still large.
  const double t_env = std::max(sp.t_width, 0.85 * grid.t_cut);

  // Profile in tau = t / sqrt(h): series quasimode or bare exponential.
  Eigen::VectorXd prof;
  double dtau = 0.0;
  if (sp.n > 0) {
    if (!table) throw std::invalid_argument("build_trial_vector: table required");
    prof = quasimode(*table, sp.zeta, sp.xi, sp.n);
    dtau = table->grid.spacing;
  }
  auto profile_at = [&](double tau) {
    if (sp.n == 0) return std::exp(-tau);
    double x = tau / dtau;
    int k = static_cast<int>(std::floor(x));
    if (k >= prof.size() - 1) return 0.0;
    double frac = x - k;
    return prof[k] * (1.0 - frac) + prof[k + 1] * frac;
  };

  double twist = 0.0;
  {
    // Same twist the assembly used; recompute via the public helper.
    twist = flux_twist(geom, sp.zeta, h);
  }
  int i0 = static_cast<int>(std::lround(sp.s0 / grid.ds)) % grid.n_s;

  using Cplx = std::complex<double>;
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(grid.unknowns());
  for (int i = 0; i < grid.n_s; ++i) {
    double s_rel = grid.s_node(i) - sp.s0;
    s_rel -= L * std::round(s_rel / L);
    double env_s = chi_cutoff(s_rel / sp.s_width);
    // Seam-compensating unitary: +twist when the forward walk from i0
    // crosses the seam, -twist on the backward half.
    int df = (i - i0 + grid.n_s) % grid.n_s;
    int sigma = 0;
    if (df <= grid.n_s / 2)
      sigma = (i < i0) ? 1 : 0;
    else
      sigma = (i > i0) ? -1 : 0;
    Cplx c = std::exp(Cplx(0.0, twist * sigma));
    Cplx phase = std::exp(Cplx(0.0, -sp.xi * s_rel / rh)) * c;
    if (env_s == 0.0) continue;
    for (int j = 0; j < grid.n_t; ++j) {
      double t = grid.t_node(j);
      double env_t = chi_cutoff(t / t_env);
      if (env_t == 0.0) break;
      v[grid.index(i, j)] = env_s * env_t * profile_at(t / rh) * phase;
    }
  }
  return v;
}

struct TrialResult {
  double energy = 0.0;       // Rayleigh quotient in the assembled form
  TrialSpec spec;
  StripGrid grid;
  double mass = 0.0;         // W-mass of the raw trial vector
};

// Rayleigh quotient of the trial in an already-assembled form.
inline double trial_quotient(const HermitianSparse& hs, const Eigen::VectorXcd& v) {
  Eigen::VectorXcd sv = hs.matrix.selfadjointView<Eigen::Lower>() * v;
  double num = v.dot(sv).real();
  double den = (v.array().abs2() * hs.weight.array()).sum();
  if (!(den > 0.0)) throw std::invalid_argument("trial_quotient: zero trial vector");
  return num / den;
}

// Convenience: assemble, build, evaluate on a suggested grid.
inline TrialResult trial_energy(const DomainGeometry& geom, double h, double epsilon,
                                const PerturbationTable* table, StripOptions opt = {}) {
  TrialSpec sp = resolve_trial_spec(geom, h, epsilon, table);
  opt.epsilon_hint = epsilon;
  StripGrid grid = suggest_strip_grid(geom, h, sp.zeta, opt);
  HermitianSparse hs = assemble_strip(geom, grid, h, sp.zeta);
  Eigen::VectorXcd v = build_trial_vector(geom, grid, h, sp, table);
  TrialResult out;
  out.energy = trial_quotient(hs, v);
  out.spec = sp;
  out.grid = grid;
  out.mass = (v.array().abs2() * hs.weight.array()).sum();
  return out;
}

}  // namespace magrobin
