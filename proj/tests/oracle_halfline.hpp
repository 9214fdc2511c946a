#pragma once

// Independent oracle for the half-line Rayleigh-Schrodinger recursion, in
// exact rational arithmetic. Every corrector of
//
//   H(zeta, xi) = -d^2/dtau^2 + (zeta tau - xi)^2,  u'(0) = -u(0)
//
// around u0 = sqrt(2) e^{-tau} has the form q(tau) u0 with q a rational
// polynomial, because:
//   * the graded potentials V0 = tau^2, V1 = -2 tau, V2 = 1 multiply
//     polynomials into polynomials;
//   * <q1 u0, q2 u0> = sum_k (q1 q2)_k k! / 2^k is rational;
//   * the resolvent (H0+1)^{-1}(p u0) = q u0 solves 2q' - q'' = p, and with
//     r = q',
//       r(tau) = e^{2 tau} Int_tau^inf p(s) e^{-2s} ds
//              = sum_k p_k sum_{i<=k} (k!/i!) tau^i / 2^{k-i+1},
//     which is again a polynomial; solvability <p u0, u0> = 0 is exactly
//     r(0) = 0, and the additive constant in q is fixed by <q u0, u0> = 0.
//
// This reproduces the continuum coefficients with no discretisation at all,
// so it is a genuinely independent check of the grid-based build_table.

#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using Rat = boost::multiprecision::cpp_rational;
using Poly = std::vector<Rat>;  // coefficient of tau^k at index k

inline Rat factorial(int k) {
  Rat f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

inline Rat pow2(int k) {
  Rat p = 1;
  for (int i = 0; i < k; ++i) p *= 2;
  return p;
}

inline void add_scaled(Poly& a, const Poly& b, const Rat& c, int shift = 0) {
  if (a.size() < b.size() + shift) a.resize(b.size() + shift, Rat(0));
  for (std::size_t k = 0; k < b.size(); ++k) a[k + shift] += c * b[k];
}

// <q u0, u0> = sum_k q_k k! / 2^k.
inline Rat inner_u0(const Poly& q) {
  Rat acc = 0;
  for (std::size_t k = 0; k < q.size(); ++k) acc += q[k] * factorial(static_cast<int>(k)) / pow2(static_cast<int>(k));
  return acc;
}

// (H0+1)^{-1}(p u0) = q u0 on the u0-orthogonal complement; requires
// inner_u0(p) == 0 (checked via r(0) = 0).
inline Poly resolvent(const Poly& p) {
  Poly r;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] == 0) continue;
    for (std::size_t i = 0; i <= k; ++i) {
      Rat c = p[k] * factorial(static_cast<int>(k)) /
              (factorial(static_cast<int>(i)) * pow2(static_cast<int>(k - i + 1)));
      add_scaled(r, Poly{c}, Rat(1), static_cast<int>(i));
    }
  }
  if (!r.empty() && r[0] != 0)
    throw std::logic_error("oracle::resolvent: rhs not orthogonal to u0");
  Poly q(r.size() + 1, Rat(0));
  for (std::size_t i = 0; i < r.size(); ++i) q[i + 1] = r[i] / Rat(static_cast<int>(i) + 1);
  q[0] = -inner_u0(q);
  return q;
}

struct RationalTable {
  // mu[j-1][p], p = 0..2j; w[j][p] is the corrector polynomial (w[0][0] = 1).
  std::vector<std::vector<Rat>> mu;
  std::vector<std::vector<Poly>> w;
};

inline RationalTable build_rational_table(int order) {
  RationalTable t;
  t.w.resize(order + 1);
  t.w[0] = {Poly{Rat(1)}};
  t.mu.resize(order);
  // V_{p'} as (shift, coefficient) monomials: tau^2, -2 tau, 1.
  const int vshift[3] = {2, 1, 0};
  const Rat vcoef[3] = {Rat(1), Rat(-2), Rat(1)};
  for (int j = 1; j <= order; ++j) {
    t.w[j].resize(2 * j + 1);
    t.mu[j - 1].resize(2 * j + 1, Rat(0));
    for (int p = 0; p <= 2 * j; ++p) {
      Poly v;
      for (int pp = 0; pp <= 2; ++pp) {
        int q = p - pp;
        if (q < 0 || q > 2 * (j - 1)) continue;
        add_scaled(v, t.w[j - 1][q], vcoef[pp], vshift[pp]);
      }
      for (int jp = 1; jp < j; ++jp)
        for (int pp = 0; pp <= 2 * jp; ++pp) {
          int q = p - pp;
          if (q < 0 || q > 2 * (j - jp)) continue;
          add_scaled(v, t.w[j - jp][q], -t.mu[jp - 1][pp]);
        }
      Rat mu = inner_u0(v);
      Poly rhs = v;
      add_scaled(rhs, Poly{Rat(1)}, -mu);
      Poly u = resolvent(rhs);
      for (auto& c : u) c = -c;
      t.mu[j - 1][p] = mu;
      t.w[j][p] = u;
    }
  }
  return t;
}

// Frozen expected values (derived independently from the closed-form
// recursion; the runtime oracle must reproduce them exactly):
//   mu_1 = ( 1/2, -1,   1 )                        [zeta^2, zeta xi, xi^2]
//   mu_2 = (-7/8, 5/4, -1/2, 0, 0 )                [zeta^4 ... xi^4]
//   u_{1, xi^2 grade} = 0 identically
//   w_{1,0} = 1/4 - tau^2/4 - tau^3/6,  w_{1,1} = -1/4 + tau^2/2.
inline RationalTable frozen_table2() {
  RationalTable t;
  t.mu = {{Rat(1, 2), Rat(-1), Rat(1)}, {Rat(-7, 8), Rat(5, 4), Rat(-1, 2), Rat(0), Rat(0)}};
  t.w.resize(3);
  t.w[0] = {Poly{Rat(1)}};
  t.w[1] = {Poly{Rat(1, 4), Rat(0), Rat(-1, 4), Rat(-1, 6)}, Poly{Rat(-1, 4), Rat(0), Rat(1, 2)},
            Poly{}};
  // w[2] is not frozen; the runtime recursion provides it.
  return t;
}

// Evaluate a rational polynomial times e^{-tau} (the u0-normalised profile)
// at a double point; used to compare against grid correctors.
inline double eval_profile(const Poly& q, double tau) {
  double acc = 0.0, m = 1.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    acc += static_cast<double>(q[k]) * m;
    m *= tau;
  }
  return acc * std::exp(-tau);
}

}  // namespace oracle
