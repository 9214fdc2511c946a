#pragma once

// Rayleigh-Schrodinger expansion of the half-line Robin oscillator
//
//   H(zeta, xi) = -d^2/dtau^2 + (zeta*tau - xi)^2,   u'(0) = -u(0),
//
// around the zeta = xi = 0 ground state u0 = sqrt(2) exp(-tau), eigenvalue -1.
// The potential splits into graded monomials
//
//   (zeta*tau - xi)^2 = zeta^2 V0 + zeta*xi V1 + xi^2 V2,
//   V0 = tau^2,  V1 = -2 tau,  V2 = 1,
//
// and the expansion is organised by the bidegree zeta^(2j-p) xi^p:
//
//   w_n   = u0 + sum_{j=1..n} sum_{p=0..2j} zeta^(2j-p) xi^p u_{j,p}
//   lam_n = -1 + sum_{j=1..n} sum_{p=0..2j} zeta^(2j-p) xi^p mu_{j,p}
//
// Grade (j,p) is produced from lower grades by
//
//   v = sum_{p'=0..2} V_{p'} u_{j-1,p-p'}  -  sum_{j'<j} mu_{j',p'} u_{j-j',p-p'}
//   mu_{j,p} = <v, u0>,    u_{j,p} = -(H0 + 1)^{-1} (v - mu_{j,p} u0)  (on u0-perp)
//
// All of this is carried out on the discrete operator itself: the base pair
// (lam0h, u0h) is the exact ground pair of the discretised H0, and the
// resolvent is the deflated solve against that same matrix shifted by lam0h.
// The discrete potential is exactly quadratic in (zeta, xi), so the recursion
// below is the exact perturbation series of the discrete family; consistency
// checks against the continuum (mu_1 = (1/2, -1, 1), residual decay rates) are
// then limited only by the grid error of the base problem, not by an O(dx^2)
// floor on each coefficient.
//
// Public surface: build_table, lambda_series, quasimode, f_n, e_n,
// smallest_n_for_eps, regime_exponents, JSON round-trip of the table.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "grid.hpp"
#include "optimize.hpp"
#include "robin_models.hpp"
#include "tridiagonal.hpp"

namespace magrobin {

struct PerturbationTable {
  int order = 0;                 // n: grades j = 1..n are tabulated
  Grid1D grid;                   // half-line grid the table was built on
  double base_eigenvalue = 0.0;  // discrete ground eigenvalue of H0 (~ -1)
  Eigen::VectorXd kernel;        // discrete ground state u0h, W-normalised
  // mu[j-1][p] = mu_{j,p}, p = 0..2j; correctors[j-1][p] = u_{j,p} grid function
  std::vector<std::vector<double>> mu;
  std::vector<std::vector<Eigen::VectorXd>> correctors;

  void validate() const {
    if (order < 1) throw std::invalid_argument("PerturbationTable: order < 1");
    grid.validate();
    if (static_cast<int>(mu.size()) != order || static_cast<int>(correctors.size()) != order)
      throw std::invalid_argument("PerturbationTable: grade count mismatch");
    for (int j = 1; j <= order; ++j) {
      if (static_cast<int>(mu[j - 1].size()) != 2 * j + 1)
        throw std::invalid_argument("PerturbationTable: mu row size mismatch");
      if (static_cast<int>(correctors[j - 1].size()) != 2 * j + 1)
        throw std::invalid_argument("PerturbationTable: corrector row size mismatch");
    }
  }
};

namespace detail {

// Assemble H0 (zero potential, Robin coefficient 1) on `grid`.
inline SymTridiagonal assemble_h0(const Grid1D& grid) {
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(grid.n_points - 1);
  return assemble_robin_form(grid, zero, 1.0);
}

}  // namespace detail

// Build the expansion table to grade `order` on `grid`. The base pair and all
// corrector solves use the same discrete operator, so the returned mu are the
// exact series coefficients of the discrete eigenvalue family. Throws
// SolveError if the grid is too coarse to reproduce mu_1 = (1/2, -1, 1) to
// 1e-6, since every consumer of the table relies on that calibration.
inline PerturbationTable build_table(int order, const Grid1D& grid) {
  if (order < 1) throw std::invalid_argument("build_table: order < 1");
  grid.validate();

  SymTridiagonal h0 = detail::assemble_h0(grid);
  std::vector<RealEigenPair> ground = smallest_eigenpairs_real(h0, 1);

  PerturbationTable t;
  t.order = order;
  t.grid = grid;
  t.base_eigenvalue = ground[0].value;
  t.kernel = ground[0].vector;

  // Shift so the kernel of `shifted` is exactly the discrete ground state.
  SymTridiagonal shifted = h0;
  const Eigen::VectorXd& w = h0.weight;
  shifted.diagonal -= t.base_eigenvalue * w;

  const int n = grid.n_points - 1;
  Eigen::VectorXd tau(n);
  for (int i = 0; i < n; ++i) tau[i] = grid.node(i);

  // V_{p'} as diagonal multipliers; V applied to a grid function is pointwise.
  std::vector<Eigen::VectorXd> vmono(3);
  vmono[0] = tau.array().square().matrix();
  vmono[1] = (-2.0 * tau.array()).matrix();
  vmono[2] = Eigen::VectorXd::Ones(n);

  auto wdot = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return static_cast<double>((a.array() * b.array() * w.array()).sum());
  };

  // corr[j][p] with corr[0] = {u0}; grades filled in below.
  std::vector<std::vector<Eigen::VectorXd>> corr(order + 1);
  corr[0] = {t.kernel};
  t.mu.assign(order, {});
  t.correctors.assign(order, {});

  for (int j = 1; j <= order; ++j) {
    corr[j].resize(2 * j + 1);
    t.mu[j - 1].resize(2 * j + 1);
    t.correctors[j - 1].resize(2 * j + 1);
    for (int p = 0; p <= 2 * j; ++p) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
      for (int pp = 0; pp <= 2; ++pp) {
        int q = p - pp;
        if (q < 0 || q > 2 * (j - 1)) continue;
        v += (vmono[pp].array() * corr[j - 1][q].array()).matrix();
      }
      for (int jp = 1; jp < j; ++jp) {
        for (int pp = 0; pp <= 2 * jp; ++pp) {
          int q = p - pp;
          if (q < 0 || q > 2 * (j - jp)) continue;
          v -= t.mu[jp - 1][pp] * corr[j - jp][q];
        }
      }
      double mu = wdot(v, t.kernel);
      // deflated_solve projects the rhs onto the u0-orthogonal complement
      // itself, which is exactly the v - mu*u0 the recursion asks for.
      Eigen::VectorXd u = -deflated_solve(shifted, t.kernel, v);
      t.mu[j - 1][p] = mu;
      corr[j][p] = u;
      t.correctors[j - 1][p] = u;
    }
  }

  // Discretisation moves mu_1 by O(dtau^2); the guard tracks that scale so
  // deliberately coarse grids (used where the matched series cancels the
  // discretisation anyway) still build, while a genuinely broken grid throws.
  const double dtau = grid.spacing;
  const double mu_guard = std::max(1e-6, 10.0 * dtau * dtau);
  if (std::abs(t.mu[0][0] - 0.5) > mu_guard || std::abs(t.mu[0][1] + 1.0) > mu_guard ||
      std::abs(t.mu[0][2] - 1.0) > mu_guard)
    throw SolveError("build_table: grid too coarse, mu_1 != (1/2,-1,1)",
                     std::abs(t.mu[0][0] - 0.5));
  return t;
}

// Grid used for the shipped table and for everything that must stay
// grid-matched with it (series-vs-eigensolve comparisons in particular).
inline Grid1D default_table_grid() { return Grid1D::from_truncation(20.0, 40001); }

// lam_n(zeta, xi) = -1 + sum over grades <= n. Add
// (table.base_eigenvalue + 1) to anchor at the discrete base instead.
inline double lambda_series(const PerturbationTable& t, double zeta, double xi, int n) {
  if (n < 1 || n > t.order) throw std::invalid_argument("lambda_series: bad order");
  double acc = -1.0;
  for (int j = 1; j <= n; ++j)
    for (int p = 0; p <= 2 * j; ++p)
      acc += t.mu[j - 1][p] * std::pow(zeta, 2 * j - p) * std::pow(xi, p);
  return acc;
}

// f_n(zeta, xi) = lam_n + 1: the pure series part, the object whose infimum
// over the xi window defines e_n.
inline double f_n(const PerturbationTable& t, double zeta, double xi, int n) {
  return lambda_series(t, zeta, xi, n) + 1.0;
}

// Quasimode w_n(zeta, xi) as a grid function on the table's grid.
inline Eigen::VectorXd quasimode(const PerturbationTable& t, double zeta, double xi, int n) {
  if (n < 1 || n > t.order) throw std::invalid_argument("quasimode: bad order");
  Eigen::VectorXd w = t.kernel;
  for (int j = 1; j <= n; ++j)
    for (int p = 0; p <= 2 * j; ++p)
      w += std::pow(zeta, 2 * j - p) * std::pow(xi, p) * t.correctors[j - 1][p];
  return w;
}

struct EnResult {
  double value = 0.0;
  double xi_star = 0.0;
};

// e_n(zeta) = inf of f_n(zeta, .) over |xi| <= zeta * max(a0, 1), located by a
// coarse scan plus golden-section refinement. `a0` is the universal constant
// from find_A0; the window only needs to contain the minimiser, so any upper
// bound for A0 works. Default order: the full table.
inline EnResult e_n(const PerturbationTable& t, double zeta, double a0, int n = 0) {
  if (zeta <= 0.0) throw std::invalid_argument("e_n: zeta <= 0");
  if (n == 0) n = t.order;
  double radius = zeta * std::max(a0, 1.0);
  double step = std::min(zeta / 50.0, 0.01);
  MinResult m = scan_then_golden([&](double xi) { return f_n(t, zeta, xi, n); },
                                 -radius, radius, step, 1e-8);
  return EnResult{m.value, m.argmin};
}

// Smallest n with (2n+2) * epsilon > 1/2; only meaningful in the shallow
// regime epsilon < 1/4 where the series enters the two-term expansion.
inline int smallest_n_for_eps(double epsilon) {
  if (!(epsilon > 0.0) || epsilon >= 0.25)
    throw std::invalid_argument("smallest_n_for_eps: requires 0 < epsilon < 1/4");
  int n = 1;
  while ((2.0 * n + 2.0) * epsilon <= 0.5) ++n;
  return n;
}

// Exponent bookkeeping for the two-term eigenvalue expansion
//   lam1(h) = -h + b_eps(zeta) h - kappa_max h^{3/2} + O(h^{r}).
// b_eps is the series infimum e_n for epsilon < 1/4, zeta^2/4 at the critical
// coupling, and 0 above it.
enum class BepsKind { series, quarter_zeta_sq, zero };

struct RegimeExponents {
  double epsilon = 0.0;
  int n = 1;             // series order entering b_eps (1 when unused)
  double sigma = 0.0;    // weight-modulation exponent
  double rho = 0.0;      // localisation length exponent
  double r_lower = 0.0;  // remainder exponent from the lower-bound route
  double r_upper = 0.0;  // remainder exponent from the quasimode route
  BepsKind b_eps = BepsKind::series;
};

inline RegimeExponents regime_exponents(double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon <= 0.5))
    throw std::invalid_argument("regime_exponents: requires 0 < epsilon <= 1/2");
  RegimeExponents r;
  r.epsilon = epsilon;
  if (epsilon < 0.25) {
    double cut = std::min(2.0 * epsilon, 1.0 - 4.0 * epsilon);
    r.n = smallest_n_for_eps(epsilon);
    r.sigma = cut / 5.0;
    r.rho = 0.5 - cut / 4.0;
    r.b_eps = BepsKind::series;
  } else {
    r.n = 1;
    r.sigma = 0.125;
    r.rho = (epsilon == 0.25) ? 7.0 / 16.0 : 0.125;
    r.b_eps = (epsilon == 0.25) ? BepsKind::quarter_zeta_sq : BepsKind::zero;
  }
  if (epsilon <= 0.25) {
    double cands[6] = {1.0 + (2.0 * r.n + 2.0) * epsilon,
                       1.5 + 2.0 * epsilon,
                       1.5 + r.sigma,
                       2.0 * epsilon + 4.0 * r.rho + 2.0 * r.sigma - 0.5,
                       1.0 + r.sigma + r.rho,
                       2.0 - 2.0 * r.sigma};
    r.r_lower = cands[0];
    for (double c : cands) r.r_lower = std::min(r.r_lower, c);
  } else {
    r.r_lower = 1.75;
  }
  if (epsilon < 0.25)
    r.r_upper = 1.0 + std::min((2.0 * r.n + 2.0) * epsilon, 0.5 + epsilon);
  else
    r.r_upper = 13.0 / 8.0;
  return r;
}

// ---------------------------------------------------------------------------
// JSON round-trip. Doubles survive bit-exactly (shortest-roundtrip printing),
// so a reloaded table reproduces series values byte-for-byte.

inline nlohmann::json table_to_json(const PerturbationTable& t) {
  t.validate();
  nlohmann::json j;
  j["format_version"] = 1;
  j["order"] = t.order;
  j["grid"] = {{"n_points", t.grid.n_points}, {"spacing", t.grid.spacing}};
  j["base_eigenvalue"] = t.base_eigenvalue;
  j["kernel"] = std::vector<double>(t.kernel.data(), t.kernel.data() + t.kernel.size());
  j["mu"] = t.mu;
  auto& c = j["correctors"] = nlohmann::json::array();
  for (const auto& row : t.correctors) {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& u : row)
      jr.push_back(std::vector<double>(u.data(), u.data() + u.size()));
    c.push_back(std::move(jr));
  }
  return j;
}

inline PerturbationTable table_from_json(const nlohmann::json& j) {
  if (j.at("format_version").get<int>() != 1)
    throw std::invalid_argument("table_from_json: unknown format_version");
  PerturbationTable t;
  t.order = j.at("order").get<int>();
  t.grid.n_points = j.at("grid").at("n_points").get<int>();
  t.grid.spacing = j.at("grid").at("spacing").get<double>();
  t.base_eigenvalue = j.at("base_eigenvalue").get<double>();
  std::vector<double> k = j.at("kernel").get<std::vector<double>>();
  t.kernel = Eigen::Map<Eigen::VectorXd>(k.data(), static_cast<Eigen::Index>(k.size()));
  t.mu = j.at("mu").get<std::vector<std::vector<double>>>();
  for (const auto& jr : j.at("correctors")) {
    std::vector<Eigen::VectorXd> row;
    for (const auto& ju : jr) {
      std::vector<double> u = ju.get<std::vector<double>>();
      row.push_back(Eigen::Map<Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size())));
    }
    t.correctors.push_back(std::move(row));
  }
  t.validate();
  return t;
}

}  // namespace magrobin
