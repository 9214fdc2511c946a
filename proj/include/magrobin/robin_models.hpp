#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "magrobin/grid.hpp"
#include "magrobin/optimize.hpp"
#include "magrobin/tridiagonal.hpp"

// Half-line model operators with the attractive Robin condition
// u'(0) = -gamma u(0), truncated to [0, T] with a Dirichlet wall at T.
//
// Convention used throughout the 1D modules: a grid function is the vector
// of nodal values at nodes 0 .. n_points-2; the Dirichlet node at T is
// omitted (its value is identically zero).

namespace magrobin {

// Weak-form assembly of
//   q(u) = sum_cells cm (u_{k+1}-u_k)^2/dx + sum_k w_k nm_k V_k u_k^2 - robin_coeff u_0^2
// with mass sum_k w_k nm_k u_k^2, where w are trapezoid weights. The node
// metric nm and cell metric cm default to 1. The boundary term at tau=0 is
// the unambiguous (form-level) encoding of u'(0) = -robin_coeff u(0); it
// reproduces the second-order ghost-point stencil at the boundary row.
inline SymTridiagonal assemble_robin_form(const Grid1D& g, const Eigen::VectorXd& potential,
                                          double robin_coeff,
                                          const Eigen::VectorXd& node_metric = Eigen::VectorXd(),
                                          const Eigen::VectorXd& cell_metric = Eigen::VectorXd()) {
  g.validate();
  const int n = g.n_points - 1;  // unknowns; Dirichlet node dropped
  if (potential.size() != n)
    throw std::invalid_argument("assemble_robin_form: potential must have n_points-1 entries");
  const bool has_nm = node_metric.size() > 0;
  const bool has_cm = cell_metric.size() > 0;
  if (has_nm && node_metric.size() != n)
    throw std::invalid_argument("assemble_robin_form: node_metric size mismatch");
  if (has_cm && cell_metric.size() != n)
    throw std::invalid_argument("assemble_robin_form: cell_metric size mismatch");

  const double dx = g.spacing;
  SymTridiagonal m;
  m.diagonal = Eigen::VectorXd::Zero(n);
  m.off_diagonal = Eigen::VectorXd::Zero(n - 1);
  m.weight = Eigen::VectorXd::Zero(n);

  for (int c = 0; c < n; ++c) {  // cell c joins nodes c and c+1
    const double cm = has_cm ? cell_metric[c] : 1.0;
    if (!(cm > 0.0)) throw std::invalid_argument("assemble_robin_form: cell metric must stay positive");
    m.diagonal[c] += cm / dx;
    if (c + 1 < n) {
      m.diagonal[c + 1] += cm / dx;
      m.off_diagonal[c] -= cm / dx;
    }
  }
  for (int k = 0; k < n; ++k) {
    const double w = (k == 0) ? 0.5 * dx : dx;
    const double nm = has_nm ? node_metric[k] : 1.0;
    if (!(nm > 0.0)) throw std::invalid_argument("assemble_robin_form: node metric must stay positive");
    m.diagonal[k] += w * nm * potential[k];
    m.weight[k] = w * nm;
  }
  m.diagonal[0] -= robin_coeff;
  return m;
}

// Ground-state energy of H_{0,0} = -d^2/dtau^2, u'(0) = -u(0).
// Exact value -1 with eigenfunction sqrt(2) e^{-tau}.
inline double lambda_h00(const Grid1D& g) {
  const int n = g.n_points - 1;
  const SymTridiagonal m = assemble_robin_form(g, Eigen::VectorXd::Zero(n), 1.0);
  return smallest_eigenvalues(m, 1)[0];
}

// Richardson extrapolation over (g, refined g); cancels the dx^2 error term.
inline double lambda_h00_richardson(const Grid1D& g) {
  const double coarse = lambda_h00(g);
  const double fine = lambda_h00(g.refined());
  return (4.0 * fine - coarse) / 3.0;
}

namespace detail {

inline void check_truncation_mass(const Eigen::VectorXd& ground, const SymTridiagonal& m,
                                  const char* who, double limit = 1e-8) {
  const int n = static_cast<int>(ground.size());
  const int tail = std::max(1, n / 10);
  double tail_mass = 0.0, total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = m.weight[i] * ground[i] * ground[i];
    total += c;
    if (i >= n - tail) tail_mass += c;
  }
  if (!(tail_mass / total <= limit))
    throw SolveError(std::string(who) + ": truncation too small (ground-state mass at the wall)",
                     tail_mass / total);
}

}  // namespace detail

// k lowest eigenpairs of H_harm(zeta, xi) = -d^2/dtau^2 + (zeta tau - xi)^2,
// u'(0) = -u(0). Fails if the ground state touches the Dirichlet wall.
inline std::vector<RealEigenPair> solve_harm(double zeta, double xi, const Grid1D& g, int k = 1,
                                             double tol = 1e-12) {
  const int n = g.n_points - 1;
  Eigen::VectorXd V(n);
  for (int i = 0; i < n; ++i) {
    const double t = g.node(i);
    V[i] = (zeta * t - xi) * (zeta * t - xi);
  }
  const SymTridiagonal m = assemble_robin_form(g, V, 1.0);
  auto pairs = smallest_eigenpairs_real(m, k, tol);
  detail::check_truncation_mass(pairs[0].vector, m, "solve_harm");
  return pairs;
}

// Lowest eigenvalue of -d^2/dtau^2 + (tau - A)^2 with u'(0) = -robin_gamma u(0)
// (form boundary term -robin_gamma |u(0)|^2).
inline double mu_shifted_osc(double A, double robin_gamma, const Grid1D& g) {
  const int n = g.n_points - 1;
  Eigen::VectorXd V(n);
  for (int i = 0; i < n; ++i) {
    const double t = g.node(i);
    V[i] = (t - A) * (t - A);
  }
  const SymTridiagonal m = assemble_robin_form(g, V, robin_gamma);
  return smallest_eigenvalues(m, 1)[0];
}

// Grid that confines the shifted oscillator well at tau = A:
// T covers the well plus ~12 decay lengths, spacing ~2.5e-3.
inline Grid1D shifted_osc_default_grid(double A) {
  const double T = std::max(18.0, A + 12.0);
  const int n = static_cast<int>(std::lround(T / 2.5e-3)) + 1;
  return Grid1D::from_truncation(T, n);
}

struct ThetaParams {
  double gamma = 0.0;
  double xi_lo = -2.0;   // scan window for the minimizing momentum
  double xi_hi = 4.0;
  double scan_step = 0.01;
  double tol = 1e-8;
  Grid1D grid = Grid1D::from_truncation(18.0, 9001);
};

struct ThetaResult {
  double value = 0.0;    // Theta(gamma)
  double xi_star = 0.0;  // argmin over xi
};

// Theta(gamma) = inf_xi inf spec of the shifted oscillator with boundary
// term -gamma |u(0)|^2. Theta(0) is the de Gennes constant ~0.5901.
inline ThetaResult theta(const ThetaParams& p) {
  auto f = [&](double xi) { return mu_shifted_osc(xi, p.gamma, p.grid); };
  const MinResult r = scan_then_golden(f, p.xi_lo, p.xi_hi, p.scan_step, p.tol);
  if (r.argmin < p.xi_lo + 2.0 * p.scan_step || r.argmin > p.xi_hi - 2.0 * p.scan_step)
    throw SolveError("theta: minimizer at the window edge; widen xi window");
  return ThetaResult{r.value, r.argmin};
}

struct FindA0Params {
  double threshold = 0.5;  // mu(A) >= threshold required for |A| >= A0
  double scan_max = 10.0;
  double scan_step = 0.05;
  double tol = 1e-4;  // bisection tolerance on A0
};

struct FindA0Result {
  double a0 = 0.0;
  double mu_at_a0 = 0.0;     // mu at the binding crossing (= threshold within tol)
  double positive_side = 0.0;
  double negative_side = 0.0;
};

// Smallest A0 >= 0 such that mu(A) >= 1/2 for all |A| >= A0, where
// mu(A) = mu_shifted_osc(A, robin_gamma = 1). Scan at scan_step, then
// bisection on the last sign change of mu - threshold on each side.
inline FindA0Result find_A0(const FindA0Params& p = {}) {
  auto mu = [&](double A) { return mu_shifted_osc(A, 1.0, shifted_osc_default_grid(std::abs(A))); };

  auto crossing = [&](double sign) -> double {
    // largest |A| where mu - threshold changes sign along sign*[0, scan_max]
    double last_lo = -1.0, last_hi = -1.0;
    double prev_a = 0.0, prev_f = mu(0.0) - p.threshold;
    const int nsteps = static_cast<int>(std::ceil(p.scan_max / p.scan_step));
    for (int i = 1; i <= nsteps; ++i) {
      const double a = p.scan_max * static_cast<double>(i) / nsteps;
      const double f = mu(sign * a) - p.threshold;
      if ((prev_f < 0.0) != (f < 0.0)) {
        last_lo = prev_a;
        last_hi = a;
      }
      prev_a = a;
      prev_f = f;
    }
    if (prev_f < 0.0)
      throw SolveError("find_A0: mu stays below threshold at the scan edge; widen scan_max");
    if (last_lo < 0.0) return 0.0;  // never below threshold on this side
    double lo = last_lo, hi = last_hi;
    double flo = mu(sign * lo) - p.threshold;
    while (hi - lo > p.tol) {
      const double mid = 0.5 * (lo + hi);
      const double fm = mu(sign * mid) - p.threshold;
      if ((flo < 0.0) == (fm < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  FindA0Result r;
  r.positive_side = crossing(+1.0);
  r.negative_side = crossing(-1.0);
  r.a0 = std::max(r.positive_side, r.negative_side);
  r.mu_at_a0 = (r.a0 > 0.0) ? mu((r.positive_side >= r.negative_side ? 1.0 : -1.0) * r.a0)
                            : mu(0.0);
  return r;
}

// ---------------------------------------------------------------------------
// Weighted family on (0, h^{-delta}): metric a~ = 1 - (beta + m h^{sigma}) h^{1/2} tau,
// potential (1 + h^{1/2} Delta_{beta,tau}) (zeta tau (1 - beta h^{1/2} tau / 2) - xi)^2
// with zeta = h^epsilon, boundary term -|u(0)|^2, Dirichlet at h^{-delta}.

enum class DeltaProfile {
  lower_bound,  // h^{-1/2}[(1-h^{1/2})(1-(beta+C h^{sigma}) h^{1/2} tau)^{-2} - 1]
  zero
};

struct WeightedParams {
  double h = 0.01;
  double epsilon = 0.125;  // zeta = h^epsilon
  double delta = 0.1;      // truncation exponent, domain (0, h^{-delta})
  double beta = 0.0;
  double m = 0.0;
  double sigma_w = 0.3;
  double xi = 0.0;
  double M = 3.0;          // bound constant for the Delta profile check
  double delta_C = 1.0;    // C inside the lower_bound profile
  DeltaProfile profile = DeltaProfile::lower_bound;
  int n_points = 0;        // 0: automatic (spacing ~1e-3)

  void validate() const {
    if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("WeightedParams: h must be in (0,1)");
    if (!(epsilon > 0.0 && epsilon < 0.5))
      throw std::invalid_argument("WeightedParams: epsilon must be in (0,1/2)");
    if (!(delta > 0.0 && delta < 0.5))
      throw std::invalid_argument("WeightedParams: delta must be in (0,1/2)");
    if (!(M > 0.0)) throw std::invalid_argument("WeightedParams: M must be positive");
  }
};

struct WeightedResult {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double zeta = 0.0;
  Grid1D grid;
  Eigen::VectorXd ground;
};

inline double weighted_delta_profile(const WeightedParams& p, double tau) {
  if (p.profile == DeltaProfile::zero) return 0.0;
  const double sh = std::sqrt(p.h);
  const double a = 1.0 - (p.beta + p.delta_C * std::pow(p.h, p.sigma_w)) * sh * tau;
  return ((1.0 - sh) / (a * a) - 1.0) / sh;
}

inline WeightedResult solve_weighted(const WeightedParams& p) {
  p.validate();
  const double sh = std::sqrt(p.h);
  const double T = std::pow(p.h, -p.delta);
  const int n_points = (p.n_points > 0)
                           ? p.n_points
                           : static_cast<int>(std::lround(T / 1e-3)) + 1;
  const Grid1D g = Grid1D::from_truncation(T, n_points);
  const double zeta = std::pow(p.h, p.epsilon);
  const double mcoef = (p.beta + p.m * std::pow(p.h, p.sigma_w)) * sh;

  const int n = g.n_points - 1;
  Eigen::VectorXd V(n), nm(n), cm(n);
  for (int i = 0; i < n; ++i) {
    const double t = g.node(i);
    const double dl = weighted_delta_profile(p, t);
    if (t >= 1.0 && p.beta > -1.0 && !(std::abs(dl) <= p.M * (p.beta + 1.0) * t))
      throw std::invalid_argument("solve_weighted: Delta profile exceeds the M (beta+1) tau bound");
    const double u = zeta * t * (1.0 - p.beta * sh * t / 2.0) - p.xi;
    V[i] = (1.0 + sh * dl) * u * u;
    nm[i] = 1.0 - mcoef * t;
    cm[i] = 1.0 - mcoef * (t + 0.5 * g.spacing);
    if (!(nm[i] > 0.0) || !(cm[i] > 0.0))
      throw std::invalid_argument("solve_weighted: metric 1-(beta+mh^sigma)h^{1/2}tau is not positive");
  }
  const SymTridiagonal m = assemble_robin_form(g, V, 1.0, nm, cm);
  auto pairs = smallest_eigenpairs_real(m, 2);
  WeightedResult r;
  r.lambda1 = pairs[0].value;
  r.lambda2 = pairs[1].value;
  r.zeta = zeta;
  r.grid = g;
  r.ground = pairs[0].vector;
  return r;
}

}  // namespace magrobin
