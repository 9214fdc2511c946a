#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magrobin/grid.hpp"

namespace magrobin {

// Thrown when an iterative or direct solve cannot meet its contract.
// Carries the best residual seen so the caller can report diagnostics.
class SolveError : public std::runtime_error {
 public:
  explicit SolveError(const std::string& what, double best_residual = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

// Symmetric tridiagonal form matrix S together with an optional positive
// weight vector w. The pair represents the generalized problem
//   S x = lambda diag(w) x,
// i.e. the operator A = diag(w)^{-1} S, self-adjoint in the weighted inner
// product <x,y>_w = sum_k w_k x_k y_k. Without a weight, w = 1.
struct SymTridiagonal {
  Eigen::VectorXd diagonal;
  Eigen::VectorXd off_diagonal;  // length diagonal.size()-1
  Eigen::VectorXd weight;        // empty means unit weights

  int dim() const { return static_cast<int>(diagonal.size()); }
  bool has_weight() const { return weight.size() > 0; }

  void validate() const {
    if (diagonal.size() < 2) throw std::invalid_argument("SymTridiagonal: dim must be >= 2");
    if (off_diagonal.size() != diagonal.size() - 1)
      throw std::invalid_argument("SymTridiagonal: off_diagonal must have length dim-1");
    if (has_weight()) {
      if (weight.size() != diagonal.size())
        throw std::invalid_argument("SymTridiagonal: weight must have length dim");
      if (weight.minCoeff() <= 0.0)
        throw std::invalid_argument("SymTridiagonal: weights must be positive");
    }
  }
};

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXcd vector;   // normalized in the operator's weighted inner product
  double residual = 0.0;     // ||A v - value v||_w with ||v||_w = 1
};

struct RealEigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;
  double residual = 0.0;
};

namespace detail {

// LU factorization of a (general) tridiagonal matrix with partial pivoting,
// after LAPACK's dgttrf. Row swaps introduce a second superdiagonal.
struct TridiagLU {
  int n = 0;
  Eigen::VectorXd dl, d, du, du2;
  std::vector<int> swapped;

  static TridiagLU factor(Eigen::VectorXd sub, Eigen::VectorXd diag, Eigen::VectorXd sup) {
    TridiagLU f;
    f.n = static_cast<int>(diag.size());
    f.dl = std::move(sub);
    f.d = std::move(diag);
    f.du = std::move(sup);
    f.du2 = Eigen::VectorXd::Zero(std::max(0, f.n - 2));
    f.swapped.assign(std::max(0, f.n - 1), 0);
    const double tiny = std::numeric_limits<double>::min() * 4.0;
    for (int i = 0; i + 1 < f.n; ++i) {
      if (std::abs(f.d[i]) >= std::abs(f.dl[i])) {
        if (f.d[i] == 0.0) f.d[i] = tiny;
        const double m = f.dl[i] / f.d[i];
        f.dl[i] = m;
        f.d[i + 1] -= m * f.du[i];
        if (i + 2 < f.n) f.du2[i] = 0.0;
      } else {
        const double m = f.d[i] / f.dl[i];
        f.d[i] = f.dl[i];
        f.dl[i] = m;
        const double tmp = f.d[i + 1];
        f.d[i + 1] = f.du[i] - m * tmp;
        f.du[i] = tmp;
        if (i + 2 < f.n) {
          f.du2[i] = f.du[i + 1];
          f.du[i + 1] = -m * f.du[i + 1];
        }
        f.swapped[i] = 1;
      }
    }
    if (f.d[f.n - 1] == 0.0) f.d[f.n - 1] = tiny;
    return f;
  }

  void solve_inplace(Eigen::VectorXd& b) const {
    for (int i = 0; i + 1 < n; ++i) {
      if (!swapped[i]) {
        b[i + 1] -= dl[i] * b[i];
      } else {
        const double tmp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = tmp - dl[i] * b[i];
      }
    }
    b[n - 1] /= d[n - 1];
    if (n >= 2) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (int i = n - 3; i >= 0; --i)
      b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
  }
};

// Number of eigenvalues of the standard symmetric tridiagonal (d, e)
// strictly below x, by the Sturm/LDL^T sign count.
inline int sturm_count_below(const Eigen::VectorXd& d, const Eigen::VectorXd& e, double x) {
  const int n = static_cast<int>(d.size());
  const double tiny = std::numeric_limits<double>::min() * 16.0;
  int count = 0;
  double q = d[0] - x;
  if (q < 0.0) ++count;
  for (int i = 1; i < n; ++i) {
    double denom = q;
    if (std::abs(denom) < tiny) denom = (denom < 0.0) ? -tiny : tiny;
    q = d[i] - x - e[i - 1] * e[i - 1] / denom;
    if (q < 0.0) ++count;
  }
  return count;
}

inline double gershgorin_scale(const Eigen::VectorXd& d, const Eigen::VectorXd& e) {
  const int n = static_cast<int>(d.size());
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    double r = std::abs(d[i]);
    if (i > 0) r += std::abs(e[i - 1]);
    if (i + 1 < n) r += std::abs(e[i]);
    s = std::max(s, r);
  }
  return s;
}

// i-th smallest eigenvalue (0-based) of the standard tridiagonal (d, e)
// by bisection on the Sturm count. Deterministic; ~full double precision.
inline double bisect_eigenvalue(const Eigen::VectorXd& d, const Eigen::VectorXd& e, int index) {
  const double scale = gershgorin_scale(d, e);
  double lo = -scale - 1.0, hi = scale + 1.0;
  for (int it = 0; it < 20000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval at rounding limit
    if (sturm_count_below(d, e, mid) >= index + 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

inline Eigen::VectorXd deterministic_start(int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(2.399963229728653 * (i + 1));
  v /= v.norm();
  return v;
}

inline Eigen::VectorXd tridiag_apply(const Eigen::VectorXd& d, const Eigen::VectorXd& e,
                                     const Eigen::VectorXd& x) {
  const int n = static_cast<int>(d.size());
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double s = d[i] * x[i];
    if (i > 0) s += e[i - 1] * x[i - 1];
    if (i + 1 < n) s += e[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

// Eigenvector by inverse iteration at the bisected eigenvalue, with a
// Rayleigh-quotient polish of the eigenvalue. `prev` holds already-computed
// vectors of the same matrix for deflation inside clusters.
struct StandardPair {
  double value;
  Eigen::VectorXd vector;
  double residual;
};

inline StandardPair inverse_iteration_pair(const Eigen::VectorXd& d, const Eigen::VectorXd& e,
                                           double lambda_hat,
                                           const std::vector<Eigen::VectorXd>& prev,
                                           double cluster_tol) {
  const int n = static_cast<int>(d.size());
  const double scale = gershgorin_scale(d, e);
  // Keep T - lambda safely nonsingular: bisection can land within an ulp of
  // the exact eigenvalue, where elimination pivots fall into the denormal
  // range and the solve overflows. A few ulps of the Gershgorin scale are
  // negligible against the separation from the rest of the spectrum.
  const double pert = 8.0 * std::numeric_limits<double>::epsilon() * scale;
  Eigen::VectorXd sub = e, sup = e, dd = d;
  dd.array() -= lambda_hat - pert;
  const TridiagLU lu = TridiagLU::factor(sub, dd, sup);

  Eigen::VectorXd v = deterministic_start(n);
  for (const auto& p : prev) v -= p.dot(v) * p;
  if (v.norm() < 1e-8) v = deterministic_start(n).cwiseProduct(Eigen::VectorXd::LinSpaced(n, 1.0, 2.0));
  v /= v.norm();

  for (int it = 0; it < 4; ++it) {
    lu.solve_inplace(v);
    for (const auto& p : prev) v -= p.dot(v) * p;
    const double nrm = v.norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm))
      throw SolveError("inverse iteration produced a non-finite vector");
    v /= nrm;
  }
  // Rayleigh quotient: quadratically reduces the eigenvalue error left by
  // bisection at the +-eps*scale level.
  double lambda = v.dot(tridiag_apply(d, e, v));
  for (int polish = 0; polish < 2; ++polish) {
    Eigen::VectorXd w = v;
    Eigen::VectorXd ddp = d;
    ddp.array() -= lambda - pert;
    const TridiagLU lup = TridiagLU::factor(e, ddp, e);
    lup.solve_inplace(w);
    for (const auto& p : prev) w -= p.dot(w) * p;
    const double nrm = w.norm();
    if (nrm > 0.0 && std::isfinite(nrm)) {
      v = w / nrm;
      lambda = v.dot(tridiag_apply(d, e, v));
    }
  }
  (void)cluster_tol;
  const double res = (tridiag_apply(d, e, v) - lambda * v).norm();
  return StandardPair{lambda, v, res};
}

// Scale the generalized pair (S, w) to the standard symmetric tridiagonal
// B = W^{-1/2} S W^{-1/2}; B shares eigenvalues with the weighted operator.
inline void to_standard(const SymTridiagonal& m, Eigen::VectorXd& d, Eigen::VectorXd& e) {
  const int n = m.dim();
  d = m.diagonal;
  e = m.off_diagonal;
  if (m.has_weight()) {
    for (int i = 0; i < n; ++i) d[i] /= m.weight[i];
    for (int i = 0; i + 1 < n; ++i) e[i] /= std::sqrt(m.weight[i] * m.weight[i + 1]);
  }
}

}  // namespace detail

// Action of the weighted operator A = diag(w)^{-1} S on a grid function.
inline Eigen::VectorXd apply_weighted_operator(const SymTridiagonal& m, const Eigen::VectorXd& x) {
  const int n = m.dim();
  if (x.size() != n) throw std::invalid_argument("apply_weighted_operator: size mismatch");
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double s = m.diagonal[i] * x[i];
    if (i > 0) s += m.off_diagonal[i - 1] * x[i - 1];
    if (i + 1 < n) s += m.off_diagonal[i] * x[i + 1];
    y[i] = m.has_weight() ? s / m.weight[i] : s;
  }
  return y;
}

// k smallest eigenpairs of the weighted tridiagonal problem, by Sturm
// bisection plus inverse iteration. `tol` is relative to the operator scale
// (Gershgorin bound of the scaled matrix); pairs above it raise SolveError.
inline std::vector<RealEigenPair> smallest_eigenpairs_real(const SymTridiagonal& m, int k,
                                                           double tol = 1e-12) {
  m.validate();
  if (k < 1 || k > m.dim()) throw std::invalid_argument("smallest_eigenpairs: bad k");
  Eigen::VectorXd d, e;
  detail::to_standard(m, d, e);
  const double scale = detail::gershgorin_scale(d, e);
  const double cluster_tol = 1e-8 * scale;

  std::vector<RealEigenPair> out;
  std::vector<Eigen::VectorXd> basis;  // standard-space vectors for deflation
  double prev_value = 0.0;
  for (int i = 0; i < k; ++i) {
    const double lam_hat = detail::bisect_eigenvalue(d, e, i);
    std::vector<Eigen::VectorXd> defl;
    if (i > 0 && std::abs(lam_hat - prev_value) < cluster_tol) defl = basis;
    const auto sp = detail::inverse_iteration_pair(d, e, lam_hat, defl, cluster_tol);
    if (!(sp.residual <= tol * scale))
      throw SolveError("smallest_eigenpairs: residual above tolerance", sp.residual / scale);
    basis.push_back(sp.vector);
    prev_value = sp.value;

    Eigen::VectorXd x = sp.vector;
    if (m.has_weight())
      for (int j = 0; j < m.dim(); ++j) x[j] /= std::sqrt(m.weight[j]);
    // fix an overall sign deterministically: largest-|entry| is positive
    int imax = 0;
    x.cwiseAbs().maxCoeff(&imax);
    if (x[imax] < 0.0) x = -x;
    out.push_back(RealEigenPair{sp.value, std::move(x), sp.residual});
  }
  return out;
}

// Values-only variant: pure bisection, no inverse iteration. Fast enough to
// sit inside scan loops (theta, e_n) where only eigenvalues are compared.
inline std::vector<double> smallest_eigenvalues(const SymTridiagonal& m, int k) {
  m.validate();
  if (k < 1 || k > m.dim()) throw std::invalid_argument("smallest_eigenvalues: bad k");
  Eigen::VectorXd d, e;
  detail::to_standard(m, d, e);
  std::vector<double> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) out.push_back(detail::bisect_eigenvalue(d, e, i));
  return out;
}

inline std::vector<EigenPair> smallest_eigenpairs(const SymTridiagonal& m, int k,
                                                  double tol = 1e-12) {
  std::vector<EigenPair> out;
  for (auto& p : smallest_eigenpairs_real(m, k, tol)) {
    EigenPair q;
    q.value = p.value;
    q.vector = p.vector.cast<std::complex<double>>();
    q.residual = p.residual;
    out.push_back(std::move(q));
  }
  return out;
}

// Solve A x = P rhs restricted to the weighted-orthogonal complement of
// kernel_vector, where A = diag(w)^{-1} S and P projects off kernel_vector.
// Used to invert (-d^2/dtau^2 + 1) on the complement of its ground state.
// The solve runs in the scaled standard space with Wielandt deflation: two
// pivoted tridiagonal solves, then an exact re-projection.
inline Eigen::VectorXd deflated_solve(const SymTridiagonal& m, const Eigen::VectorXd& kernel_vector,
                                      const Eigen::VectorXd& rhs, double tol = 1e-8) {
  m.validate();
  const int n = m.dim();
  if (kernel_vector.size() != n || rhs.size() != n)
    throw std::invalid_argument("deflated_solve: size mismatch");

  Eigen::VectorXd d, e;
  detail::to_standard(m, d, e);
  const double scale = detail::gershgorin_scale(d, e);

  Eigen::VectorXd sqw = Eigen::VectorXd::Ones(n);
  if (m.has_weight()) sqw = m.weight.cwiseSqrt();

  Eigen::VectorXd y0 = kernel_vector.cwiseProduct(sqw);
  const double y0n = y0.norm();
  if (!(y0n > 0.0)) throw std::invalid_argument("deflated_solve: zero kernel vector");
  y0 /= y0n;

  // the kernel must be a near-null direction, and the only one
  const double rq0 = y0.dot(detail::tridiag_apply(d, e, y0));
  const double null_thr = std::max(64.0 * std::abs(rq0), 1e-10 * scale);
  const int below = detail::sturm_count_below(d, e, null_thr);
  if (below >= 2)
    throw SolveError("deflated_solve: matrix has a second near-null direction");
  if (std::abs(rq0) > 1e-4 * scale)
    throw SolveError("deflated_solve: kernel_vector is not a near-null direction",
                     std::abs(rq0) / scale);

  // b = W^{1/2} (rhs projected off the kernel in the weighted inner product)
  Eigen::VectorXd b = rhs.cwiseProduct(sqw);
  b -= y0.dot(b) * y0;

  const detail::TridiagLU lu = detail::TridiagLU::factor(e, d, e);
  Eigen::VectorXd z1 = b;
  lu.solve_inplace(z1);
  Eigen::VectorXd z2 = y0;
  lu.solve_inplace(z2);
  const double denom = y0.dot(z2);
  if (!std::isfinite(denom) || std::abs(denom) < 1e-300)
    throw SolveError("deflated_solve: kernel vector has no overlap with the near-null space");
  Eigen::VectorXd y = z1 - (y0.dot(z1) / denom) * z2;
  y -= y0.dot(y) * y0;

  const double res = (detail::tridiag_apply(d, e, y) - b).norm() /
                     std::max(1.0, b.norm());
  if (!(res <= std::max(tol, 1e-13 * scale)))
    throw SolveError("deflated_solve: residual above tolerance", res);

  return y.cwiseQuotient(sqw);
}

}  // namespace magrobin
