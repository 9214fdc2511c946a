#pragma once

// Bottom eigenpairs of large Hermitian pencils S x = lambda W x with diagonal
// positive weight W, as produced by the 2D magnetic form assemblies.
//
// Strategy: scale to the standard form B = W^{-1/2} S W^{-1/2}, factor the
// shifted matrix B - sigma I once, and run Lanczos with full
// reorthogonalisation on (B - sigma I)^{-1}. With sigma placed below the
// bottom of the spectrum the shifted matrix is positive definite, so the
// first factorisation attempt is a simplicial LDLT whose pivots certify the
// placement; if any pivot is nonpositive (sigma landed inside the spectrum,
// or the assembly is indefinite) the code falls back to a sparse LU of the
// same shifted matrix, which shift-invert Lanczos tolerates equally well.
// Everything is deterministic: fixed start vector, no randomisation.

#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "tridiagonal.hpp"  // SolveError, deterministic_start

namespace magrobin {

struct HermitianSparse {
  Eigen::SparseMatrix<std::complex<double>> matrix;  // Hermitian by assembly
  Eigen::VectorXd weight;                            // positive diagonal mass

  int dim() const { return static_cast<int>(matrix.rows()); }
  void validate() const {
    if (matrix.rows() != matrix.cols()) throw std::invalid_argument("HermitianSparse: not square");
    if (weight.size() != matrix.rows())
      throw std::invalid_argument("HermitianSparse: weight size mismatch");
    if (weight.size() == 0) throw std::invalid_argument("HermitianSparse: empty");
    if (weight.minCoeff() <= 0.0) throw std::invalid_argument("HermitianSparse: weight <= 0");
  }
};

struct SparseSolveOptions {
  double shift = 0.0;   // must sit at or below the wanted eigenvalues
  int k = 2;            // number of bottom eigenpairs
  double tol = 1e-10;   // relative Ritz residual target
  int max_iter = 160;   // Lanczos basis cap (full reorthogonalisation)
};

struct SparseEigenResult {
  std::vector<double> values;              // ascending
  std::vector<Eigen::VectorXcd> vectors;   // W-normalised, phase-fixed
  std::string method;                      // "ldlt" or "lu" factorisation path
  int iterations = 0;
  double residual = 0.0;                   // max standard-form ||By - lam y||
};

namespace detail {

class ShiftedFactor {
 public:
  // Factors c = B - shift*I. LDLT pivots give the inertia: `negatives` is the
  // number of eigenvalues below the shift (shift placement certificate). When
  // LDLT breaks down numerically the LU fallback factors the same matrix but
  // offers no inertia; the caller treats that as a misplaced shift.
  ShiftedFactor(const Eigen::SparseMatrix<std::complex<double>>& c, bool& used_lu,
                int& negatives) {
    ldlt_.compute(c);
    negatives = -1;
    if (ldlt_.info() == Eigen::Success) {
      Eigen::VectorXd d = ldlt_.vectorD().real();
      negatives = 0;
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (d[i] == 0.0) {
          negatives = -1;  // singular pivot, inertia unreliable
          break;
        }
        if (d[i] < 0.0) ++negatives;
      }
    }
    if (negatives == 0) {
      use_ldlt_ = true;
      used_lu = false;
      return;
    }
    lu_.analyzePattern(c);
    lu_.factorize(c);
    if (lu_.info() != Eigen::Success)
      throw SolveError("ShiftedFactor: both LDLT and LU factorisations failed", 0.0);
    used_lu = true;
  }

  Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const {
    return use_ldlt_ ? ldlt_.solve(b).eval() : lu_.solve(b).eval();
  }

 private:
  bool use_ldlt_ = false;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<std::complex<double>>, Eigen::Lower> ldlt_;
  Eigen::SparseLU<Eigen::SparseMatrix<std::complex<double>>> lu_;
};

}  // namespace detail

inline SparseEigenResult smallest_eigenpairs(const HermitianSparse& hs,
                                             const SparseSolveOptions& opt) {
  hs.validate();
  if (opt.k < 1) throw std::invalid_argument("smallest_eigenpairs: k < 1");
  const int n = hs.dim();
  if (opt.k >= n) throw std::invalid_argument("smallest_eigenpairs: k >= dim");

  using Cplx = std::complex<double>;
  Eigen::VectorXd dinv = hs.weight.array().rsqrt();

  // Scaled matrix B = W^{-1/2} S W^{-1/2}, shifted below the wanted states.
  Eigen::SparseMatrix<Cplx> b0 = hs.matrix;
  for (int col = 0; col < b0.outerSize(); ++col)
    for (Eigen::SparseMatrix<Cplx>::InnerIterator it(b0, col); it; ++it)
      it.valueRef() *= dinv[it.row()] * dinv[col];
  Eigen::SparseMatrix<Cplx> eye(n, n);
  eye.setIdentity();

  double scale = 0.0;
  for (int col = 0; col < b0.outerSize(); ++col)
    for (Eigen::SparseMatrix<Cplx>::InnerIterator it(b0, col); it; ++it)
      if (it.row() == col) scale = std::max(scale, std::abs(it.value()));
  scale += std::abs(opt.shift);

  // The requested shift should sit below the spectrum; if the LDLT inertia
  // says otherwise, walk it down geometrically before giving up.
  double shift = opt.shift;
  bool used_lu = false;
  std::unique_ptr<detail::ShiftedFactor> factor;
  for (int attempt = 0;; ++attempt) {
    Eigen::SparseMatrix<Cplx> c = (b0 - shift * eye).eval();
    int negatives = -1;
    factor = std::make_unique<detail::ShiftedFactor>(c, used_lu, negatives);
    if (negatives == 0) break;
    if (attempt >= 3)
      throw SolveError("smallest_eigenpairs: could not place the shift below the spectrum",
                       static_cast<double>(negatives));
    shift = shift - (std::abs(shift) + 1e-3 * scale + 1e-300);
  }

  auto apply_b = [&](const Eigen::VectorXcd& y) -> Eigen::VectorXcd {
    Eigen::VectorXcd z = dinv.cast<Cplx>().asDiagonal() * y;
    z = hs.matrix.selfadjointView<Eigen::Lower>() * z;
    return dinv.cast<Cplx>().asDiagonal() * z;
  };

  // Lanczos on T = C^{-1} (Hermitian, positive when the shift is below the
  // spectrum); largest Ritz values of T are the eigenvalues nearest the shift.
  std::vector<Eigen::VectorXcd> basis;
  std::vector<double> alpha, beta;
  Eigen::VectorXd start = detail::deterministic_start(n);
  Eigen::VectorXcd q = start.cast<Cplx>();
  q /= q.norm();
  basis.push_back(q);

  Eigen::MatrixXd ritz_vecs;
  Eigen::VectorXd ritz_vals;
  int m = 0;
  int converged = 0;
  for (m = 1; m <= opt.max_iter; ++m) {
    Eigen::VectorXcd v = factor->solve(basis.back());
    double a = basis.back().dot(v).real();  // dot() conjugates the callee: q^H v
    alpha.push_back(a);
    // Full reorthogonalisation, repeated once ("twice is enough").
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) v -= b.dot(v) * b;
    double bnorm = v.norm();
    // Ritz extraction on the small tridiagonal.
    Eigen::MatrixXd tm = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      tm(i, i) = alpha[i];
      if (i + 1 < m) tm(i, i + 1) = tm(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tm);
    ritz_vals = es.eigenvalues();
    ritz_vecs = es.eigenvectors();
    converged = 0;
    for (int i = 0; i < opt.k && i < m; ++i) {
      int col = m - 1 - i;  // largest Ritz values of T
      double theta = ritz_vals[col];
      double bound = bnorm * std::abs(ritz_vecs(m - 1, col));
      if (theta > 0.0 && bound <= opt.tol * theta)
        ++converged;
      else
        break;
    }
    if (converged >= opt.k && m >= opt.k + 2) break;
    if (bnorm <= 1e-14 || m == opt.max_iter) break;
    beta.push_back(bnorm);
    basis.push_back(v / bnorm);
  }

  int got = std::min(opt.k, m);
  if (converged < opt.k && m >= opt.max_iter)
    throw SolveError("smallest_eigenpairs: Lanczos failed to converge in " +
                         std::to_string(opt.max_iter) + " iterations",
                     ritz_vals.size() ? ritz_vals[ritz_vals.size() - 1] : 0.0);

  SparseEigenResult out;
  out.method = used_lu ? "lu" : "ldlt";
  out.iterations = m;
  for (int i = 0; i < got; ++i) {
    int col = static_cast<int>(ritz_vals.size()) - 1 - i;  // i = 0: smallest lambda
    double theta = ritz_vals[col];
    if (!(theta > 0.0))
      throw SolveError("smallest_eigenpairs: nonpositive Ritz value, shift inside spectrum",
                       theta);
    double lam = shift + 1.0 / theta;
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(n);
    for (int r = 0; r < static_cast<int>(basis.size()) && r < m; ++r)
      y += ritz_vecs(r, col) * basis[r];
    y /= y.norm();
    double res = (apply_b(y) - lam * y).norm();
    out.residual = std::max(out.residual, res / scale);
    // Back to weighted coordinates, unit W-norm, deterministic phase.
    Eigen::VectorXcd x = dinv.cast<Cplx>().asDiagonal() * y;
    double wn = std::sqrt((x.array().abs2() * hs.weight.array()).sum());
    x /= wn;
    int imax = 0;
    double best = 0.0;
    for (int r = 0; r < n; ++r)
      if (std::abs(x[r]) > best) {
        best = std::abs(x[r]);
        imax = r;
      }
    Cplx phase = x[imax] / std::abs(x[imax]);
    x /= phase;
    out.values.push_back(lam);
    out.vectors.push_back(std::move(x));
  }
  return out;
}

}  // namespace magrobin
