#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <magrobin/hermitian_sparse.hpp>

using namespace magrobin;
using Cplx = std::complex<double>;

namespace {

// Deterministic Hermitian pencil (S, W): tridiagonal band plus a long bond.
HermitianSparse sample_operator(int n, bool definite) {
  std::vector<Eigen::Triplet<Cplx>> trips;
  auto put = [&](int a, int b, Cplx v) {
    trips.emplace_back(a, b, v);
    if (a != b) trips.emplace_back(b, a, std::conj(v));
  };
  for (int i = 0; i < n; ++i) {
    double d = definite ? 4.0 + 0.1 * std::cos(0.9 * i) : 2.0 + 0.05 * i + 0.3 * std::sin(double(i));
    put(i, i, Cplx(d, 0.0));
    if (i + 1 < n)
      put(i, i + 1, Cplx(-1.0 + 0.25 * std::cos(2.1 * i), 0.35 * std::sin(1.3 * i + 0.4)));
    if (i + 7 < n) put(i, i + 7, 0.15 * Cplx(std::cos(0.9 * i), std::sin(0.9 * i)));
  }
  HermitianSparse hs;
  hs.matrix.resize(n, n);
  hs.matrix.setFromTriplets(trips.begin(), trips.end());
  hs.weight.resize(n);
  for (int i = 0; i < n; ++i) hs.weight[i] = 1.0 + 0.4 * std::sin(0.7 * i + 0.2);
  return hs;
}

Eigen::MatrixXcd scaled_dense(const HermitianSparse& hs) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd(hs.matrix);
  Eigen::VectorXd dinv = hs.weight.array().rsqrt();
  return dinv.asDiagonal() * m * dinv.asDiagonal();
}

}  // namespace

TEST_CASE("shift-invert Lanczos matches a dense solve", "[sparse]") {
  int n = 48;
  HermitianSparse hs = sample_operator(n, false);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> dense(scaled_dense(hs));
  REQUIRE(dense.info() == Eigen::Success);

  SparseSolveOptions opt;
  opt.k = 3;
  opt.shift = dense.eigenvalues()[0] - 1.0;
  opt.tol = 1e-12;
  SparseEigenResult res = smallest_eigenpairs(hs, opt);

  REQUIRE(res.values.size() == 3);
  for (int i = 0; i < 3; ++i)
    CHECK(res.values[i] == Catch::Approx(dense.eigenvalues()[i]).margin(1e-9));
  CHECK(res.values[0] <= res.values[1]);
  CHECK(res.values[1] <= res.values[2]);
  CHECK(res.residual <= 1e-9);

  for (int i = 0; i < 3; ++i) {
    // W-normalisation
    double wn = (res.vectors[i].array().abs2() * hs.weight.array()).sum();
    CHECK(wn == Catch::Approx(1.0).margin(1e-10));
    // overlap with the dense eigenvector, modulo phase
    Eigen::VectorXcd xd = hs.weight.array().rsqrt().matrix().asDiagonal() *
                          Eigen::VectorXcd(dense.eigenvectors().col(i));
    double wd = std::sqrt((xd.array().abs2() * hs.weight.array()).sum());
    xd /= wd;
    Cplx ov = (res.vectors[i].conjugate().array() * hs.weight.array() * xd.array()).sum();
    CHECK(std::abs(ov) == Catch::Approx(1.0).margin(1e-8));
  }
}

TEST_CASE("eigenvalues are invariant under a diagonal gauge change", "[sparse]") {
  int n = 40;
  HermitianSparse hs = sample_operator(n, false);
  HermitianSparse gauged = hs;
  Eigen::VectorXcd phase(n);
  for (int i = 0; i < n; ++i) phase[i] = std::polar(1.0, 0.61 * i * i);
  for (int col = 0; col < gauged.matrix.outerSize(); ++col)
    for (Eigen::SparseMatrix<Cplx>::InnerIterator it(gauged.matrix, col); it; ++it)
      it.valueRef() *= std::conj(phase[it.row()]) * phase[col];

  SparseSolveOptions opt;
  opt.k = 2;
  opt.shift = -12.0;
  SparseEigenResult a = smallest_eigenpairs(hs, opt);
  SparseEigenResult b = smallest_eigenpairs(gauged, opt);
  CHECK(a.values[0] == Catch::Approx(b.values[0]).margin(1e-10));
  CHECK(a.values[1] == Catch::Approx(b.values[1]).margin(1e-10));
}

TEST_CASE("a misplaced shift is walked down via the inertia certificate", "[sparse]") {
  int n = 36;
  HermitianSparse hs = sample_operator(n, true);  // positive definite

  SparseSolveOptions good;
  good.k = 2;
  good.shift = 0.0;
  SparseEigenResult ref = smallest_eigenpairs(hs, good);

  SparseSolveOptions bad = good;
  bad.shift = 50.0;  // far above the whole spectrum
  SparseEigenResult rec = smallest_eigenpairs(hs, bad);
  CHECK(rec.values[0] == Catch::Approx(ref.values[0]).margin(1e-9));
  CHECK(rec.values[1] == Catch::Approx(ref.values[1]).margin(1e-9));
}

TEST_CASE("operator validation", "[sparse]") {
  HermitianSparse hs = sample_operator(12, true);
  SparseSolveOptions opt;

  opt.k = 12;
  CHECK_THROWS_AS(smallest_eigenpairs(hs, opt), std::invalid_argument);
  opt.k = 0;
  CHECK_THROWS_AS(smallest_eigenpairs(hs, opt), std::invalid_argument);

  HermitianSparse badw = hs;
  badw.weight[3] = 0.0;
  opt.k = 1;
  CHECK_THROWS_AS(smallest_eigenpairs(badw, opt), std::invalid_argument);

  HermitianSparse badsz = hs;
  badsz.weight.resize(5);
  CHECK_THROWS_AS(smallest_eigenpairs(badsz, opt), std::invalid_argument);
}
