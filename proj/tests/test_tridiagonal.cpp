#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include <magrobin/tridiagonal.hpp>

using namespace magrobin;

namespace {

// Deterministic non-trivial pencil for cross-checks.
SymTridiagonal sample_pencil(int n, bool weighted) {
  SymTridiagonal m;
  m.diagonal.resize(n);
  m.off_diagonal.resize(n - 1);
  for (int i = 0; i < n; ++i) m.diagonal[i] = 2.0 + std::sin(1.7 * i);
  for (int i = 0; i + 1 < n; ++i) m.off_diagonal[i] = -1.0 + 0.3 * std::cos(0.9 * i);
  if (weighted) {
    m.weight.resize(n);
    for (int i = 0; i < n; ++i) m.weight[i] = 1.0 + 0.1 * std::sin(2.0 * i + 0.5);
  }
  return m;
}

Eigen::VectorXd dense_eigenvalues(const SymTridiagonal& m) {
  int n = static_cast<int>(m.diagonal.size());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) s(i, i) = m.diagonal[i];
  for (int i = 0; i + 1 < n; ++i) s(i, i + 1) = s(i + 1, i) = m.off_diagonal[i];
  if (m.weight.size() == 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    return es.eigenvalues();
  }
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) w(i, i) = m.weight[i];
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(s, w);
  return es.eigenvalues();
}

}  // namespace

TEST_CASE("Dirichlet Laplacian 3x3 has eigenvalues 2 -/+ sqrt(2), 2", "[tridiagonal]") {
  // Second-difference matrix with unit spacing: analytically 2 - 2 cos(k pi / 4).
  SymTridiagonal m;
  m.diagonal = Eigen::VectorXd::Constant(3, 2.0);
  m.off_diagonal = Eigen::VectorXd::Constant(2, -1.0);
  auto vals = smallest_eigenvalues(m, 3);
  REQUIRE(vals.size() == 3);
  CHECK(vals[0] == Catch::Approx(2.0 - std::sqrt(2.0)).epsilon(0.0).margin(1e-12));
  CHECK(vals[1] == Catch::Approx(2.0).epsilon(0.0).margin(1e-12));
  CHECK(vals[2] == Catch::Approx(2.0 + std::sqrt(2.0)).epsilon(0.0).margin(1e-12));
}

TEST_CASE("bisection eigenvalues match a dense solve", "[tridiagonal]") {
  for (bool weighted : {false, true}) {
    SymTridiagonal m = sample_pencil(60, weighted);
    Eigen::VectorXd dense = dense_eigenvalues(m);
    auto vals = smallest_eigenvalues(m, 4);
    for (int i = 0; i < 4; ++i)
      CHECK(vals[i] == Catch::Approx(dense[i]).epsilon(0.0).margin(1e-10));
  }
}

TEST_CASE("eigenpairs satisfy the weighted residual equation", "[tridiagonal]") {
  SymTridiagonal m = sample_pencil(80, true);
  auto pairs = smallest_eigenpairs_real(m, 3);
  REQUIRE(pairs.size() == 3);
  for (const auto& p : pairs) {
    Eigen::VectorXd r = apply_weighted_operator(m, p.vector) - p.value * p.vector;
    // apply_weighted_operator returns W^{-1} S x, so multiply back by W for
    // the true residual S x - lambda W x.
    double num = (r.array() * m.weight.array()).matrix().norm();
    CHECK(num <= 1e-10);
    double wnorm = (p.vector.array().square() * m.weight.array()).sum();
    CHECK(wnorm == Catch::Approx(1.0).epsilon(1e-10));
  }
  CHECK(pairs[0].value < pairs[1].value);
  CHECK(pairs[1].value < pairs[2].value);
}

TEST_CASE("deflated solve inverts on the orthogonal complement", "[tridiagonal]") {
  SymTridiagonal m = sample_pencil(70, true);
  auto ground = smallest_eigenpairs_real(m, 1);
  SymTridiagonal shifted = m;
  shifted.diagonal -= ground[0].value * m.weight;

  Eigen::VectorXd rhs(70);
  for (int i = 0; i < 70; ++i) rhs[i] = std::sin(0.31 * i) + 0.2;
  Eigen::VectorXd u = deflated_solve(shifted, ground[0].vector, rhs);

  // Solution is W-orthogonal to the kernel.
  double overlap = (u.array() * ground[0].vector.array() * m.weight.array()).sum();
  CHECK(std::abs(overlap) <= 1e-10);

  // (S - lambda W) u = W (rhs - c k): the W-orthogonal projection of the
  // rhs interpreted as a grid function.
  Eigen::VectorXd su = (apply_weighted_operator(shifted, u).array() * m.weight.array()).matrix();
  double c = (rhs.array() * ground[0].vector.array() * m.weight.array()).sum();
  Eigen::VectorXd proj =
      ((rhs - c * ground[0].vector).array() * m.weight.array()).matrix();
  CHECK((su - proj).norm() <= 1e-8 * proj.norm());
}
