#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <magrobin/robin_models.hpp>

using namespace magrobin;

TEST_CASE("half-line Robin ground state at -1", "[robin]") {
  Grid1D g = Grid1D::from_truncation(20.0, 8001);
  CHECK(std::abs(lambda_h00_richardson(g) + 1.0) <= 1e-6);
  // second-order convergence of the raw value
  double c1 = lambda_h00(g) + 1.0;
  double c2 = lambda_h00(g.refined()) + 1.0;
  CHECK(c1 / c2 == Catch::Approx(4.0).epsilon(0.02));
}

TEST_CASE("harmonic model matches the quadratic series at small coupling", "[robin]") {
  // lambda_1(zeta=0.1, xi=0.05): series gives -1 + zeta^2/2 - zeta xi + xi^2
  // = -0.9975 at grade one and -7/8 z^4 + 5/4 z^3 x - 1/2 z^2 x^2 = -3.75e-5
  // at grade two; grade three is O(1e-6).
  Grid1D g = Grid1D::from_truncation(20.0, 20001);
  auto pairs = solve_harm(0.1, 0.05, g);
  CHECK(std::abs(pairs[0].value - (-0.9975 - 3.75e-5)) <= 5e-6);
  CHECK(std::abs(pairs[0].value + 0.9975) <= 1e-4);
}

TEST_CASE("shifted oscillator binds near the boundary and unbinds far away", "[robin]") {
  // A large and positive: the well sits far from the boundary, so the Robin
  // term is invisible and the energy approaches the bulk oscillator value 1.
  double far = mu_shifted_osc(8.0, 1.0, shifted_osc_default_grid(8.0));
  CHECK(std::abs(far - 1.0) <= 1e-3);
  // A large and negative: the potential at the boundary is ~ A^2.
  double rep = mu_shifted_osc(-8.0, 1.0, shifted_osc_default_grid(8.0));
  CHECK(rep > 30.0);
}

TEST_CASE("theta(0) is the de Gennes constant", "[robin]") {
  ThetaResult t = theta(ThetaParams{});
  CHECK(std::abs(t.value - 0.5901061) <= 5e-4);
  // known identity: the minimizing momentum squares to the minimum value
  CHECK(std::abs(t.xi_star * t.xi_star - t.value) <= 5e-3);
}

TEST_CASE("find_A0 brackets the binding threshold", "[robin][a0]") {
  FindA0Result r = find_A0();
  CHECK(r.a0 > 0.1);
  CHECK(r.a0 < 6.0);
  CHECK(r.a0 == Catch::Approx(std::max(r.positive_side, r.negative_side)));
  // beyond the threshold mu stays above 1/2 (spot checks)
  for (double off : {0.05, 0.5, 2.0}) {
    double a = r.a0 + off;
    CHECK(mu_shifted_osc(a, 1.0, shifted_osc_default_grid(a)) >= 0.5);
    CHECK(mu_shifted_osc(-a, 1.0, shifted_osc_default_grid(a)) >= 0.5);
  }
}

TEST_CASE("weighted operator degenerates to the Dirichlet-truncated oscillator", "[robin]") {
  // beta = m = 0 and Delta == 0 leave exactly the H_harm form on (0, h^-delta)
  // with a Dirichlet cap, on the same grid.
  WeightedParams p;
  p.h = 0.01;
  p.epsilon = 0.125;
  p.delta = 0.45;  // deep enough that the harmonic state clears the wall
  p.profile = DeltaProfile::zero;
  p.xi = 0.03;
  p.n_points = 6001;
  WeightedResult wr = solve_weighted(p);

  double T = std::pow(p.h, -p.delta);
  Grid1D g = Grid1D::from_truncation(T, p.n_points);
  auto pairs = solve_harm(wr.zeta, p.xi, g);
  CHECK(std::abs(wr.lambda1 - pairs[0].value) <= 1e-10);
}

TEST_CASE("weighted lower-bound profile respects its envelope", "[robin]") {
  WeightedParams p;
  p.h = 0.01;
  p.beta = 0.5;
  p.m = 1.0;
  // |Delta(tau)| <= M (beta+1) tau is asserted inside solve_weighted for
  // tau >= 1; validate() plus a successful solve is the check.
  WeightedResult wr = solve_weighted(p);
  CHECK(wr.lambda1 < wr.lambda2);
  CHECK(std::isfinite(wr.lambda1));
}

TEST_CASE("weighted second eigenvalue stays above -C |beta| h^{1/2-delta}", "[robin]") {
  for (double beta : {0.3, 0.6}) {
    for (double h : {0.02, 0.005}) {
      WeightedParams p;
      p.h = h;
      p.epsilon = 0.125;
      p.delta = 0.35;  // beta = 0.6 breaches the M (beta+1) tau envelope deeper
      p.beta = beta;
      p.m = 1.0;
      p.xi = 0.5 * std::pow(h, p.epsilon);
      WeightedResult wr = solve_weighted(p);
      double scale = beta * std::pow(h, 0.5 - p.delta);
      INFO("beta " << beta << " h " << h << " lambda2/scale " << wr.lambda2 / scale);
      CHECK(wr.lambda2 >= -10.0 * scale);
    }
  }
}

TEST_CASE("critical coupling unbinds at large momentum", "[robin]") {
  // |xi| >> h^{1/4-delta} forces lambda1 >= -1 + h^{1/2-2delta}
  WeightedParams p;
  p.h = 0.01;
  p.epsilon = 0.25;
  p.delta = 0.15;
  p.beta = 0.4;
  p.m = 1.0;
  double floor_gap = std::pow(p.h, 0.5 - 2.0 * p.delta);
  for (double sign : {1.0, -1.0}) {
    p.xi = sign * 20.0 * std::pow(p.h, 0.25 - p.delta);
    WeightedResult wr = solve_weighted(p);
    CHECK(wr.lambda1 >= -1.0 + floor_gap);
  }
}
