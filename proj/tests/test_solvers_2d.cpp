#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <magrobin/asymptotics.hpp>
#include <magrobin/disk_solver.hpp>
#include <magrobin/geometry.hpp>
#include <magrobin/strip_solver.hpp>

using namespace magrobin;

TEST_CASE("disk zero-field energy carries the curvature correction", "[disk2d]") {
  // (lambda1 + h) / h^{3/2} -> -kappa = -1 for the unit disk as h -> 0.
  auto coeff = [](double h) {
    DiskResult r = solve_disk(h, 0.0);
    return (r.lambda1 + h) / std::pow(h, 1.5);
  };
  double c1 = coeff(0.04);
  double c2 = coeff(0.01);
  CHECK(c2 > -1.15);
  CHECK(c2 < -0.75);
  CHECK(std::abs(c2 + 1.0) < std::abs(c1 + 1.0) + 1e-6);
}

TEST_CASE("disk sector window brackets the minimiser", "[disk2d]") {
  DiskResult r = solve_disk(0.05, 0.2);
  CHECK(r.m1 > r.window_lo);
  CHECK(r.m1 < r.window_hi);
  CHECK(r.sector_lambda1.size() ==
        static_cast<size_t>(r.window_hi - r.window_lo + 1));
  for (const auto& [m, v] : r.sector_lambda1) {
    (void)m;
    CHECK(v >= r.sector_lambda1.at(r.m1));
  }
  CHECK(r.lambda2 >= r.lambda1);
  CHECK(r.ground.size() > 0);
}

TEST_CASE("disk and strip routes agree on the magnetic disk", "[disk2d][strip2d]") {
  double h = 0.05, zeta = 0.2;
  DiskResult dr = solve_disk(h, zeta);

  DomainGeometry g = DomainGeometry::disk(1.0);
  StripOptions opt;
  opt.t_cut = 0.9;
  opt.n_s = 192;
  opt.n_t = 128;
  StripGrid grid = StripGrid::make(g, opt.t_cut, opt.n_s, opt.n_t);
  StripResult sr = solve_strip_on_grid(g, grid, h, zeta, opt);

  INFO("disk " << dr.lambda1 << " strip " << sr.lambda1);
  CHECK(sr.lambda1 == Catch::Approx(dr.lambda1).margin(5e-4));
  CHECK(sr.truncation_mass <= 5e-3);
  CHECK(sr.lambda2 >= sr.lambda1);
}

TEST_CASE("discrete diamagnetic inequality on a shared grid", "[strip2d]") {
  DomainGeometry g = DomainGeometry::disk(1.0);
  double h = 0.05;
  StripOptions opt;
  opt.t_cut = 0.9;
  opt.n_s = 128;
  opt.n_t = 96;
  StripGrid grid = StripGrid::make(g, opt.t_cut, opt.n_s, opt.n_t);
  double l0 = solve_strip_on_grid(g, grid, h, 0.0, opt).lambda1;
  double lz = solve_strip_on_grid(g, grid, h, 0.3, opt).lambda1;
  CHECK(lz >= l0 - 1e-12);

  DiskResult d0 = solve_disk(h, 0.0);
  DiskResult dz = solve_disk(h, 0.3);
  CHECK(dz.lambda1_raw >= d0.lambda1_raw - 1e-12);
}

TEST_CASE("ellipse cap coefficient approaches -kappa_max", "[strip2d]") {
  DomainGeometry g = DomainGeometry::ellipse(2.0, 1.0);
  auto coeff = [&](double h, int n_s, int n_t) {
    StripOptions opt;
    opt.t_cut = 0.45;
    opt.n_s = n_s;
    opt.n_t = n_t;
    StripGrid grid = StripGrid::make(g, opt.t_cut, opt.n_s, opt.n_t);
    StripResult r = solve_strip_on_grid(g, grid, h, 0.0, opt);
    return (r.lambda1 + h) / std::pow(h, 1.5);
  };
  double c1 = coeff(0.01, 160, 120);
  double c2 = coeff(0.003, 288, 224);
  INFO("c(0.01) = " << c1 << " c(0.003) = " << c2);
  CHECK(c2 > -2.05);
  CHECK(c2 < -1.0);
  CHECK(c2 < c1);  // moving toward -kappa_max = -2 from above
}

TEST_CASE("alpha-scaled disk operator matches the parameter bridge exactly",
          "[disk2d][bridge]") {
  double h = 0.2, b = 1.0, alpha = 0.4, gamma = -1.1;
  DiskResult direct = solve_disk_alpha(h, b, alpha, gamma);
  double mapped = mu1_bridge(h, b, alpha, gamma, [](double hp, double zp) {
    return solve_disk(hp, zp).lambda1;
  });
  // Same radial grid, entrywise-proportional matrices: agreement to rounding.
  CHECK(direct.lambda1 == Catch::Approx(mapped).margin(1e-8));
}

TEST_CASE("diamagnetic gap bookkeeping", "[bridge]") {
  DomainGeometry g = DomainGeometry::disk(1.0);
  DiamagResult d = diamag_gap(-3.0, 4.0, 0.2, g);
  CHECK(d.h_prime == Catch::Approx(1.0 / 9.0));
  CHECK(d.zeta_prime == Catch::Approx(4.0 / 9.0));
  CHECK(d.scale == Catch::Approx(81.0));
  CHECK(d.gap_raw >= 0.0);
  CHECK(d.gap == Catch::Approx(d.mu_field - d.mu_zero).margin(1e-12));

  CHECK_THROWS_AS(diamag_gap(3.0, 4.0, 0.2, g), std::invalid_argument);
  CHECK_THROWS_AS(mu_tilde(-3.0, -1.0, 0.2, [](double, double) { return 0.0; }),
                  std::invalid_argument);
}
