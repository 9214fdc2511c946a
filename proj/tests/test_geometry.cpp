#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include <magrobin/geometry.hpp>

using namespace magrobin;

TEST_CASE("disk geometry", "[geometry]") {
  DomainGeometry g = DomainGeometry::disk(2.0);
  CHECK(g.perimeter() == Catch::Approx(4.0 * DomainGeometry::pi()));
  CHECK(g.area() == Catch::Approx(4.0 * DomainGeometry::pi()));
  CHECK(g.curvature(1.234) == Catch::Approx(0.5));
  CHECK(g.max_curvature() == Catch::Approx(0.5));
}

TEST_CASE("ellipse arclength, curvature, and cap data", "[geometry]") {
  DomainGeometry g = DomainGeometry::ellipse(2.0, 1.0);
  // perimeter 4 a E(1 - b^2/a^2): reference from the complete elliptic integral
  CHECK(g.perimeter() == Catch::Approx(9.688448220547675).epsilon(1e-7));
  CHECK(g.area() == Catch::Approx(2.0 * DomainGeometry::pi()));
  CHECK(g.max_curvature() == Catch::Approx(2.0));
  CHECK(g.min_curvature() == Catch::Approx(0.25));
  CHECK(g.curvature_argmax() == 0.0);
  CHECK(g.curvature(0.0) == Catch::Approx(2.0).epsilon(1e-6));
  // quarter of the perimeter away sits on the minor axis
  CHECK(g.curvature(0.25 * g.perimeter()) == Catch::Approx(0.25).epsilon(1e-6));
  CHECK(g.curvature(0.5 * g.perimeter()) == Catch::Approx(2.0).epsilon(1e-6));
  // d^2 kappa / ds^2 at the cap: analytic value -18 for (a,b) = (2,1)
  CHECK(g.curvature_second_derivative(0.0) == Catch::Approx(-18.0).epsilon(1e-3));
  // periodic wrap
  CHECK(g.curvature(g.perimeter() + 0.3) == Catch::Approx(g.curvature(0.3)).epsilon(1e-12));
}

TEST_CASE("sampled geometry reconstructs a circle", "[geometry]") {
  double L = 2.0 * DomainGeometry::pi();
  std::vector<double> kappa(64, 1.0);
  DomainGeometry g = DomainGeometry::sampled(L, kappa);
  CHECK(g.area() == Catch::Approx(DomainGeometry::pi()).epsilon(1e-4));
  CHECK(g.curvature(1.0) == Catch::Approx(1.0));
}

TEST_CASE("sampled geometry rejects a non-closing profile", "[geometry]") {
  std::vector<double> kappa(64, 1.0);
  kappa[3] = 4.0;  // breaks total turning / closure
  CHECK_THROWS(DomainGeometry::sampled(2.0 * DomainGeometry::pi(), kappa));
}

TEST_CASE("csv round trip", "[geometry]") {
  DomainGeometry ref = DomainGeometry::ellipse(2.0, 1.0);
  int n = 512;
  double ds = ref.perimeter() / n;
  std::string path = "geometry_test_boundary.csv";
  {
    std::ofstream out(path);
    out << "s,kappa\n";
    char buf[64];
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", ds * i, ref.curvature(ds * i));
      out << buf;
    }
  }
  DomainGeometry g = DomainGeometry::from_csv(path);
  std::remove(path.c_str());
  CHECK(g.perimeter() == Catch::Approx(ref.perimeter()).epsilon(1e-9));
  CHECK(g.area() == Catch::Approx(ref.area()).epsilon(1e-3));
  CHECK(g.max_curvature() == Catch::Approx(2.0).epsilon(1e-3));
  CHECK(g.curvature(1.0) == Catch::Approx(ref.curvature(1.0)).margin(2e-3));
}

TEST_CASE("strip grid and twist bookkeeping", "[geometry]") {
  DomainGeometry g = DomainGeometry::disk(1.0);
  StripGrid grid = StripGrid::make(g, 0.5, 64, 16);
  CHECK(grid.unknowns() == 64 * 16);
  CHECK(grid.s_node(64) == Catch::Approx(g.perimeter()));
  CHECK(grid.t_node(16) == Catch::Approx(0.5));
  CHECK_THROWS(StripGrid::make(g, 1.2, 64, 16));  // t_cut * kappa >= 1

  CHECK(strip_gauge(g, 0.0, 0.0) == 0.0);
  CHECK(strip_gauge(g, 0.0, 0.2) == Catch::Approx(-0.2 * (1.0 - 0.1)));

  // twist = zeta Area / h mod 2pi
  double tw = flux_twist(g, 0.1, 0.01);
  double raw = 0.1 * g.area() / 0.01;
  CHECK(tw >= 0.0);
  CHECK(tw < 2.0 * DomainGeometry::pi());
  CHECK(std::abs(std::remainder(tw - raw, 2.0 * DomainGeometry::pi())) <= 1e-9);
}
