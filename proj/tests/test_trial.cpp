#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <magrobin/perturbation.hpp>
#include <magrobin/strip_solver.hpp>
#include <magrobin/trial_state.hpp>

using namespace magrobin;

namespace {
const PerturbationTable& table2() {
  static PerturbationTable t = build_table(2, default_table_grid());
  return t;
}
}  // namespace

TEST_CASE("trial spec regime wiring", "[trial]") {
  DomainGeometry g = DomainGeometry::ellipse(2.0, 1.0);
  double h = 0.05;

  TrialSpec above = resolve_trial_spec(g, h, 0.3, nullptr);
  CHECK(above.n == 0);
  CHECK(above.xi == 0.0);
  CHECK(above.t_width == Catch::Approx(std::pow(h, 0.375)));
  CHECK(above.s_width == Catch::Approx(std::pow(h, 0.125)));
  CHECK(above.s0 == 0.0);
  CHECK(above.zeta == Catch::Approx(std::pow(h, 0.3)));

  TrialSpec crit = resolve_trial_spec(g, h, 0.25, &table2());
  CHECK(crit.n == 1);
  CHECK(crit.xi == Catch::Approx(0.5 * crit.zeta));
  CHECK(crit.t_width == Catch::Approx(std::pow(h, 7.0 / 16.0)));

  TrialSpec below = resolve_trial_spec(g, h, 0.125, &table2());
  CHECK(below.n == 2);
  CHECK(below.xi > 0.1 * below.zeta);
  CHECK(below.xi < 0.9 * below.zeta);
  CHECK(below.t_width == Catch::Approx(std::pow(h, 0.375)));
  CHECK(below.s_width == Catch::Approx(std::pow(h, 0.0625)));

  CHECK_THROWS_AS(resolve_trial_spec(g, h, 0.125, nullptr), std::invalid_argument);
  CHECK_THROWS_AS(resolve_trial_spec(g, h, 0.08, &table2()), std::invalid_argument);
  CHECK_THROWS_AS(resolve_trial_spec(g, 0.0, 0.3, nullptr), std::invalid_argument);
}

TEST_CASE("trial quotient dominates the solved ground energy", "[trial]") {
  DomainGeometry g = DomainGeometry::ellipse(2.0, 1.0);
  double h = 0.05;
  StripOptions opt;
  opt.t_cut = 0.45;
  opt.n_s = 256;
  opt.n_t = 64;

  for (double eps : {0.3, 0.25, 0.125}) {
    const PerturbationTable* table = eps > 0.25 ? nullptr : &table2();
    TrialResult tr = trial_energy(g, h, eps, table, opt);
    StripResult sol = solve_strip_on_grid(g, tr.grid, h, tr.spec.zeta, opt);
    INFO("eps " << eps << " trial " << tr.energy << " lambda1 " << sol.lambda1);
    CHECK(sol.lambda1 <= tr.energy + 1e-10 * std::max(1.0, std::abs(tr.energy)));
    CHECK(tr.energy < -0.5 * h);          // trial actually binds to the boundary
    CHECK(tr.energy - sol.lambda1 < 0.5 * h);  // and is not far off
    CHECK(tr.mass > 0.0);
  }
}

TEST_CASE("seam compensation is exact under disk rotation", "[trial]") {
  DomainGeometry g = DomainGeometry::disk(1.0);
  double h = 0.05, eps = 0.3;
  StripGrid grid = StripGrid::make(g, 0.9, 128, 96);
  TrialSpec sp = resolve_trial_spec(g, h, eps, nullptr);
  REQUIRE(flux_twist(g, sp.zeta, h) > 1e-3);  // the seam really carries a twist

  HermitianSparse hs = assemble_strip(g, grid, h, sp.zeta);
  // centred on the seam: the envelope wraps around s = 0 and the
  // compensating unitary must undo the twist exactly
  Eigen::VectorXcd v0 = build_trial_vector(g, grid, h, sp, nullptr);
  TrialSpec away = sp;
  away.s0 = 0.5 * g.perimeter();  // support avoids the seam entirely
  Eigen::VectorXcd v1 = build_trial_vector(g, grid, h, away, nullptr);

  double q0 = trial_quotient(hs, v0);
  double q1 = trial_quotient(hs, v1);
  CHECK(q0 == Catch::Approx(q1).margin(1e-11));
}
