#include <doctest.h>

#include <numbers>

#include "relmode/models.hpp"
#include "relmode/pipeline.hpp"
#include "relmode/rpo_search.hpp"

using namespace relmode;

namespace {

struct PendulumSetup {
  EquivariantHamiltonianModel model = spherical_pendulum();
  ResonanceSpace u;
  std::vector<IsotropyDatum> table;
  TaylorAnalysis ta;
  IsotropyCell cell;

  PendulumSetup() {
    const Mat a = model.space().hamiltonian_matrix(model.hess_h(Vec::Zero(4)));
    u = resonance_space(jordan_chevalley(a, model.space()), 1.0);
    table = isotropy_table(model.action(), u);
    ta = taylor_analysis(model, table[0].fixed_space, u.semisimple / u.nu0);
    cell = make_cell(model.action(), "e", table[0].l_coords, Vec::Constant(1, 0.1));
  }
};

}  // namespace

TEST_CASE("parallel multistart matches the serial reference slot by slot") {
  const PendulumSetup s;
  const auto p = objective_problem(s.model, s.ta, s.cell);
  const auto starts = halton_starts(p.dim, 64, 7);
  const auto serial = multistart_serial(p, starts);
  for (int jobs : {1, 2, 4}) {
    const auto par = multistart_parallel(p, starts, {}, jobs);
    REQUIRE(par.size() == serial.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      REQUIRE(par[i].has_value() == serial[i].has_value());
      if (!serial[i]) continue;
      CHECK((par[i]->u - serial[i]->u).norm() == 0.0);
      CHECK(par[i]->c == serial[i]->c);
    }
  }
}

TEST_CASE("critical orbit search is independent of the job count") {
  const PendulumSetup s;
  SearchOptions a, b;
  b.jobs = 4;
  const auto x = constrained_critical_orbits(s.model, s.ta, s.cell, a);
  const auto y = constrained_critical_orbits(s.model, s.ta, s.cell, b);
  REQUIRE(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK((x[i].u - y[i].u).norm() == 0.0);
    CHECK(x[i].multiplicity == y[i].multiplicity);
  }
}

TEST_CASE("shooting Jacobian columns are identical with threads") {
  const auto model = harmonic_fixture({{1.0, 1.0}, 0.0, "rotation"});
  Vec m0(4);
  m0 << 0.3, 0.0, 0.0, 0.05;
  Mat basis(1, 1);
  basis << 1.0;
  ShootOptions one, four;
  four.jobs = 4;
  const double tau0 = 2.04 * std::numbers::pi;
  const auto a = shoot_rpo(model, m0, tau0, Vec::Zero(1), basis, one);
  const auto b = shoot_rpo(model, m0, tau0, Vec::Zero(1), basis, four);
  CHECK((a.m - b.m).norm() == 0.0);
  CHECK(a.tau == b.tau);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("pipeline report is independent of the job count") {
  AnalysisConfig c;
  c.momentum_grid = {{0.05}, {0.1}};
  auto a = cmd_analyze(c).report;
  c.jobs = 2;
  auto b = cmd_analyze(c).report;
  a.erase("timestamp");
  b.erase("timestamp");
  CHECK(dump_report(a) == dump_report(b));
}
