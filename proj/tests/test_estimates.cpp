#include <doctest.h>

#include "relmode/errors.hpp"
#include "relmode/estimates.hpp"
#include "relmode/models.hpp"

using namespace relmode;

TEST_CASE("equilibrium estimate examples") {
  CHECK(ls_estimate_equilibrium(4, 1, 1).dimensional_bound == 1);
  CHECK(ls_estimate_equilibrium(6, 1, 1).dimensional_bound == 2);
  CHECK(ls_estimate_equilibrium(6, 3, 1).dimensional_bound == 1);
  for (int n = 1; n <= 6; ++n) CHECK(ls_estimate_equilibrium(2 * n, 0, 0).dimensional_bound == n);
}

TEST_CASE("equilibrium estimate reduced space and Euler branch") {
  const auto e = ls_estimate_equilibrium(4, 1, 1);
  CHECK(e.theorem == TheoremTag::Equilibrium);
  CHECK(e.reduced_space_dim == 0);
  REQUIRE(e.euler_bound.has_value());
  CHECK(*e.euler_bound == 1);
  CHECK(e.branch == "dimensional=euler");
  const auto f = ls_estimate_equilibrium(6, 1, 1);
  CHECK(f.reduced_space_dim == 2);
  CHECK_FALSE(f.euler_bound.has_value());
  CHECK(f.branch == "dimensional");
}

TEST_CASE("estimate errors") {
  try {
    ls_estimate_equilibrium(4, 1, 0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonIntegerBound);
  }
  CHECK_THROWS_AS(ls_estimate_equilibrium(3, 0, 0), Error);
  CHECK_THROWS_AS(ls_estimate_equilibrium(4, 1, 2), Error);
  CHECK_THROWS_AS(ls_estimate_spatiotemporal(4, 0, 0, 1), Error);
  CHECK_THROWS_AS(ls_estimate_relative_equilibrium(4, 0, 1), Error);
}

TEST_CASE("negative bounds clamp with a warning") {
  const auto e = ls_estimate_equilibrium(2, 3, 3);
  CHECK(e.dimensional_bound == 0);
  CHECK_FALSE(e.warnings.empty());
}

TEST_CASE("spatiotemporal estimate examples") {
  CHECK(ls_estimate_spatiotemporal(4, 1, 1, 0).dimensional_bound == 1);
  CHECK(ls_estimate_spatiotemporal(6, 1, 1, 0).dimensional_bound == 2);
  CHECK(ls_estimate_spatiotemporal(6, 3, 3, 1).dimensional_bound == 1);
  CHECK(ls_estimate_spatiotemporal(6, 3, 3, 1).theorem == TheoremTag::Spatiotemporal);
}

TEST_CASE("relative equilibrium estimate examples") {
  for (int n = 1; n <= 5; ++n) CHECK(ls_estimate_relative_equilibrium(2 * n, 0, 0).dimensional_bound == n);
  CHECK(ls_estimate_relative_equilibrium(4, 1, 0).dimensional_bound == 1);
  CHECK(ls_estimate_relative_equilibrium(6, 1, 1).dimensional_bound == 3);
  CHECK(ls_estimate_relative_equilibrium(4, 1, 0).dimensional_bound ==
        ls_estimate_spatiotemporal(4, 1, 1, 0).dimensional_bound);
}

TEST_CASE("monotone in the coadjoint isotropy dimension") {
  for (int u = 0; u <= 12; u += 2)
    for (int l = 0; l <= 4; ++l)
      for (int a = 0; a + 2 <= l; ++a) {
        if ((u - l - a) % 2 != 0) continue;
        CHECK(ls_estimate_equilibrium(u, l, a + 2).dimensional_bound <=
              ls_estimate_equilibrium(u, l, a).dimensional_bound);
      }
}

TEST_CASE("spatiotemporal with trivial K agrees with the equilibrium estimate") {
  for (int u = 0; u <= 12; u += 2)
    for (int n = 0; n <= 3; ++n)
      for (int a = 0; a <= n; ++a) {
        if ((u - n - a) % 2 != 0) continue;
        const auto s = ls_estimate_spatiotemporal(u, n, a, 0);
        const auto e = ls_estimate_equilibrium(u, n, a);
        CHECK(s.dimensional_bound == e.dimensional_bound);
        CHECK(s.reduced_space_dim == e.reduced_space_dim);
      }
}

TEST_CASE("integral bounds on every supported isotropy table entry") {
  for (const auto& model : {spherical_pendulum(), spring_pendulum_3d(), so3_isotropic()}) {
    const Mat a = model.space().hamiltonian_matrix(model.hess_h(Vec::Zero(model.dim())));
    const auto u = resonance_space(jordan_chevalley(a, model.space()), 1.0);
    for (const auto& d : isotropy_table(model.action(), u)) {
      std::vector<std::vector<double>> lambdas;
      if (d.dim_l == 0) lambdas.push_back({});
      if (d.dim_l == 1) lambdas = {{0.0}, {0.1}};
      if (d.dim_l == 3) lambdas = {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.1}, {0.1, 0.2, 0.3}};
      for (const auto& lam : lambdas) {
        CHECK_NOTHROW(ls_estimate_equilibrium(d.fixed_space.dim(), d.dim_l, d.dim_l_lambda(lam)));
      }
    }
  }
}
