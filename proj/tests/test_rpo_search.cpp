#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "relmode/errors.hpp"
#include "relmode/models.hpp"
#include "relmode/rpo_search.hpp"
#include "test_util.hpp"

using namespace relmode;
using testutil::expect_code;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Two unit oscillators plus a quartic term, no symmetry beyond the trivial group.
EquivariantHamiltonianModel two_oscillators(std::function<double(const Vec&)> quartic,
                                            std::function<Vec(const Vec&)> quartic_grad) {
  auto h = [quartic](const Vec& v) { return 0.5 * v.squaredNorm() + quartic(v); };
  auto g = [quartic_grad](const Vec& v) { return Vec(v + quartic_grad(v)); };
  return EquivariantHamiltonianModel({"two_oscillators", {}, {}}, SymplecticSpace::canonical(4),
                                     LinearAction(GroupDescriptor::trivial(), {}), h, g);
}

struct Linearization {
  ResonanceSpace u;
  Mat circle;
  std::vector<IsotropyDatum> table;
};

Linearization linearize(const EquivariantHamiltonianModel& model) {
  const Mat a = model.space().hamiltonian_matrix(model.hess_h(Vec::Zero(model.dim())));
  Linearization l{resonance_space(jordan_chevalley(a, model.space()), 1.0), Mat(), {}};
  l.circle = l.u.semisimple / l.u.nu0;
  l.table = isotropy_table(model.action(), l.u);
  return l;
}

/// The full chain for the spherical pendulum at J / Q = lambda and energy e.
struct PendulumChain {
  EquivariantHamiltonianModel model = spherical_pendulum();
  Linearization lin = linearize(model);
  TaylorAnalysis ta = taylor_analysis(model, lin.table[0].fixed_space, lin.circle);
  IsotropyCell cell;
  std::vector<CriticalOrbit> orbits;

  explicit PendulumChain(double lambda) {
    cell = make_cell(model.action(), "e", lin.table[0].l_coords, Vec::Constant(1, lambda));
    orbits = constrained_critical_orbits(model, ta, cell);
  }

  RpoCertificate certify(const CriticalOrbit& o, double energy) const {
    const RpoBranch br = branch_continuation(model, ta, cell, o);
    const auto pt = branch_point_at_energy(model, ta, cell, br, energy);
    REQUIRE(pt.has_value());
    Mat basis(1, 1);
    basis << 1.0;
    ShootOptions sh;
    sh.energy = energy;
    Vec target(1);
    target << energy * cell.lambda(0);
    sh.momentum = target;
    return shoot_rpo(model, pt->v, kTwoPi / pt->c, pt->multipliers, basis, sh);
  }
};

}  // namespace

TEST_CASE("radiality examples") {
  SUBCASE("|v|^2 + |v|^4 is radial") {
    const auto model = two_oscillators([](const Vec& v) { return v.squaredNorm() * v.squaredNorm(); },
                                       [](const Vec& v) { return Vec(4.0 * v.squaredNorm() * v); });
    const auto lin = linearize(model);
    const auto ta = taylor_analysis(model, Subspace::whole(4), lin.circle);
    CHECK(ta.radial());
    expect_code([&] { radiality_analysis(model, Subspace::whole(4), lin.circle); }, ErrorCode::RadialToMaxOrder);
  }
  SUBCASE("I1^2 - I2^2 is non-radial at order 4") {
    auto i = [](const Vec& v, int k) { return v(k) * v(k) + v(k + 2) * v(k + 2); };
    const auto model = two_oscillators([i](const Vec& v) { return i(v, 0) * i(v, 0) - i(v, 1) * i(v, 1); },
                                       [i](const Vec& v) {
                                         Vec g(4);
                                         g << 4 * i(v, 0) * v(0), -4 * i(v, 1) * v(1), 4 * i(v, 0) * v(2),
                                             -4 * i(v, 1) * v(3);
                                         return g;
                                       });
    const auto lin = linearize(model);
    const auto ta = radiality_analysis(model, Subspace::whole(4), lin.circle);
    CHECK(ta.k == 4);
    REQUIRE(ta.radial_coefficients.size() >= 3);
    // Q-sphere average of the quadratic part is Q = 1
    CHECK(ta.radial_coefficients[2] == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("pendulum: first non-radial order is even") {
    const auto model = spherical_pendulum();
    const auto lin = linearize(model);
    const auto ta = radiality_analysis(model, lin.table[0].fixed_space, lin.circle);
    CHECK(ta.k > 2);
    CHECK(ta.k % 2 == 0);
    CHECK(ta.hk.degree() == ta.k);
  }
  SUBCASE("indefinite quadratic part") {
    auto h = [](const Vec& v) { return 0.5 * (v(0) * v(0) + v(2) * v(2)) - 0.5 * (v(1) * v(1) + v(3) * v(3)); };
    auto g = [](const Vec& v) {
      Vec r(4);
      r << v(0), -v(1), v(2), -v(3);
      return r;
    };
    const EquivariantHamiltonianModel model({"indefinite", {}, {}}, SymplecticSpace::canonical(4),
                                            LinearAction(GroupDescriptor::trivial(), {}), h, g);
    const Mat a = model.space().hamiltonian_matrix(model.hess_h(Vec::Zero(4)));
    const auto u = resonance_space(jordan_chevalley(a, model.space()), 1.0);
    expect_code([&] { taylor_analysis(model, Subspace::whole(4), u.semisimple); },
                ErrorCode::IndefiniteQuadraticForm);
  }
}

TEST_CASE("pendulum critical orbits satisfy the KKT system and are Morse") {
  for (double lambda : {0.05, 0.1, -0.1}) {
    const PendulumChain ch(lambda);
    REQUIRE_FALSE(ch.orbits.empty());
    const auto p = objective_problem(ch.model, ch.ta, ch.cell);
    for (const auto& o : ch.orbits) {
      CHECK(o.constraint_residual <= 1e-10);
      CHECK(o.projected_gradient <= 1e-8);
      CHECK(std::abs(p.J(o.u)(0) - lambda) <= 1e-10);
      CHECK(p.Q(o.u) == doctest::Approx(1.0).epsilon(1e-10));
      const auto m = morse_nondegeneracy_check(p, o);
      CHECK(m.g_morse == o.g_morse);
      CHECK(o.g_morse);
    }
  }
}

TEST_CASE("deduplication merges orbit images") {
  const PendulumChain ch(0.1);
  REQUIRE_FALSE(ch.orbits.empty());
  const auto p = objective_problem(ch.model, ch.ta, ch.cell);
  std::vector<CriticalOrbit> copies;
  for (double t : {0.0, 0.4, 1.9, 3.3}) {
    CriticalOrbit o = ch.orbits[0];
    o.u = expm(t * p.symmetry[0]) * o.u;
    copies.push_back(o);
  }
  const auto merged = deduplicate_orbits(p, copies, 1e-6);
  CHECK(merged.size() == 1);
}

TEST_CASE("branch continuation laws") {
  const PendulumChain ch(0.1);
  REQUIRE_FALSE(ch.orbits.empty());
  const RpoBranch br = branch_continuation(ch.model, ch.ta, ch.cell, ch.orbits[0]);
  CHECK(br.status == "ok");
  REQUIRE(br.samples.size() >= 4);
  for (const auto& s : br.samples) {
    CHECK(s.q_residual <= 1e-10 * std::max(1.0, s.r * s.r));
    CHECK(s.j_residual <= 1e-10 * std::max(1.0, s.r * s.r));
  }
  // c(r) - 1 = O(r^(k-2)): the fit explains the samples
  const double k2 = ch.ta.k - 2;
  for (const auto& s : br.samples) {
    const double x = std::pow(s.r, k2);
    CHECK(std::abs(s.c - 1.0) <= 2.0 * std::abs(br.c_fit) * x + 1e-6);
  }
  // relative misfit is bounded by the neglected x^3 term, x <= r_max^(k-2)
  CHECK(br.c_fit_residual <= std::pow(0.2, k2));
  CHECK_FALSE(br.fold);
}

TEST_CASE("non-Morse seeds are rejected by continuation") {
  const PendulumChain ch(0.1);
  REQUIRE_FALSE(ch.orbits.empty());
  CriticalOrbit bad = ch.orbits[0];
  bad.g_morse = false;
  bad.degenerate = true;
  expect_code([&] { branch_continuation(ch.model, ch.ta, ch.cell, bad); }, ErrorCode::NotMorse);
}

TEST_CASE("shooting") {
  SUBCASE("harmonic circle: every orbit closes after 2 pi") {
    const auto model = harmonic_fixture({{1.0, 1.0}, 0.0, "rotation"});
    Vec m0(4);
    m0 << 0.3, 0.0, 0.0, 0.0;
    Mat basis(1, 1);
    basis << 1.0;
    const auto c = shoot_rpo(model, m0, kTwoPi * 1.01, Vec::Zero(1), basis);
    CHECK(c.residual <= 1e-10);
    CHECK(c.tau == doctest::Approx(kTwoPi).epsilon(1e-8));
    CHECK(c.witness > 1e-3);
  }
  SUBCASE("relative equilibria are reported as such") {
    const auto model = so3_isotropic();
    Vec m(6);
    m << 0.1, 0, 0, 0, 0.1, 0;
    const Vec xi = testutil::velocity_of(model, m);
    const auto mu = model.J(m);
    const auto iso = model.action().group().coadjoint_isotropy({mu.data(), 3});
    Mat basis(3, static_cast<Eigen::Index>(iso.size()));
    for (std::size_t i = 0; i < iso.size(); ++i) basis.col(static_cast<Eigen::Index>(i)) = iso[i];
    expect_code([&] { shoot_rpo(model, m, 1.5, basis.transpose() * xi, basis); },
                ErrorCode::ConvergedToRelativeEquilibrium);
  }
  SUBCASE("pendulum branch endpoint certifies and re-integrates") {
    const PendulumChain ch(0.1);
    REQUIRE_FALSE(ch.orbits.empty());
    const auto c = ch.certify(ch.orbits[0], 1e-3);
    CHECK(c.residual <= 1e-8 * c.scale);
    CHECK(c.residual_check <= 1e-7);
    CHECK(c.energy == doctest::Approx(1e-3).epsilon(1e-8));
    CHECK(c.momentum(0) == doctest::Approx(1e-4).epsilon(1e-8));
    CHECK(std::abs(c.tau / kTwoPi - 1.0) <= 0.25);
    // independent re-integration with a finer symplectic step
    IntegratorConfig fine;
    fine.step = c.tau / 4000.0;
    const Vec end = flow(ch.model, c.m, c.tau, fine).final_state();
    const Mat back = expm(-c.tau * ch.model.action().algebra_element({c.xi.data(), 1}));
    CHECK((back * end - c.m).norm() <= 1e-7);
  }
}

TEST_CASE("distinct orbits") {
  const PendulumChain ch(0.1);
  REQUIRE_FALSE(ch.orbits.empty());
  const auto c = ch.certify(ch.orbits[0], 1e-3);
  SUBCASE("a duplicate is one orbit") {
    const auto d = distinct_orbits(ch.model, {c, c});
    REQUIRE(d.size() == 1);
    CHECK(d[0].multiplicity == 2);
  }
  SUBCASE("a group image is one orbit") {
    RpoCertificate moved = c;
    const double t = 1.1;
    moved.m = ch.model.action().element({&t, 1}) * c.m;
    CHECK(certificate_distance(ch.model, c, moved) <= 1e-6);
    CHECK(distinct_orbits(ch.model, {c, moved}).size() == 1);
  }
  SUBCASE("a time shift is one orbit") {
    RpoCertificate shifted = c;
    shifted.m = flow(ch.model, c.m, 0.3 * c.tau, IntegratorConfig{}).final_state();
    CHECK(distinct_orbits(ch.model, {c, shifted}).size() == 1);
  }
  SUBCASE("different momenta are different orbits") {
    RpoCertificate other = c;
    other.m = -c.m;
    other.m(0) = c.m(0);
    other.m(2) = c.m(2);
    other.momentum = ch.model.J(other.m);
    if ((other.momentum - c.momentum).norm() > 1e-6) {
      CHECK(distinct_orbits(ch.model, {c, other}).size() == 2);
    }
  }
}
