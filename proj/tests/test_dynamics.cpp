#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "relmode/dynamics.hpp"
#include "relmode/errors.hpp"
#include "relmode/models.hpp"
#include "test_util.hpp"

using namespace relmode;
using testutil::expect_code;

namespace {

constexpr double kPi = std::numbers::pi;

IntegratorConfig gl6(double step = 1e-2) {
  IntegratorConfig c;
  c.step = step;
  return c;
}

IntegratorConfig dopri() {
  IntegratorConfig c;
  c.scheme = Scheme::adaptive_explicit_order5;
  return c;
}

Mat generator(const EquivariantHamiltonianModel& model, const Vec& xi) {
  return model.action().algebra_element({xi.data(), static_cast<std::size_t>(xi.size())});
}

}  // namespace

TEST_CASE("vector field examples") {
  const auto osc = harmonic_fixture({{1.0}, 0.0, "trivial"});
  Vec v(2);
  v << 1.0, 0.0;
  const Vec x = vector_field(osc, v);
  CHECK(x(0) == doctest::Approx(0.0));
  CHECK(x(1) == doctest::Approx(-1.0));
  CHECK(vector_field(spherical_pendulum(), Vec::Zero(4)).norm() == 0.0);
}

TEST_CASE("oscillator returns after 2 pi") {
  const auto osc = harmonic_fixture({{1.0, 2.0}, 0.0, "trivial"});
  Vec v0(4);
  v0 << 0.3, -0.1, 0.2, 0.4;
  for (const auto& cfg : {gl6(), dopri()}) {
    const auto r = flow(osc, v0, 2 * kPi, cfg);
    CHECK((r.final_state() - v0).norm() <= 1e-9);
    CHECK(r.energy_drift() <= 1e-12);
  }
}

TEST_CASE("linear flow equals the matrix exponential") {
  const auto osc = harmonic_fixture({{1.0, 2.0}, 0.0, "trivial"});
  const Mat a = testutil::oscillator_matrix({1.0, 2.0});
  Vec v0(4);
  v0 << 0.5, 0.1, -0.2, 0.3;
  const auto r = flow(osc, v0, 1.7, gl6(), 5);
  REQUIRE(r.states.size() == 6);
  for (std::size_t i = 0; i < r.states.size(); ++i) {
    CHECK((r.states[i] - expm(r.times[i] * a) * v0).norm() <= 1e-10);
  }
}

TEST_CASE("pendulum conserves energy and momentum over ten periods") {
  const auto model = spherical_pendulum();
  Vec v0(4);
  v0 << 0.1, 0.0, 0.0, 0.08;
  const auto r = flow(model, v0, 20 * kPi, gl6(), 40);
  CHECK(r.momentum_drift() <= 1e-10);
  CHECK(r.energy_drift() <= 1e-10);
}

TEST_CASE("augmented flow identities") {
  SUBCASE("zero velocity gives the ordinary flow") {
    const auto model = spherical_pendulum();
    Vec v0(4);
    v0 << 0.1, 0.05, -0.02, 0.07;
    const auto a = augmented_flow(model, Mat::Zero(4, 4), v0, 3.0, gl6());
    const auto b = flow(model, v0, 3.0, gl6());
    CHECK((a.final_state() - b.final_state()).norm() <= 1e-14);
  }
  SUBCASE("h = J^xi is stationary in the comoving frame") {
    const auto model = harmonic_fixture({{1.0, 2.0, 3.0}, 0.0, "torus"});
    Vec w(3);
    w << 1.0, 2.0, 3.0;
    Vec v0(6);
    v0 << 0.2, -0.1, 0.3, 0.1, 0.4, -0.2;
    const auto r = augmented_flow(model, generator(model, w), v0, 5.0, gl6(), 10);
    for (const auto& s : r.states) CHECK((s - v0).norm() <= 1e-12);
  }
  SUBCASE("pendulum G_t = exp(-t xi) F_t") {
    const auto model = spherical_pendulum();
    Vec v0(4);
    v0 << 0.1, 0.0, 0.0, 0.06;
    Vec c(1);
    c << 0.37;
    const Mat xi = generator(model, c);
    const double T = 3 * 2 * kPi;
    const auto g = augmented_flow(model, xi, v0, T, gl6());
    const auto f = flow(model, v0, T, gl6());
    CHECK((g.final_state() - expm(-T * xi) * f.final_state()).norm() <= 1e-7);
  }
}

TEST_CASE("flows are reversible") {
  const auto model = spring_pendulum_3d();
  std::mt19937_64 rng(9);
  const Vec v0 = testutil::random_vec(6, rng, 0.05);
  const Vec forward = flow(model, v0, 4.0, gl6()).final_state();
  const Vec back = flow(model, forward, -4.0, gl6()).final_state();
  CHECK((back - v0).norm() <= 1e-11);
}

TEST_CASE("integrator limits and validation") {
  const auto osc = harmonic_fixture({{1.0}, 0.0, "trivial"});
  Vec v0(2);
  v0 << 1.0, 0.0;
  IntegratorConfig few = gl6();
  few.max_steps = 10;
  expect_code([&] { flow(osc, v0, 10.0, few); }, ErrorCode::StepLimitExceeded);
  IntegratorConfig bad = gl6(-1.0);
  expect_code([&] { bad.validate(); }, ErrorCode::InvalidParameter);
  IntegratorConfig bad_tol = dopri();
  bad_tol.rtol = 0.0;
  expect_code([&] { bad_tol.validate(); }, ErrorCode::InvalidParameter);
}

TEST_CASE("symplectic normal space") {
  SUBCASE("pendulum equilibrium: V is everything") {
    const auto model = spherical_pendulum();
    Vec xi(1);
    xi << 0.0;
    const auto d = symplectic_normal_space(model, Vec::Zero(4), xi);
    CHECK(d.basis.cols() == 4);
    CHECK(d.m_alg.cols() == 0);
  }
  SUBCASE("so3 circular relative equilibrium") {
    const auto model = so3_isotropic();
    Vec m(6);
    m << 1, 0, 0, 0, 1, 0;
    const Vec xi = testutil::velocity_of(model, m);
    const auto d = symplectic_normal_space(model, m, xi);
    CHECK(d.basis.cols() == 2);
    CHECK(d.g_m.cols() == 0);
    CHECK(d.m_alg.cols() == 1);
    CHECK(inverse_condition(d.omega_v) > 1e-10);
    // V lies in ker dJ(m)
    CHECK((model.momentum().jacobian(m) * d.basis).norm() <= 1e-10);
  }
  SUBCASE("rotation fixture circular state") {
    const auto model = harmonic_fixture({{1.0, 1.0}, 0.1, "rotation"});
    Vec m(4);
    m << 1, 0, 0, 1;
    const Vec xi = testutil::velocity_of(model, m);
    const auto d = symplectic_normal_space(model, m, xi);
    CHECK(d.basis.cols() == 2);
    CHECK((d.basis.transpose() * d.basis - Mat::Identity(2, 2)).norm() <= 1e-12);
  }
  SUBCASE("a generic point is not a relative equilibrium") {
    const auto model = so3_isotropic();
    Vec m(6);
    m << 1, 0, 0, 0.5, 1, 0;
    Vec xi(3);
    xi << 0, 0, 1;
    expect_code([&] { symplectic_normal_space(model, m, xi); }, ErrorCode::NotRelativeEquilibrium);
  }
}

TEST_CASE("bundle reconstruction on the torus fixture") {
  const auto model = harmonic_fixture({{1.0, 2.0, 3.0}, 0.1, "torus"});
  Vec m(6);
  m << 1.0, 0.5, 0, 0, 0, 0;
  const Vec xi = testutil::velocity_of(model, m);
  const auto d = symplectic_normal_space(model, m, xi);
  CHECK(d.basis.cols() == 2);
  REQUIRE(d.m_alg.cols() == 2);
  const Vec theta0 = Vec::Zero(3);
  const Vec rho0 = Vec::Zero(2);
  SUBCASE("relative equilibrium drifts along its group orbit") {
    const auto b = bundle_flow_abelian(model, d, theta0, rho0, Vec::Zero(2), 2.0, gl6(), 8);
    const auto f = flow(model, m, 2.0, gl6(), 8);
    for (std::size_t i = 0; i < f.states.size(); ++i) CHECK((b.states[i] - f.states[i]).norm() <= 1e-8);
    CHECK(b.momentum_drift <= 1e-12);
  }
  SUBCASE("rho stays fixed and momentum is conserved") {
    std::mt19937_64 rng(12);
    const Vec rho = testutil::random_vec(2, rng, 0.01);
    const Vec v0 = testutil::random_vec(2, rng, 0.05);
    const auto b = bundle_flow_abelian(model, d, theta0, rho, v0, 3.0, gl6(), 12);
    for (const auto& r : b.rho) CHECK((r - rho).norm() == 0.0);
    CHECK(b.momentum_drift <= 1e-10);
  }
  SUBCASE("wrong shapes") {
    expect_code([&] { bundle_flow_abelian(model, d, Vec::Zero(2), rho0, Vec::Zero(2), 1.0, gl6()); },
                ErrorCode::InvalidParameter);
  }
}

TEST_CASE("bundle reconstruction rejects non-Abelian cases with g_m != g_mu") {
  const auto model = so3_isotropic();
  Vec m(6);
  m << 1, 0, 0, 0, 1, 0;
  const auto d = symplectic_normal_space(model, m, testutil::velocity_of(model, m));
  expect_code([&] { bundle_flow_abelian(model, d, Vec::Zero(3), Vec::Zero(1), Vec::Zero(2), 1.0, gl6()); },
              ErrorCode::UnsupportedCase);
}
