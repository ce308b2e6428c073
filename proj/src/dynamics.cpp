#include "relmode/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "relmode/errors.hpp"

namespace relmode {

double FlowResult::energy_drift() const {
  double worst = 0.0;
  for (double e : energy) worst = std::max(worst, std::abs(e - energy.front()));
  return worst;
}

double FlowResult::momentum_drift() const {
  double worst = 0.0;
  for (const auto& j : momentum) worst = std::max(worst, (j - momentum.front()).norm());
  return worst;
}

Vec vector_field(const EquivariantHamiltonianModel& model, const Vec& v) { return model.vector_field(v); }

namespace {

FlowResult run_flow(const EquivariantHamiltonianModel& model, const Field& field, const Vec& v0, double T,
                    const IntegratorConfig& cfg, int intervals) {
  FlowResult r;
  r.states = integrate_sampled(field, v0, T, intervals, cfg, &r.stats,
                               [&model](const Vec& v) { return model.in_domain(v); });
  const int n = static_cast<int>(r.states.size()) - 1;
  for (int i = 0; i <= n; ++i) {
    r.times.push_back(T * i / std::max(n, 1));
    r.energy.push_back(model.h(r.states[i]));
    r.momentum.push_back(model.J(r.states[i]));
  }
  return r;
}

}  // namespace

FlowResult flow(const EquivariantHamiltonianModel& model, const Vec& v0, double T, const IntegratorConfig& cfg,
                int intervals) {
  const Field f = [&model](const Vec& v) { return model.vector_field(v); };
  return run_flow(model, f, v0, T, cfg, intervals);
}

FlowResult augmented_flow(const EquivariantHamiltonianModel& model, const Mat& xi, const Vec& v0, double T,
                          const IntegratorConfig& cfg, int intervals) {
  const Field f = [&model, &xi](const Vec& v) { return Vec(model.vector_field(v) - xi * v); };
  return run_flow(model, f, v0, T, cfg, intervals);
}

SymplecticNormalSpaceData symplectic_normal_space(const EquivariantHamiltonianModel& model, const Vec& m,
                                                  const Vec& xi) {
  const LinearAction& action = model.action();
  const int d = action.group().dim();
  const int n = model.dim();
  SymplecticNormalSpaceData out;
  out.m = m;
  out.xi = xi;
  out.mu = model.J(m);

  const Vec x = model.vector_field(m);
  const Vec drift = d > 0 ? Vec(action.algebra_element({xi.data(), static_cast<std::size_t>(xi.size())}) * m)
                          : Vec::Zero(n);
  const double scale = std::max({m.norm(), x.norm(), 1e-300});
  if ((x - drift).norm() > 1e-8 * scale) {
    throw Error(ErrorCode::NotRelativeEquilibrium, "X_h(m) != xi m");
  }

  const Mat tangent = action.orbit_tangent(m);
  out.g_m = d > 0 ? null_space(tangent, 1e-9) : Mat(0, 0);
  Mat gmu(d, 0);
  {
    const auto iso = action.group().coadjoint_isotropy({out.mu.data(), static_cast<std::size_t>(out.mu.size())});
    gmu.resize(d, static_cast<int>(iso.size()));
    for (std::size_t i = 0; i < iso.size(); ++i) gmu.col(static_cast<int>(i)) = iso[i];
    gmu = orthonormal_basis(gmu);
  }
  out.P_gm = out.g_m * out.g_m.transpose();
  const Mat id = Mat::Identity(d, d);
  out.m_alg = gmu.cols() > 0 ? orthonormal_basis((id - out.P_gm) * gmu, 1e-9) : Mat(d, 0);
  out.P_m = out.m_alg * out.m_alg.transpose();
  out.q_alg = orthonormal_basis(id - out.P_gm - out.P_m, 1e-9);
  if (out.q_alg.cols() == 0) out.q_alg.resize(d, 0);
  out.P_q = out.q_alg * out.q_alg.transpose();

  // G_m-invariant inner product by averaging over sampled elements.
  out.inner_product = Mat::Identity(n, n);
  if (out.g_m.cols() > 0) {
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    Mat acc = Mat::Zero(n, n);
    const int samples = 32;
    for (int s = 0; s < samples; ++s) {
      Vec coeffs = Vec::Zero(d);
      if (out.g_m.cols() == 1) {
        coeffs = out.g_m.col(0) * (2.0 * std::numbers::pi * s / samples);
      } else {
        for (int k = 0; k < out.g_m.cols(); ++k) coeffs += out.g_m.col(k) * angle(rng);
      }
      const Mat g = action.element({coeffs.data(), static_cast<std::size_t>(d)});
      acc += g.transpose() * g;
    }
    out.inner_product = acc / samples;
    out.sampling_error = (out.inner_product - Mat::Identity(n, n)).norm();
  }

  Mat orbit(n, gmu.cols());
  for (int i = 0; i < gmu.cols(); ++i) {
    const Vec c = gmu.col(i);
    orbit.col(i) = action.algebra_element({c.data(), static_cast<std::size_t>(d)}) * m;
  }
  const Mat ker_dj = d > 0 ? null_space(model.momentum().jacobian(m), 1e-9) : Mat::Identity(n, n);
  Mat coeffs = null_space(orbit.transpose() * out.inner_product * ker_dj, 1e-9);
  out.basis = orthonormal_basis(ker_dj * coeffs);
  out.omega_v = out.basis.transpose() * model.space().omega() * out.basis;
  if (out.basis.cols() % 2 != 0 || (out.basis.cols() > 0 && inverse_condition(out.omega_v) < 1e-10)) {
    throw Error(ErrorCode::DegenerateSplit, "omega restricted to V_m is degenerate");
  }

  Mat o(n, out.m_alg.cols());
  for (int i = 0; i < out.m_alg.cols(); ++i) {
    const Vec c = out.m_alg.col(i);
    o.col(i) = action.algebra_element({c.data(), static_cast<std::size_t>(d)}) * m;
  }
  out.slice = o.cols() > 0 ? Mat(model.space().omega().inverse() * o * (o.transpose() * o).inverse())
                           : Mat(n, 0);
  return out;
}

BundleTrajectory bundle_flow_abelian(const EquivariantHamiltonianModel& model,
                                     const SymplecticNormalSpaceData& data, const Vec& theta0, const Vec& rho0,
                                     const Vec& v0, double T, const IntegratorConfig& cfg, int intervals) {
  const LinearAction& action = model.action();
  if (!action.group().abelian() && data.m_alg.cols() != 0) {
    throw Error(ErrorCode::UnsupportedCase, "non-Abelian reconstruction with g_m != g_mu");
  }
  const int d = action.group().dim();
  const int dm = static_cast<int>(data.m_alg.cols());
  const int dv = static_cast<int>(data.basis.cols());
  if (theta0.size() != d || rho0.size() != dm || v0.size() != dv) {
    throw Error(ErrorCode::InvalidParameter, "bundle state has the wrong shape");
  }
  const Mat& b = data.basis;
  const Mat& w = data.slice;
  const Mat sharp_v = dv > 0 ? Mat(data.omega_v.inverse().transpose()) : Mat(0, 0);
  const Vec base = data.m + (dm > 0 ? Vec(w * rho0) : Vec::Zero(model.dim()));

  const Field field = [&](const Vec& y) {
    const Vec x = base + b * y.tail(dv);
    const Vec grad = model.grad_h(x);
    Vec dy(d + dv);
    dy.head(d) = dm > 0 ? Vec(data.m_alg * (w.transpose() * grad)) : Vec::Zero(d);
    if (dv > 0) dy.tail(dv) = sharp_v * (b.transpose() * grad);
    return dy;
  };

  // J_{V_m}: momentum of the G_m action on (V_m, omega_v).
  std::vector<Mat> gm_v;
  for (int i = 0; i < data.g_m.cols(); ++i) {
    const Vec c = data.g_m.col(i);
    gm_v.push_back(b.transpose() * action.algebra_element({c.data(), static_cast<std::size_t>(d)}) * b);
  }

  Vec y0(d + dv);
  y0 << theta0, v0;
  const auto ys = integrate_sampled(field, y0, T, intervals, cfg);
  BundleTrajectory out;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const Vec theta = ys[i].head(d);
    const Vec v = ys[i].tail(dv);
    out.times.push_back(T * static_cast<double>(i) / static_cast<double>(ys.size() - 1));
    out.theta.push_back(theta);
    out.rho.push_back(rho0);
    out.v.push_back(v);
    const Vec x = base + b * v;
    out.states.push_back(d > 0 ? Vec(action.element({theta.data(), static_cast<std::size_t>(d)}) * x) : x);
    Vec j = data.mu;
    if (dm > 0) j += data.m_alg * rho0;
    for (std::size_t k = 0; k < gm_v.size(); ++k) {
      j += data.g_m.col(static_cast<int>(k)) * (0.5 * (gm_v[k] * v).dot(data.omega_v * v));
    }
    out.momentum.push_back(j);
    out.momentum_drift = std::max(out.momentum_drift, (j - out.momentum.front()).norm());
  }
  return out;
}

}  // namespace relmode
