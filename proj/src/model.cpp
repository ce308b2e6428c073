#include "relmode/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace relmode {

EquivariantHamiltonianModel::EquivariantHamiltonianModel(ModelSpec spec, SymplecticSpace space,
                                                         LinearAction action, ScalarFn h, VectorFn grad,
                                                         MatrixFn hess, DomainFn domain)
    : equilibrium(Vec::Zero(space.dim())),
      spec_(std::move(spec)),
      space_(std::move(space)),
      action_(std::move(action)),
      momentum_(momentum_map(action_, space_)),
      h_(std::move(h)),
      grad_(std::move(grad)),
      hess_(std::move(hess)),
      domain_(std::move(domain)) {}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& v, double step) {
  const int n = static_cast<int>(v.size());
  Mat jac;
  for (int j = 0; j < n; ++j) {
    auto central = [&](double d) {
      Vec p = v, m = v;
      p(j) += d;
      m(j) -= d;
      return Vec((f(p) - f(m)) / (2.0 * d));
    };
    const Vec col = (4.0 * central(0.5 * step) - central(step)) / 3.0;
    if (j == 0) jac.resize(col.size(), n);
    jac.col(j) = col;
  }
  return jac;
}

Mat EquivariantHamiltonianModel::hess_h(const Vec& v) const {
  if (hess_) return hess_(v);
  const double step = 1e-3 * std::max(1.0, v.norm());
  return symmetric_part(fd_jacobian(grad_, v, step));
}

double EquivariantHamiltonianModel::invariance_defect(int samples, std::uint64_t seed, double radius) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> angle(-3.2, 3.2);
  const int d = action_.group().dim();
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vec v(dim());
    for (int i = 0; i < dim(); ++i) v(i) = normal(rng);
    v *= radius / v.norm();
    if (!in_domain(v)) continue;
    if (d == 0) continue;
    std::vector<double> theta(d);
    for (auto& t : theta) t = angle(rng);
    const Vec gv = action_.element(theta) * v;
    worst = std::max(worst, std::abs(h(gv) - h(v)));
  }
  return worst;
}

double EquivariantHamiltonianModel::gradient_defect(int samples, std::uint64_t seed, double radius) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vec v(dim());
    for (int i = 0; i < dim(); ++i) v(i) = normal(rng);
    v *= radius / v.norm();
    if (!in_domain(v)) continue;
    const Vec g = grad_h(v);
    Vec fd(dim());
    const double step = 1e-4 * std::max(radius, 1e-3);
    for (int i = 0; i < dim(); ++i) {
      auto central = [&](double e) {
        Vec p = v, m = v;
        p(i) += e;
        m(i) -= e;
        return (h(p) - h(m)) / (2.0 * e);
      };
      fd(i) = (4.0 * central(0.5 * step) - central(step)) / 3.0;
    }
    worst = std::max(worst, (g - fd).norm() / std::max(g.norm(), 1e-300));
  }
  return worst;
}

}  // namespace relmode
