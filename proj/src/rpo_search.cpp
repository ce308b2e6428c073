#include "relmode/rpo_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Geometry>
#include <omp.h>

#include "relmode/errors.hpp"

namespace relmode {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Mat generator_of(const LinearAction& action, const Vec& coeffs) {
  return action.algebra_element({coeffs.data(), static_cast<std::size_t>(coeffs.size())});
}

// Chebyshev-node least-squares fit of a scalar function of t on [-t0, t0].
std::vector<double> ray_fit(const std::function<double(double)>& g, int order, double t0) {
  const int degree = order + 4;
  const int nodes = 2 * degree + 2;
  Mat v(nodes, degree + 1);
  Vec y(nodes);
  for (int i = 0; i < nodes; ++i) {
    const double s = std::cos(std::numbers::pi * (i + 0.5) / nodes);
    double p = 1.0;
    for (int j = 0; j <= degree; ++j) {
      v(i, j) = p;
      p *= s;
    }
    y(i) = g(t0 * s);
  }
  const Vec c = v.colPivHouseholderQr().solve(y);
  std::vector<double> out(order + 1);
  double scale = 1.0;
  for (int j = 0; j <= order; ++j) {
    out[j] = c(j) / scale;
    scale *= t0;
  }
  return out;
}

Vec unit_q(const Mat& q, Vec u) {
  const double val = 0.5 * u.dot(q * u);
  return u / std::sqrt(val);
}

}  // namespace

std::vector<double> averaged_ray_coefficients(const EquivariantHamiltonianModel& model, const TaylorAnalysis& a,
                                              const Vec& u, int order, double t0) {
  const Vec x = a.subspace.embed(u);
  std::vector<Vec> orbit;
  orbit.reserve(a.averaging.size());
  for (const auto& e : a.averaging) orbit.push_back(e * x);
  double radius = t0;
  for (int shrink = 0; shrink < 8; ++shrink) {
    bool inside = true;
    for (const auto& w : orbit) inside = inside && model.in_domain(radius * w) && model.in_domain(-radius * w);
    if (inside) break;
    radius *= 0.5;
  }
  const auto g = [&](double t) {
    double s = 0.0;
    for (const auto& w : orbit) s += model.h(t * w);
    return s / static_cast<double>(orbit.size());
  };
  return ray_fit(g, order, radius);
}

TaylorAnalysis taylor_analysis(const EquivariantHamiltonianModel& model, const Subspace& s,
                               const Mat& circle_generator, const RadialityOptions& opts) {
  if (opts.k_max < 4) throw Error(ErrorCode::InvalidParameter, "k_max must be at least 4");
  TaylorAnalysis a;
  a.subspace = s;
  a.circle_generator = circle_generator;
  a.max_order = opts.k_max;
  const Mat& b = s.basis;
  const int dim = s.dim();
  a.q = symmetric_part(b.transpose() * model.hess_h(Vec::Zero(model.dim())) * b);
  {
    Eigen::SelfAdjointEigenSolver<Mat> es(a.q);
    if (dim == 0 || es.eigenvalues().minCoeff() <= 1e-10 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff())) {
      throw Error(ErrorCode::IndefiniteQuadraticForm, "Q = 1/2 d^2h(0) is not positive definite on the subspace");
    }
  }
  for (int l = 0; l < opts.averaging_nodes; ++l) {
    a.averaging.push_back(expm((2.0 * std::numbers::pi * l / opts.averaging_nodes) * circle_generator));
  }

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  auto draw = [&]() {
    Vec u(dim);
    for (int i = 0; i < dim; ++i) u(i) = normal(rng);
    return unit_q(a.q, u);
  };
  const int design = std::max(4 * dim, 64);
  std::vector<Vec> points;
  std::vector<std::vector<double>> coeffs;
  for (int i = 0; i < design; ++i) {
    points.push_back(draw());
    coeffs.push_back(averaged_ray_coefficients(model, a, points.back(), opts.k_max, opts.ray_radius));
  }
  a.residuals.assign(opts.k_max + 1, 0.0);
  std::vector<double> means(opts.k_max + 1, 0.0);
  for (int j = 0; j <= opts.k_max; ++j) {
    std::vector<double> col;
    for (const auto& c : coeffs) col.push_back(c[j]);
    a.residuals[j] = stdev(col);
    for (double x : col) means[j] += x / design;
  }
  for (int j = 3; j <= opts.k_max; ++j) {
    if (a.residuals[j] > opts.tol_rad) {
      a.k = j;
      break;
    }
  }
  const int upto = a.k < 0 ? opts.k_max + 1 : a.k;
  a.radial_coefficients.assign(means.begin(), means.begin() + upto);
  if (a.k < 0) return a;
  if (a.k % 2 != 0) a.warnings.push_back("first non-radial order " + std::to_string(a.k) + " is odd");

  const int needed = 2 * monomial_count(dim, a.k);
  std::vector<double> values;
  for (const auto& c : coeffs) values.push_back(c[a.k]);
  while (static_cast<int>(points.size()) < needed) {
    points.push_back(draw());
    values.push_back(averaged_ray_coefficients(model, a, points.back(), opts.k_max, opts.ray_radius)[a.k]);
  }
  a.hk = HomogeneousPolynomial::fit(dim, a.k, points, values);
  if (a.hk.fit_residual() > 1e-6) {
    a.warnings.push_back("h_k polynomial fit residual " + std::to_string(a.hk.fit_residual()));
  }
  return a;
}

TaylorAnalysis radiality_analysis(const EquivariantHamiltonianModel& model, const Subspace& s,
                                  const Mat& circle_generator, const RadialityOptions& opts) {
  TaylorAnalysis a = taylor_analysis(model, s, circle_generator, opts);
  if (a.radial()) {
    throw Error(ErrorCode::RadialToMaxOrder,
                "averaged Hamiltonian is radial through order " + std::to_string(opts.k_max));
  }
  return a;
}

IsotropyCell make_cell(const LinearAction& action, const std::string& isotropy, const std::vector<int>& l_coords,
                       const Vec& lambda) {
  if (static_cast<int>(lambda.size()) != static_cast<int>(l_coords.size())) {
    throw Error(ErrorCode::InvalidParameter, "momentum value has " + std::to_string(lambda.size()) +
                                                 " components, isotropy cell expects " +
                                                 std::to_string(l_coords.size()));
  }
  IsotropyCell cell;
  cell.isotropy = isotropy;
  cell.l_coords = l_coords;
  cell.lambda = lambda;
  const int d = action.group().dim();
  if (action.group().kind() == GroupKind::so3 && static_cast<int>(l_coords.size()) == d) {
    std::vector<double> mu(d);
    for (int i = 0; i < d; ++i) mu[i] = lambda(i);
    cell.l_lambda = action.group().coadjoint_isotropy(mu);
  } else {
    for (int i : l_coords) {
      Vec e = Vec::Zero(d);
      e(i) = 1.0;
      cell.l_lambda.push_back(e);
    }
  }
  return cell;
}

namespace {

void add_constraints(const EquivariantHamiltonianModel& model, const TaylorAnalysis& a, const IsotropyCell& cell,
                     ConstrainedProblem& p) {
  const Mat& b = a.subspace.basis;
  p.dim = a.subspace.dim();
  p.q = a.q;
  p.q_level = 1.0;
  for (int i : cell.l_coords) p.j.push_back(b.transpose() * model.momentum().coefficients[i] * b);
  p.lambda = cell.lambda;
  p.symmetry.push_back(restrict(a.circle_generator, a.subspace, 1e-8));
  for (const auto& c : cell.l_lambda) p.symmetry.push_back(restrict(generator_of(model.action(), c), a.subspace, 1e-8));
}

}  // namespace

ConstrainedProblem objective_problem(const EquivariantHamiltonianModel& model, const TaylorAnalysis& a,
                                     const IsotropyCell& cell) {
  if (a.radial()) throw Error(ErrorCode::RadialToMaxOrder, "no non-radial order to search on");
  ConstrainedProblem p;
  add_constraints(model, a, cell, p);
  const HomogeneousPolynomial hk = a.hk;
  p.f = [hk](const Vec& u) { return hk(u); };
  p.grad_f = [hk](const Vec& u) { return hk.gradient(u); };
  p.hess_f = [hk](const Vec& u) { return hk.hessian(u); };
  return p;
}

MorseReport morse_nondegeneracy_check(const ConstrainedProblem& p, const CriticalOrbit& orbit) {
  KktPoint k;
  k.u = orbit.u;
  k.c = orbit.c;
  k.multipliers = orbit.multipliers;
  const ReducedHessian rh = reduced_hessian(p, k);
  MorseReport r;
  r.eigenvalues = rh.eigenvalues;
  r.reduced_dim = static_cast<int>(rh.eigenvalues.size());
  r.min_abs = rh.min_abs;
  r.g_morse = rh.min_abs > 1e-6 * rh.scale;
  return r;
}

std::vector<CriticalOrbit> deduplicate_orbits(const ConstrainedProblem& p, std::vector<CriticalOrbit> orbits,
                                              double tol) {
  std::stable_sort(orbits.begin(), orbits.end(),
                   [](const CriticalOrbit& x, const CriticalOrbit& y) { return x.value < y.value; });
  std::vector<CriticalOrbit> reps;
  for (auto& o : orbits) {
    bool merged = false;
    for (auto& r : reps) {
      const double scale = std::max({1.0, std::abs(r.value), std::abs(o.value)});
      if (std::abs(r.value - o.value) > 1e-6 * scale) continue;
      const bool same_component = r.degenerate && o.degenerate;
      if (same_component || orbit_distance(p.symmetry, o.u, r.u) <= tol * std::max(1.0, r.u.norm())) {
        r.multiplicity += o.multiplicity;
        merged = true;
        break;
      }
    }
    if (!merged) reps.push_back(o);
  }
  return reps;
}

std::vector<CriticalOrbit> constrained_critical_orbits(const EquivariantHamiltonianModel& model,
                                                       const TaylorAnalysis& a, const IsotropyCell& cell,
                                                       const SearchOptions& opts) {
  const ConstrainedProblem p = objective_problem(model, a, cell);
  const int reduced = std::max(0, p.dim - static_cast<int>(cell.l_coords.size()) -
                                      static_cast<int>(cell.l_lambda.size()) - 2);
  const int n_starts = opts.n_starts > 0 ? opts.n_starts : 64 * (reduced + 1);
  const auto starts = halton_starts(p.dim, n_starts, opts.seed);
  const auto results = opts.jobs == 1 ? multistart_serial(p, starts, opts.kkt)
                                      : multistart_parallel(p, starts, opts.kkt, opts.jobs);
  int feasible = 0;
  std::vector<CriticalOrbit> found;
  for (const auto& r : results) {
    if (!r) continue;
    ++feasible;
    if (!r->converged) continue;
    Eigen::JacobiSVD<Mat> svd(p.constraint_jacobian(r->u));
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-8 * sv(0)) {
      throw Error(ErrorCode::RankDeficientConstraints, "constraint Jacobian loses rank at a critical point");
    }
    CriticalOrbit o;
    o.u = r->u;
    o.point = a.subspace.embed(r->u);
    o.isotropy = cell.isotropy;
    o.value = p.f(r->u);
    o.c = r->c;
    o.multipliers = r->multipliers;
    o.constraint_residual = r->constraint_residual;
    o.projected_gradient = r->projected_gradient;
    const MorseReport m = morse_nondegeneracy_check(p, o);
    o.hessian_spectrum = m.eigenvalues;
    o.min_abs_eigenvalue = m.min_abs;
    o.g_morse = m.g_morse;
    o.degenerate = !m.g_morse;
    found.push_back(std::move(o));
  }
  if (feasible == 0) throw Error(ErrorCode::EmptyLevelSet, "J^-1(lambda) and Q^-1(1) do not meet on the subspace");
  if (found.empty()) throw Error(ErrorCode::NoConvergence, "no multistart run reached a critical point");
  return deduplicate_orbits(p, std::move(found), opts.dedup_tol);
}

double BranchSurrogate::hbar(const Vec& x) const {
  double s = 0.0;
  for (const auto& e : a.averaging) s += model.h(e * x);
  return s / static_cast<double>(a.averaging.size());
}

Vec BranchSurrogate::grad_hbar(const Vec& x) const {
  Vec g = Vec::Zero(x.size());
  for (const auto& e : a.averaging) g += e.transpose() * model.grad_h(e * x);
  return g / static_cast<double>(a.averaging.size());
}

ConstrainedProblem BranchSurrogate::problem(double r) const {
  ConstrainedProblem p;
  add_constraints(model, a, cell, p);
  const Mat b = a.subspace.basis;
  const Mat q = a.q;
  const double rk = std::pow(r, a.k);
  const BranchSurrogate* self = this;
  p.f = [self, b, q, r, rk](const Vec& rho) {
    return (self->hbar(r * (b * rho)) - r * r * 0.5 * rho.dot(q * rho)) / rk;
  };
  p.grad_f = [self, b, q, r, rk](const Vec& rho) {
    return Vec((r * (b.transpose() * self->grad_hbar(r * (b * rho))) - r * r * (q * rho)) / rk);
  };
  const auto grad = p.grad_f;
  p.hess_f = [grad](const Vec& rho) { return symmetric_part(fd_jacobian(grad, rho, 1e-3)); };
  return p;
}

BranchSample BranchSurrogate::sample(double r, const KktPoint& k) const {
  BranchSample s;
  s.r = r;
  s.rho = k.u;
  s.v = r * a.subspace.embed(k.u);
  const double factor = std::pow(r, a.k - 2);
  s.c = 1.0 + factor * k.c;
  s.multipliers = factor * k.multipliers;
  const Vec vs = r * k.u;
  s.q_residual = std::abs(0.5 * vs.dot(a.q * vs) - r * r);
  const Vec j = model.J(s.v);
  double jr = 0.0;
  for (std::size_t i = 0; i < cell.l_coords.size(); ++i) {
    const double diff = j(cell.l_coords[i]) - r * r * cell.lambda(static_cast<int>(i));
    jr += diff * diff;
  }
  s.j_residual = std::sqrt(jr);
  s.energy = model.h(s.v);
  return s;
}

RpoBranch branch_continuation(const EquivariantHamiltonianModel& model, const TaylorAnalysis& a,
                              const IsotropyCell& cell, const CriticalOrbit& orbit, const BranchOptions& opts) {
  if (!orbit.g_morse) throw Error(ErrorCode::NotMorse, "seed orbit fails the Morse check");
  BranchSurrogate sur{model, a, cell};
  RpoBranch br;
  br.seed = orbit;
  br.lambda = cell.lambda;
  Vec rho = orbit.u;
  const int n = std::max(2, opts.n_samples);
  for (int i = 0; i < n; ++i) {
    const double r = opts.r_max / 100.0 * std::pow(100.0, static_cast<double>(i) / (n - 1));
    const ConstrainedProblem p = sur.problem(r);
    const KktPoint k = solve_kkt(p, rho, opts.kkt);
    if (!k.converged || (k.u - rho).norm() > 0.5 * rho.norm()) {
      br.fold = true;
      br.status = "BranchFold at r=" + std::to_string(r);
      break;
    }
    rho = k.u;
    br.samples.push_back(sur.sample(r, k));
  }
  if (br.samples.empty()) return br;
  // c - 1 and ||Lambda|| fitted as C x + D x^2 with x = r^(k-2); C is the leading constant.
  const int ns = static_cast<int>(br.samples.size());
  Mat design(ns, 2);
  Vec dc(ns), dl(ns);
  for (int i = 0; i < ns; ++i) {
    const double x = std::pow(br.samples[i].r, a.k - 2);
    design(i, 0) = x;
    design(i, 1) = x * x;
    dc(i) = br.samples[i].c - 1.0;
    dl(i) = br.samples[i].multipliers.norm();
  }
  const int cols = ns >= 2 ? 2 : 1;
  const auto qr = design.leftCols(cols).colPivHouseholderQr();
  const Vec fc = qr.solve(dc);
  const Vec fl = qr.solve(dl);
  br.c_fit = fc(0);
  br.lambda_fit = fl(0);
  br.c_fit_residual = dc.norm() > 0.0 ? (design.leftCols(cols) * fc - dc).norm() / dc.norm() : 0.0;
  br.lambda_fit_residual = dl.norm() > 0.0 ? (design.leftCols(cols) * fl - dl).norm() / dl.norm() : 0.0;
  if (br.samples.size() >= 2 &&
      br.samples.front().multipliers.norm() > br.samples.back().multipliers.norm() + 1e-14) {
    br.multiplier_blowup = true;
    if (br.status == "ok") br.status = "MultiplierBlowup";
  }
  return br;
}

std::optional<BranchSample> branch_point_at_energy(const EquivariantHamiltonianModel& model,
                                                   const TaylorAnalysis& a, const IsotropyCell& cell,
                                                   const RpoBranch& branch, double energy,
                                                   const KktOptions& kkt) {
  if (branch.samples.empty() || !(energy > 0.0)) return std::nullopt;
  BranchSurrogate sur{model, a, cell};
  double r = std::sqrt(energy);
  const BranchSample* nearest = &branch.samples.front();
  for (const auto& s : branch.samples) {
    if (std::abs(std::log(s.r / r)) < std::abs(std::log(nearest->r / r))) nearest = &s;
  }
  Vec rho = nearest->rho;
  auto solve = [&](double rr) -> std::optional<std::pair<double, KktPoint>> {
    const KktPoint k = solve_kkt(sur.problem(rr), rho, kkt);
    if (!k.converged) return std::nullopt;
    return std::make_pair(sur.hbar(rr * a.subspace.embed(k.u)) - energy, k);
  };
  auto f0 = solve(r);
  if (!f0) return std::nullopt;
  rho = f0->second.u;
  double r1 = r * (1.0 + 1e-3);
  auto f1 = solve(r1);
  if (!f1) return std::nullopt;
  for (int it = 0; it < 40 && std::abs(f1->first) > 1e-14 * energy; ++it) {
    const double denom = f1->first - f0->first;
    if (denom == 0.0) break;
    const double r2 = r1 - f1->first * (r1 - r) / denom;
    r = r1;
    f0 = f1;
    r1 = r2;
    rho = f0->second.u;
    f1 = solve(r1);
    if (!f1) return std::nullopt;
  }
  return sur.sample(r1, f1->second);
}

namespace {

struct ShootSystem {
  const EquivariantHamiltonianModel& model;
  const Mat& basis;
  const ShootOptions& opts;
  Vec m0;
  double scale;
  double energy;
  Vec momentum;
  double energy_scale;
  Vec x0;             // X_h(m0)
  std::vector<Vec> phases;  // group phase directions at m0
  int n, nb;

  Mat drift(const Vec& xi) const {
    if (nb == 0) return Mat::Zero(n, n);
    return generator_of(model.action(), basis * xi);
  }

  Vec augmented_end(const Vec& m, double tau, const Vec& xi) const {
    const Mat x = drift(xi);
    const Field f = [this, &x](const Vec& v) { return Vec(model.vector_field(v) - x * v); };
    return integrate(f, m, tau, opts.adaptive, nullptr, [this](const Vec& v) { return model.in_domain(v); });
  }

  Vec residual(const Vec& z) const {
    const Vec m = z.head(n);
    const double tau = z(n);
    const Vec xi = z.tail(nb);
    const int nj = static_cast<int>(momentum.size());
    Vec r(n + 1 + nj + 1 + static_cast<int>(phases.size()));
    r.head(n) = (augmented_end(m, tau, xi) - m) / scale;
    r(n) = (model.h(m) - energy) / energy_scale;
    if (nj > 0) r.segment(n + 1, nj) = (model.J(m) - momentum) / energy_scale;
    r(n + 1 + nj) = x0.dot(m - m0) / (x0.norm() * scale);
    for (std::size_t i = 0; i < phases.size(); ++i) {
      r(n + 2 + nj + static_cast<int>(i)) = phases[i].dot(m - m0) / (phases[i].norm() * scale);
    }
    return r;
  }

  Mat jacobian(const Vec& z, int jobs) const {
    const int cols = static_cast<int>(z.size());
    std::vector<Vec> columns(cols);
    auto column = [&](int c) {
      double h;
      if (c < n) h = 1e-6 * scale;
      else if (c == n) h = 1e-6 * std::max(1.0, std::abs(z(n)));
      else h = 1e-6;
      Vec zp = z, zm = z;
      zp(c) += h;
      zm(c) -= h;
      columns[c] = (residual(zp) - residual(zm)) / (2.0 * h);
    };
    if (jobs == 1) {
      for (int c = 0; c < cols; ++c) column(c);
    } else {
      std::vector<std::string> errors(cols);
#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : omp_get_max_threads())
      for (int c = 0; c < cols; ++c) {
        try {
          column(c);
        } catch (const std::exception& e) {
          errors[c] = e.what();
        }
      }
      for (const auto& e : errors) {
        if (!e.empty()) throw Error(ErrorCode::NoConvergence, "Jacobian column failed: " + e);
      }
    }
    Mat jac(columns.front().size(), cols);
    for (int c = 0; c < cols; ++c) jac.col(c) = columns[c];
    return jac;
  }
};

double nontriviality_witness(const EquivariantHamiltonianModel& model, const std::vector<Vec>& samples) {
  double worst = 0.0;
  for (const auto& x : samples) {
    const Vec xh = model.vector_field(x);
    const double nx = xh.norm();
    if (nx == 0.0) continue;
    double rel = 1.0;
    if (model.action().group().dim() > 0) {
      const Mat t = model.action().orbit_tangent(x);
      const Vec c = t.completeOrthogonalDecomposition().solve(xh);
      rel = (xh - t * c).norm() / nx;
    }
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace

RpoCertificate shoot_rpo(const EquivariantHamiltonianModel& model, const Vec& m0, double tau0, const Vec& xi0,
                         const Mat& algebra_basis, const ShootOptions& opts) {
  if (!(tau0 > 0.0)) throw Error(ErrorCode::InvalidParameter, "tau0 must be positive");
  const int n = model.dim();
  const int nb = static_cast<int>(algebra_basis.cols());
  if (xi0.size() != nb) throw Error(ErrorCode::InvalidParameter, "xi0 must have one coefficient per basis column");
  ShootSystem sys{model, algebra_basis, opts, m0, std::max(m0.norm(), 1e-300),
                  opts.energy.value_or(model.h(m0)), opts.momentum.value_or(model.J(m0)), 0.0,
                  model.vector_field(m0), {}, n, nb};
  sys.energy_scale = std::max(std::abs(sys.energy), 1e-300);
  for (int i = 0; i < nb; ++i) {
    const Vec w = generator_of(model.action(), algebra_basis.col(i)) * m0;
    if (w.norm() > 1e-10 * sys.scale) sys.phases.push_back(w);
  }
  if (sys.x0.norm() == 0.0) throw Error(ErrorCode::InvalidParameter, "m0 is an equilibrium");

  Vec z(n + 1 + nb);
  z << m0, tau0, xi0;
  Vec r = sys.residual(z);
  double norm = r.norm();
  int it = 0;
  const double target = 0.05 * opts.tol_residual;
  for (; it < opts.max_iterations; ++it) {
    const double cycle = r.head(n).norm();
    const double side = r.tail(r.size() - n).lpNorm<Eigen::Infinity>();
    if (cycle <= target && side <= 1e-11) break;
    const Mat jac = sys.jacobian(z, opts.jobs);
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(jac);
    cod.setThreshold(1e-10);
    const Vec step = cod.solve(-r);
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls) {
      const Vec trial = z + alpha * step;
      if (trial(n) > 0.0) {
        try {
          const Vec rt = sys.residual(trial);
          if (rt.allFinite() && rt.norm() < norm) {
            z = trial;
            r = rt;
            norm = rt.norm();
            accepted = true;
            break;
          }
        } catch (const Error&) {
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }

  RpoCertificate cert;
  cert.m = z.head(n);
  cert.tau = z(n);
  cert.xi = nb > 0 ? Vec(algebra_basis * z.tail(nb)) : Vec::Zero(model.action().group().dim());
  cert.iterations = it;
  cert.scale = sys.scale;
  cert.energy = model.h(cert.m);
  cert.momentum = model.J(cert.m);
  const Mat xi_mat = nb > 0 ? generator_of(model.action(), cert.xi) : Mat::Zero(n, n);
  const Mat back = expm(-cert.tau * xi_mat);
  const Field plain = [&model](const Vec& v) { return model.vector_field(v); };
  const auto domain = [&model](const Vec& v) { return model.in_domain(v); };
  const auto samples = integrate_sampled(plain, cert.m, cert.tau, 16, opts.adaptive, nullptr, domain);
  cert.residual = (back * samples.back() - cert.m).norm();
  IntegratorConfig gl;
  gl.scheme = Scheme::symplectic_implicit_order4;
  gl.step = cert.tau / 1000.0;
  const Vec end_gl = integrate(plain, cert.m, cert.tau, gl, nullptr, domain);
  cert.residual_check = (back * end_gl - cert.m).norm();
  cert.energy_drift = std::abs(model.h(end_gl) - cert.energy);
  const double side = r.tail(r.size() - n).lpNorm<Eigen::Infinity>();
  if (!(cert.residual <= opts.tol_residual * cert.scale) || side > 1e-9) {
    throw Error(ErrorCode::NoConvergence, "shooting residual " + std::to_string(cert.residual / cert.scale) +
                                              " (relative) after " + std::to_string(it) + " iterations");
  }
  cert.witness = nontriviality_witness(model, samples);
  if (cert.witness <= opts.witness_tol) {
    throw Error(ErrorCode::ConvergedToRelativeEquilibrium,
                "X_h is tangent to the group orbit along the solution (witness " + std::to_string(cert.witness) +
                    ")");
  }
  return cert;
}

namespace {

// Rotation taking unit vector a to unit vector b (Rodrigues).
Mat rotation_between(const Vec& a, const Vec& b) {
  const Eigen::Vector3d u = a.head<3>().normalized();
  const Eigen::Vector3d v = b.head<3>().normalized();
  return Eigen::Quaterniond::FromTwoVectors(u, v).toRotationMatrix();
}

}  // namespace

double certificate_distance(const EquivariantHamiltonianModel& model, const RpoCertificate& a,
                            const RpoCertificate& b) {
  const LinearAction& action = model.action();
  const double scale = std::max(a.scale, b.scale);
  if (std::abs(a.tau - b.tau) > 1e-5 * std::max(a.tau, b.tau)) return kInf;
  if (std::abs(a.energy - b.energy) > 1e-6 * std::max(std::abs(a.energy), 1e-300)) return kInf;
  const Vec ja = model.J(a.m);
  Vec mb = b.m;
  Vec jb = model.J(mb);
  const double jtol = 1e-6 * std::max(ja.norm(), scale * scale);
  if ((ja - jb).norm() > jtol) {
    if (action.group().kind() != GroupKind::so3 || std::abs(ja.norm() - jb.norm()) > jtol) return kInf;
    const Mat rot = rotation_between(jb, ja);
    Mat g = Mat::Zero(6, 6);
    g.topLeftCorner(3, 3) = rot;
    g.bottomRightCorner(3, 3) = rot;
    mb = g * mb;
    jb = model.J(mb);
  }
  std::vector<Mat> gens;
  const int d = action.group().dim();
  if (d > 0) {
    std::vector<double> mu(ja.data(), ja.data() + ja.size());
    for (const auto& c : action.group().coadjoint_isotropy(mu)) gens.push_back(generator_of(action, c));
  }
  const Field plain = [&model](const Vec& v) { return model.vector_field(v); };
  IntegratorConfig cfg{Scheme::adaptive_explicit_order5, 1e-2, 1e-11, 1e-15, 5'000'000};
  const int coarse = 128;
  const auto traj_b = integrate_sampled(plain, mb, b.tau, coarse, cfg);
  int best_j = 0;
  double best_d = kInf;
  for (int j = 0; j < coarse; ++j) {
    const double dist = orbit_distance(gens, a.m, traj_b[j]);
    if (dist < best_d) {
      best_d = dist;
      best_j = j;
    }
  }
  // refine the time shift and group phase jointly
  const int k = static_cast<int>(gens.size());
  auto group = [&](const Vec& t) {
    Mat g = Mat::Identity(model.dim(), model.dim());
    for (int i = 0; i < k; ++i) g = g * expm(t(i) * gens[i]);
    return g;
  };
  Vec params = Vec::Zero(k + 1);
  {
    Vec t;
    orbit_distance(gens, a.m, traj_b[best_j], &t);
    if (k > 0) params.tail(k) = t;
  }
  const Vec yj = traj_b[best_j];
  auto mismatch = [&](const Vec& p) {
    const Vec y = integrate(plain, yj, p(0), cfg);
    return Vec(group(p.tail(k)) * a.m - y);
  };
  double cur = mismatch(params).norm();
  for (int it = 0; it < 20 && cur > 1e-13 * scale; ++it) {
    Mat jac(model.dim(), k + 1);
    for (int c = 0; c <= k; ++c) {
      Vec pp = params, pm = params;
      pp(c) += 1e-6;
      pm(c) -= 1e-6;
      jac.col(c) = (mismatch(pp) - mismatch(pm)) / 2e-6;
    }
    const Vec step = jac.completeOrthogonalDecomposition().solve(-mismatch(params));
    const Vec next = params + step;
    const double nv = mismatch(next).norm();
    if (!(nv < cur)) break;
    params = next;
    cur = nv;
  }
  const Mat g = group(params.tail(k));
  const Vec start_b = integrate(plain, yj, params(0), cfg);
  const auto ta = integrate_sampled(plain, a.m, a.tau, 32, cfg);
  const auto tb = integrate_sampled(plain, start_b, a.tau, 32, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < ta.size(); ++i) worst = std::max(worst, (g * ta[i] - tb[i]).norm());
  return worst;
}

std::vector<DistinctOrbit> distinct_orbits(const EquivariantHamiltonianModel& model,
                                           const std::vector<RpoCertificate>& certs, double tol) {
  std::vector<DistinctOrbit> out;
  for (const auto& c : certs) {
    bool merged = false;
    for (auto& rep : out) {
      const double scale = std::max(rep.representative.scale, c.scale);
      if (certificate_distance(model, rep.representative, c) <= tol * scale) {
        ++rep.multiplicity;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back({c, 1});
  }
  return out;
}

}  // namespace relmode
