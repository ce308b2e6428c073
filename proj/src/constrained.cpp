#include "relmode/constrained.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/special_functions/erf.hpp>
#include <omp.h>

#include "relmode/errors.hpp"

namespace relmode {

Vec ConstrainedProblem::J(const Vec& u) const {
  Vec out(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out(static_cast<int>(i)) = u.dot(j[i] * u);
  return out;
}

Vec ConstrainedProblem::constraint_residual(const Vec& u) const {
  Vec r(n_constraints());
  r(0) = Q(u) - q_level;
  if (!j.empty()) r.tail(j.size()) = J(u) - lambda;
  return r;
}

Mat ConstrainedProblem::constraint_jacobian(const Vec& u) const {
  Mat c(n_constraints(), dim);
  c.row(0) = (q * u).transpose();
  for (std::size_t i = 0; i < j.size(); ++i) c.row(1 + static_cast<int>(i)) = (2.0 * j[i] * u).transpose();
  return c;
}

std::optional<Vec> project_to_constraints(const ConstrainedProblem& p, const Vec& u0, int max_iterations) {
  Vec u = u0;
  const double q0 = p.Q(u);
  if (!(q0 > 0.0)) return std::nullopt;
  u *= std::sqrt(p.q_level / q0);
  for (int it = 0; it < max_iterations; ++it) {
    const Vec r = p.constraint_residual(u);
    if (r.lpNorm<Eigen::Infinity>() <= 1e-14 * std::max(1.0, p.q_level)) return u;
    const Mat c = p.constraint_jacobian(u);
    Vec step = c.completeOrthogonalDecomposition().solve(r);
    // damp long steps so the iteration stays near the starting orbit
    const double cap = 0.3 * u.norm();
    if (step.norm() > cap) step *= cap / step.norm();
    u -= step;
    if (!u.allFinite()) return std::nullopt;
  }
  if (p.constraint_residual(u).lpNorm<Eigen::Infinity>() <= 1e-11 * std::max(1.0, p.q_level)) return u;
  return std::nullopt;
}

double least_squares_multipliers(const ConstrainedProblem& p, const Vec& u, const Vec& grad, double& c,
                                 Vec& multipliers) {
  const Mat ct = p.constraint_jacobian(u).transpose();
  const Vec x = ct.completeOrthogonalDecomposition().solve(grad);
  c = x(0);
  multipliers = x.tail(x.size() - 1);
  return (grad - ct * x).norm();
}

namespace {

struct KktSystem {
  const ConstrainedProblem& p;
  int n, m;

  Vec residual(const Vec& z) const {
    const Vec u = z.head(n);
    Vec g = p.grad_f(u) - z(n) * (p.q * u);
    for (int i = 0; i < m - 1; ++i) g -= z(n + 1 + i) * (2.0 * p.j[i] * u);
    Vec r(n + m);
    r.head(n) = g;
    r.tail(m) = p.constraint_residual(u);
    return r;
  }

  Mat jacobian(const Vec& z) const {
    const Vec u = z.head(n);
    Mat jac = Mat::Zero(n + m, n + m);
    Mat hl = p.hess_f(u) - z(n) * p.q;
    for (int i = 0; i < m - 1; ++i) hl -= z(n + 1 + i) * (2.0 * p.j[i]);
    jac.topLeftCorner(n, n) = hl;
    const Mat c = p.constraint_jacobian(u);
    jac.topRightCorner(n, m) = -c.transpose();
    jac.bottomLeftCorner(m, n) = c;
    return jac;
  }
};

}  // namespace

KktPoint solve_kkt(const ConstrainedProblem& p, const Vec& u0, const KktOptions& opts) {
  const int n = p.dim;
  const int m = p.n_constraints();
  KktSystem sys{p, n, m};
  Vec z(n + m);
  z.head(n) = u0;
  {
    double c;
    Vec lam;
    least_squares_multipliers(p, u0, p.grad_f(u0), c, lam);
    z(n) = c;
    z.tail(m - 1) = lam;
  }
  Vec r = sys.residual(z);
  double norm = r.norm();
  double mu = -1.0;
  KktPoint out;
  int it = 0;
  for (; it < opts.max_iterations && norm > opts.tolerance; ++it) {
    const Mat jac = sys.jacobian(z);
    const Mat jtj = jac.transpose() * jac;
    const Vec jtr = jac.transpose() * r;
    if (mu < 0.0) mu = 1e-6 * std::max(jtj.diagonal().maxCoeff(), 1e-300);
    bool accepted = false;
    for (int inner = 0; inner < 30; ++inner) {
      Mat a = jtj;
      a.diagonal().array() += mu;
      const Vec step = a.ldlt().solve(-jtr);
      const Vec trial = z + step;
      const Vec rt = sys.residual(trial);
      const double nt = rt.norm();
      if (std::isfinite(nt) && nt < norm) {
        z = trial;
        r = rt;
        const bool tiny = step.norm() <= 1e-15 * std::max(1.0, z.norm());
        norm = nt;
        mu = std::max(mu / 5.0, 1e-18 * std::max(jtj.diagonal().maxCoeff(), 1e-300));
        accepted = true;
        if (tiny) it = opts.max_iterations;
        break;
      }
      mu *= 8.0;
    }
    if (!accepted) break;
  }
  out.iterations = it;
  Vec u = z.head(n);
  if (auto polished = project_to_constraints(p, u, 20)) u = *polished;
  out.u = u;
  const Vec grad = p.grad_f(u);
  out.projected_gradient = least_squares_multipliers(p, u, grad, out.c, out.multipliers);
  out.constraint_residual = p.constraint_residual(u).lpNorm<Eigen::Infinity>();
  Vec zf(n + m);
  zf << u, out.c, out.multipliers;
  out.kkt_residual = sys.residual(zf).norm();
  out.converged = out.constraint_residual <= opts.constraint_tol && out.projected_gradient <= opts.gradient_tol;
  return out;
}

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

double radical_inverse(int base, long index) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

std::vector<Vec> halton_starts(int dim, int count, std::uint64_t seed) {
  if (dim > static_cast<int>(std::size(kPrimes))) throw Error(ErrorCode::InvalidParameter, "dimension too large");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec shift(dim);
  for (int i = 0; i < dim; ++i) shift(i) = unif(rng);
  std::vector<Vec> out;
  for (int k = 0; k < count; ++k) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) {
      double x = radical_inverse(kPrimes[i], k + 1) + shift(i);
      x -= std::floor(x);
      x = std::clamp(x, 1e-12, 1.0 - 1e-12);
      v(i) = std::sqrt(2.0) * boost::math::erf_inv(2.0 * x - 1.0);
    }
    out.push_back(v);
  }
  return out;
}

namespace {

std::optional<KktPoint> one_start(const ConstrainedProblem& p, const Vec& s, const KktOptions& opts) {
  auto feasible = project_to_constraints(p, s);
  if (!feasible) return std::nullopt;
  KktPoint k = solve_kkt(p, *feasible, opts);
  k.u = k.u.eval();
  return k;
}

}  // namespace

std::vector<std::optional<KktPoint>> multistart_serial(const ConstrainedProblem& p, const std::vector<Vec>& starts,
                                                       const KktOptions& opts) {
  std::vector<std::optional<KktPoint>> out(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) out[i] = one_start(p, starts[i], opts);
  return out;
}

std::vector<std::optional<KktPoint>> multistart_parallel(const ConstrainedProblem& p,
                                                         const std::vector<Vec>& starts, const KktOptions& opts,
                                                         int jobs) {
  std::vector<std::optional<KktPoint>> out(starts.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  const long n = static_cast<long>(starts.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = one_start(p, starts[i], opts);
    } catch (...) {
      out[i] = std::nullopt;
    }
  }
  return out;
}

double orbit_distance(const std::vector<Mat>& generators, const Vec& a, const Vec& b, Vec* best) {
  const int k = static_cast<int>(generators.size());
  if (k == 0) {
    if (best) *best = Vec();
    return (a - b).norm();
  }
  auto apply = [&](const Vec& t) {
    Vec x = a;
    for (int i = k - 1; i >= 0; --i) x = expm(t(i) * generators[i]) * x;
    return x;
  };
  const double two_pi = 2.0 * std::numbers::pi;
  Vec t_best = Vec::Zero(k);
  double d_best = (a - b).norm();
  if (k <= 2) {
    const int grid = 48;
    std::vector<Vec> inner;
    const Mat step0 = expm((two_pi / grid) * generators[k - 1]);
    Vec x = a;
    for (int j = 0; j < grid; ++j) {
      inner.push_back(x);
      x = step0 * x;
    }
    const int outer = k == 2 ? grid : 1;
    const Mat step1 = k == 2 ? Mat(expm((two_pi / grid) * generators[0])) : Mat();
    for (int i = 0; i < outer; ++i) {
      for (int j = 0; j < grid; ++j) {
        const double dist = (inner[j] - b).norm();
        if (dist < d_best) {
          d_best = dist;
          if (k == 2) t_best << two_pi * i / grid, two_pi * j / grid;
          else t_best << two_pi * j / grid;
        }
      }
      if (k == 2) for (auto& v : inner) v = step1 * v;
    }
  } else {
    std::mt19937_64 rng(0x0b17);
    std::uniform_real_distribution<double> angle(0.0, two_pi);
    for (int s = 0; s < 4000; ++s) {
      Vec t(k);
      for (int i = 0; i < k; ++i) t(i) = angle(rng);
      const double dist = (apply(t) - b).norm();
      if (dist < d_best) {
        d_best = dist;
        t_best = t;
      }
    }
  }
  // Gauss-Newton refinement in the group parameters.
  for (int it = 0; it < 40; ++it) {
    const Vec x = apply(t_best);
    const Vec r = x - b;
    Mat jac(a.size(), k);
    for (int i = 0; i < k; ++i) {
      Vec tp = t_best, tm = t_best;
      tp(i) += 1e-6;
      tm(i) -= 1e-6;
      jac.col(i) = (apply(tp) - apply(tm)) / 2e-6;
    }
    const Vec step = jac.completeOrthogonalDecomposition().solve(-r);
    const Vec t_new = t_best + step;
    const double d_new = (apply(t_new) - b).norm();
    if (!(d_new < d_best)) break;
    const bool small = d_best - d_new <= 1e-15 * (1.0 + d_best);
    d_best = d_new;
    t_best = t_new;
    if (small) break;
  }
  if (best) *best = t_best;
  return d_best;
}

ReducedHessian reduced_hessian(const ConstrainedProblem& p, const KktPoint& point) {
  const Vec& u = point.u;
  Mat hl = p.hess_f(u) - point.c * p.q;
  for (std::size_t i = 0; i < p.j.size(); ++i) hl -= point.multipliers(static_cast<int>(i)) * (2.0 * p.j[i]);
  hl = symmetric_part(hl);
  const Mat tangent = null_space(p.constraint_jacobian(u), 1e-9);
  Mat orbit(p.dim, p.symmetry.size());
  for (std::size_t k = 0; k < p.symmetry.size(); ++k) orbit.col(static_cast<int>(k)) = p.symmetry[k] * u;
  const Mat orbit_basis = orthonormal_basis(tangent * (tangent.transpose() * orbit), 1e-8);
  const Mat reduced = complement_in(tangent, orbit_basis, 1e-8);
  ReducedHessian out;
  out.tangent_dim = static_cast<int>(tangent.cols());
  out.orbit_dim = static_cast<int>(orbit_basis.cols());
  Eigen::SelfAdjointEigenSolver<Mat> full(symmetric_part(p.hess_f(u)));
  out.scale = std::max(full.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  if (reduced.cols() == 0) {
    out.eigenvalues = Vec(0);
    out.min_abs = std::numeric_limits<double>::infinity();
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(reduced.transpose() * hl * reduced);
  out.eigenvalues = es.eigenvalues();
  out.min_abs = out.eigenvalues.cwiseAbs().minCoeff();
  return out;
}

}  // namespace relmode
