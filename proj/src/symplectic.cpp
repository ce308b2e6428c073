#include "relmode/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "relmode/errors.hpp"

namespace relmode {

SymplecticSpace::SymplecticSpace(Mat omega)
    : omega_(std::move(omega)), sharp_(omega_.transpose().inverse()) {}

SymplecticSpace SymplecticSpace::canonical(int dim) {
  if (dim <= 0 || dim % 2 != 0) {
    throw Error(ErrorCode::InvalidSymplecticForm, "dimension must be even and positive");
  }
  return SymplecticSpace(canonical_omega(dim));
}

SymplecticSpace SymplecticSpace::from_matrix(const Mat& omega) {
  if (omega.rows() != omega.cols() || omega.rows() == 0 || omega.rows() % 2 != 0) {
    throw Error(ErrorCode::InvalidSymplecticForm, "omega must be square of even dimension");
  }
  const double scale = std::max(1.0, omega.cwiseAbs().maxCoeff());
  if ((omega + omega.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorCode::InvalidSymplecticForm, "omega is not antisymmetric");
  }
  if (inverse_condition(omega) <= 1e-10) {
    throw Error(ErrorCode::InvalidSymplecticForm, "omega is degenerate");
  }
  return SymplecticSpace(omega);
}

Subspace::Subspace(const Mat& spanning, double rel_tol) : basis(orthonormal_basis(spanning, rel_tol)) {}

Subspace Subspace::whole(int dim) {
  Subspace s;
  s.basis = Mat::Identity(dim, dim);
  return s;
}

QuadraticForm::QuadraticForm(const Mat& h) : hessian(symmetric_part(h)) {
  if (hessian.size() == 0) {
    definiteness = Definiteness::indefinite;
    return;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(hessian);
  const auto& ev = es.eigenvalues();
  const double thr = 1e-10 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  if (ev.minCoeff() > thr) {
    definiteness = Definiteness::positive;
  } else if (ev.maxCoeff() < -thr) {
    definiteness = Definiteness::negative;
  } else {
    definiteness = Definiteness::indefinite;
  }
}

double symplecticity_defect(const Mat& a, const Mat& omega) {
  return (omega * a + a.transpose() * omega).norm();
}

QuadraticForm quadratic_form_of(const Mat& a, const SymplecticSpace& space) {
  // 1/2 (Av)^T Omega v = 1/2 v^T (A^T Omega) v
  return QuadraticForm(symmetric_part(a.transpose() * space.omega()));
}

namespace {

struct Clustering {
  std::vector<std::vector<int>> members;
  std::vector<Complex> centers;
  double min_gap = std::numeric_limits<double>::infinity();
  double max_spread = 0.0;
};

Clustering cluster_eigenvalues(const CVec& ev, double tol) {
  const int n = static_cast<int>(ev.size());
  // single linkage via union-find
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(ev(i) - ev(j)) <= tol) parent[find(i)] = find(j);
    }
  }
  Clustering out;
  std::vector<int> root_index(n, -1);
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (root_index[r] < 0) {
      root_index[r] = static_cast<int>(out.members.size());
      out.members.emplace_back();
    }
    out.members[root_index[r]].push_back(i);
  }
  for (const auto& m : out.members) {
    Complex c = 0.0;
    for (int i : m) c += ev(i);
    c /= static_cast<double>(m.size());
    out.centers.push_back(c);
    for (int i : m) out.max_spread = std::max(out.max_spread, std::abs(ev(i) - c));
  }
  for (std::size_t a = 0; a < out.members.size(); ++a) {
    for (std::size_t b = a + 1; b < out.members.size(); ++b) {
      for (int i : out.members[a]) {
        for (int j : out.members[b]) out.min_gap = std::min(out.min_gap, std::abs(ev(i) - ev(j)));
      }
    }
  }
  return out;
}

// Riesz projector (1/2 pi i) \oint (z - A)^{-1} dz on a circle around `center`.
CMat riesz_projector(const Mat& a, Complex center, double radius, int points) {
  const int n = static_cast<int>(a.rows());
  CMat acc = CMat::Zero(n, n);
  const CMat ac = a.cast<Complex>();
  for (int j = 0; j < points; ++j) {
    const double theta = 2.0 * std::numbers::pi * (j + 0.5) / points;
    const Complex offset = radius * Complex(std::cos(theta), std::sin(theta));
    const Complex z = center + offset;
    CMat resolvent = (z * CMat::Identity(n, n) - ac).partialPivLu().inverse();
    acc += offset * resolvent;
  }
  return acc / static_cast<double>(points);
}

}  // namespace

LinearHamiltonianMap jordan_chevalley(const Mat& a, const SymplecticSpace& space,
                                      const JordanOptions& opts) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || n != space.dim()) {
    throw Error(ErrorCode::NotInfinitesimallySymplectic, "dimension mismatch with symplectic space");
  }
  const double anorm = a.norm();
  if (symplecticity_defect(a, space.omega()) > 1e-8 * std::max(1.0, anorm)) {
    throw Error(ErrorCode::NotInfinitesimallySymplectic, "Omega A + A^T Omega != 0");
  }

  LinearHamiltonianMap out{space, a, Mat::Zero(n, n), Mat::Zero(n, n), {}, 0.0};
  if (anorm == 0.0) {
    out.clusters.push_back({Complex(0.0, 0.0), n, CMat::Identity(n, n)});
    return out;
  }

  Eigen::EigenSolver<Mat> es(a, false);
  const CVec ev = es.eigenvalues();
  const double scale = std::max(ev.cwiseAbs().maxCoeff(), anorm);

  // Defective eigenvalues split by O(eps^{1/m}); escalate the tolerance while the
  // clustering is ambiguous or yields near-defective (huge) projectors.
  std::string last_reason;
  for (double rel = opts.cluster_rel_tol; rel <= opts.max_cluster_rel_tol * 1.0000001; rel *= 10.0) {
    const double tol = rel * scale;
    Clustering cl = cluster_eigenvalues(ev, tol);
    if (cl.members.size() > 1 && cl.min_gap < 10.0 * tol) {
      last_reason = "clusters within 10x tolerance";
      continue;
    }
    const double radius = cl.members.size() > 1 ? 0.5 * cl.min_gap : 1.0 + 2.0 * scale;
    if (cl.members.size() > 1 && radius <= 2.0 * cl.max_spread) {
      last_reason = "cluster spread comparable to gap";
      continue;
    }
    std::vector<EigenCluster> clusters;
    bool near_defective = false;
    CMat as = CMat::Zero(n, n);
    for (std::size_t c = 0; c < cl.members.size(); ++c) {
      CMat p = cl.members.size() == 1 ? CMat::Identity(n, n)
                                      : riesz_projector(a, cl.centers[c], radius, opts.contour_points);
      if (p.norm() > 1e6) near_defective = true;
      as += cl.centers[c] * p;
      clusters.push_back({cl.centers[c], static_cast<int>(cl.members[c].size()), std::move(p)});
    }
    if (near_defective) {
      last_reason = "near-defective cluster split";
      continue;
    }
    out.semisimple = as.real();
    out.nilpotent = a - out.semisimple;
    out.clusters = std::move(clusters);
    out.cluster_tolerance = tol;
    std::sort(out.clusters.begin(), out.clusters.end(), [](const EigenCluster& x, const EigenCluster& y) {
      if (x.value.imag() != y.value.imag()) return x.value.imag() < y.value.imag();
      return x.value.real() < y.value.real();
    });
    return out;
  }
  throw Error(ErrorCode::IllConditionedSpectrum, last_reason);
}

KreinReport krein_check(const QuadraticForm& q, const LinearHamiltonianMap& a) {
  KreinReport r;
  r.definite = q.definite();
  const double anorm = std::max(a.a.norm(), 1e-300);
  r.spectrum_imaginary = std::all_of(a.clusters.begin(), a.clusters.end(), [&](const EigenCluster& c) {
    return std::abs(c.value.real()) <= 1e-9 * anorm;
  });
  r.semisimple = a.nilpotent.norm() <= 1e-9 * std::max(1.0, anorm);
  if (r.definite && !(r.spectrum_imaginary && r.semisimple)) {
    throw Error(ErrorCode::KreinViolation, "definite energy form with non-elliptic or non-semisimple spectrum");
  }
  return r;
}

std::vector<double> imaginary_frequencies(const LinearHamiltonianMap& a, double rel_tol) {
  const double anorm = std::max(a.a.norm(), 1e-300);
  std::vector<double> out;
  for (const auto& c : a.clusters) {
    if (c.value.imag() > 0.0 && std::abs(c.value.real()) <= rel_tol * anorm) out.push_back(c.value.imag());
  }
  std::sort(out.begin(), out.end());
  return out;
}

ResonanceSpace resonance_space(const LinearHamiltonianMap& a, double nu0, const ResonanceOptions& opts) {
  if (!(nu0 > 0.0)) throw Error(ErrorCode::FrequencyNotInSpectrum, "nu0 must be positive");
  const int n = static_cast<int>(a.a.rows());
  const Complex inu(0.0, nu0);
  bool found = false;
  CMat proj = CMat::Zero(n, n);
  int total = 0;
  std::vector<int> harmonics;
  for (const auto& c : a.clusters) {
    if (std::abs(c.value - inu) <= opts.frequency_rel_tol * nu0) found = true;
    const Complex ratio = c.value / inu;
    const double k = std::round(ratio.real());
    if (k != 0.0 && std::abs(ratio - Complex(k, 0.0)) <= opts.integer_tol) {
      proj += c.projector;
      total += c.multiplicity;
      harmonics.push_back(static_cast<int>(std::abs(k)));
    }
  }
  if (!found) {
    std::ostringstream msg;
    msg << "i*" << nu0 << " is not an eigenvalue";
    throw Error(ErrorCode::FrequencyNotInSpectrum, msg.str());
  }
  // The real projector onto the sum of the selected generalized eigenspaces.
  const Mat p = proj.real();
  Eigen::JacobiSVD<Mat> svd(p, Eigen::ComputeThinU);
  ResonanceSpace u;
  u.nu0 = nu0;
  u.period = 2.0 * std::numbers::pi / nu0;
  u.subspace.basis = svd.matrixU().leftCols(total);
  u.semisimple = a.semisimple;
  std::sort(harmonics.begin(), harmonics.end());
  harmonics.erase(std::unique(harmonics.begin(), harmonics.end()), harmonics.end());
  u.harmonics = harmonics;

  const Mat& b = u.subspace.basis;
  u.restricted_omega = b.transpose() * a.space.omega() * b;
  if (total % 2 != 0 || inverse_condition(u.restricted_omega) <= 1e-10) {
    throw Error(ErrorCode::DegenerateForm, "omega restricted to the resonance space is degenerate");
  }
  u.restricted_semisimple = restrict(a.semisimple, u.subspace, 1e-8);
  u.restricted_a = restrict(a.a, u.subspace, 1e-8);
  return u;
}

Mat restrict(const Mat& m, const Subspace& s, double tol) {
  const Mat& b = s.basis;
  const Mat image = m * b;
  const Mat outside = image - b * (b.transpose() * image);
  if (outside.norm() > tol * std::max(1.0, m.norm())) {
    throw Error(ErrorCode::NotInvariant, "subspace is not invariant under the map");
  }
  return b.transpose() * image;
}

QuadraticForm restrict(const QuadraticForm& q, const Subspace& s) {
  return QuadraticForm(s.basis.transpose() * q.hessian * s.basis);
}

SymplecticSpace restrict(const SymplecticSpace& space, const Subspace& s) {
  const Mat w = s.basis.transpose() * space.omega() * s.basis;
  if (s.dim() == 0 || s.dim() % 2 != 0 || inverse_condition(w) <= 1e-10) {
    throw Error(ErrorCode::DegenerateRestriction, "restricted symplectic form is degenerate");
  }
  return SymplecticSpace::from_matrix(0.5 * (w - w.transpose()));
}

}  // namespace relmode
