#include "relmode/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <unsupported/Eigen/MatrixFunctions>

#include "relmode/errors.hpp"

namespace relmode {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotInfinitesimallySymplectic: return "NotInfinitesimallySymplectic";
    case ErrorCode::IllConditionedSpectrum: return "IllConditionedSpectrum";
    case ErrorCode::KreinViolation: return "KreinViolation";
    case ErrorCode::FrequencyNotInSpectrum: return "FrequencyNotInSpectrum";
    case ErrorCode::DegenerateForm: return "DegenerateForm";
    case ErrorCode::NotInvariant: return "NotInvariant";
    case ErrorCode::DegenerateRestriction: return "DegenerateRestriction";
    case ErrorCode::InvalidSymplecticForm: return "InvalidSymplecticForm";
    case ErrorCode::NotCanonicalAction: return "NotCanonicalAction";
    case ErrorCode::UnknownSubgroup: return "UnknownSubgroup";
    case ErrorCode::NonPeriodicGenerator: return "NonPeriodicGenerator";
    case ErrorCode::UnsupportedGroup: return "UnsupportedGroup";
    case ErrorCode::NotSimpleAction: return "NotSimpleAction";
    case ErrorCode::NonIntegerBound: return "NonIntegerBound";
    case ErrorCode::InvalidEstimateInput: return "InvalidEstimateInput";
    case ErrorCode::StepLimitExceeded: return "StepLimitExceeded";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::NotRelativeEquilibrium: return "NotRelativeEquilibrium";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::UnsupportedCase: return "UnsupportedCase";
    case ErrorCode::IndefiniteQuadraticForm: return "IndefiniteQuadraticForm";
    case ErrorCode::RadialToMaxOrder: return "RadialToMaxOrder";
    case ErrorCode::EmptyLevelSet: return "EmptyLevelSet";
    case ErrorCode::RankDeficientConstraints: return "RankDeficientConstraints";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotMorse: return "NotMorse";
    case ErrorCode::BranchFold: return "BranchFold";
    case ErrorCode::MultiplierBlowup: return "MultiplierBlowup";
    case ErrorCode::ConvergedToRelativeEquilibrium: return "ConvergedToRelativeEquilibrium";
    case ErrorCode::InvalidPerturbation: return "InvalidPerturbation";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Mat canonical_omega(int dim) {
  const int n = dim / 2;
  Mat omega = Mat::Zero(dim, dim);
  omega.topRightCorner(n, n) = Mat::Identity(n, n);
  omega.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return omega;
}

Mat orthonormal_basis(const Mat& cols, double rel_tol) {
  if (cols.cols() == 0 || cols.rows() == 0) return Mat(cols.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(cols, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return Mat(cols.rows(), 0);
  int rank = 0;
  while (rank < s.size() && s(rank) > rel_tol * s(0)) ++rank;
  return svd.matrixU().leftCols(rank);
}

Mat null_space(const Mat& m, double rel_tol) {
  const int n = static_cast<int>(m.cols());
  if (m.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = rel_tol * std::max(1.0, s.size() ? s(0) : 0.0);
  int rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

Mat complement_in(const Mat& ambient, const Mat& cols, double rel_tol) {
  if (cols.cols() == 0) return ambient;
  // coordinates of cols inside the ambient basis, then the kernel of their transpose
  Mat coords = ambient.transpose() * cols;
  Mat ker = null_space(coords.transpose(), rel_tol);
  return ambient * ker;
}

Mat symmetric_part(const Mat& m) { return 0.5 * (m + m.transpose()); }

Mat expm(const Mat& m) { return m.exp(); }

double inverse_condition(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

double spectral_radius(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Mat> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double stdev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

}  // namespace relmode
