#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace relmode {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Block form [[0, I], [-I, 0]] in (q, p) ordering.
Mat canonical_omega(int dim);

/// Orthonormal basis for the column span of `cols`; columns with singular value
/// below `rel_tol * sigma_max` are dropped.
Mat orthonormal_basis(const Mat& cols, double rel_tol = 1e-10);

/// Orthonormal basis of ker(m). Singular values below `rel_tol * max(1, sigma_max)`
/// count as zero.
Mat null_space(const Mat& m, double rel_tol = 1e-10);

/// Orthonormal basis of the orthogonal complement of span(cols) inside span(ambient).
/// Both inputs must have orthonormal columns in the same parent space.
Mat complement_in(const Mat& ambient, const Mat& cols, double rel_tol = 1e-10);

Mat symmetric_part(const Mat& m);

/// Matrix exponential (Pade via Eigen's MatrixFunctions).
Mat expm(const Mat& m);

/// Smallest singular value divided by the largest; 0 for empty/zero input.
double inverse_condition(const Mat& m);

double spectral_radius(const Mat& m);

/// Sample standard deviation.
double stdev(const std::vector<double>& xs);

}  // namespace relmode
