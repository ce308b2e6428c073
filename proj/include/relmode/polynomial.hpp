#pragma once

#include <vector>

#include "relmode/linalg.hpp"

namespace relmode {

/// Homogeneous polynomial of fixed degree, sum_a c_a u^a over all exponent vectors |a| = degree.
class HomogeneousPolynomial {
 public:
  HomogeneousPolynomial() = default;
  HomogeneousPolynomial(int nvars, int degree);

  /// Least-squares fit to samples; needs at least as many points as monomials.
  static HomogeneousPolynomial fit(int nvars, int degree, const std::vector<Vec>& points,
                                   const std::vector<double>& values);

  int nvars() const { return nvars_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  const std::vector<std::vector<int>>& exponents() const { return exponents_; }
  Vec& coefficients() { return coeffs_; }
  const Vec& coefficients() const { return coeffs_; }
  double fit_residual() const { return fit_residual_; }

  double operator()(const Vec& u) const;
  Vec gradient(const Vec& u) const;
  Mat hessian(const Vec& u) const;

 private:
  int nvars_ = 0;
  int degree_ = 0;
  std::vector<std::vector<int>> exponents_;
  Vec coeffs_;
  double fit_residual_ = 0.0;
};

/// Number of monomials of the given degree in n variables.
int monomial_count(int nvars, int degree);

}  // namespace relmode
