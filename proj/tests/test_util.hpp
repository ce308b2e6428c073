#pragma once

#include <doctest.h>

#include <random>

#include "relmode/errors.hpp"
#include "relmode/linalg.hpp"
#include "relmode/symplectic.hpp"

namespace testutil {

using relmode::Mat;
using relmode::Vec;

/// A = Omega^{-1} S for a random symmetric S, so Omega A is symmetric.
inline Mat random_hamiltonian(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat s(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) s(i, j) = n(rng);
  s = 0.5 * (s + s.transpose()).eval();
  return relmode::canonical_omega(dim).inverse() * s;
}

inline Vec random_vec(int dim, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = n(rng);
  return v;
}

/// Oscillators with the given frequencies in (q, p) ordering: X = (w p, -w q).
inline Mat oscillator_matrix(const std::vector<double>& w) {
  const int n = static_cast<int>(w.size());
  Mat a = Mat::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    a(i, n + i) = w[i];
    a(n + i, i) = -w[i];
  }
  return a;
}

inline Mat from_rows(const std::vector<std::vector<double>>& rows) {
  Mat m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

/// Runs f and checks that it throws relmode::Error with the given code.
template <class F>
void expect_code(F&& f, relmode::ErrorCode code) {
  try {
    f();
    FAIL("expected " << relmode::to_string(code));
  } catch (const relmode::Error& e) {
    CHECK(e.code() == code);
  }
}

/// Least-squares generator coefficients xi with X_h(m) = xi m.
template <class Model>
Vec velocity_of(const Model& model, const Vec& m) {
  const Mat t = model.action().orbit_tangent(m);
  return t.completeOrthogonalDecomposition().solve(model.vector_field(m));
}

}  // namespace testutil
