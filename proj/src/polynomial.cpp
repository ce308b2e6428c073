#include "relmode/polynomial.hpp"

#include <cmath>

#include "relmode/errors.hpp"

namespace relmode {

namespace {

void enumerate(int nvars, int degree, std::vector<int>& cur, int pos, std::vector<std::vector<int>>& out) {
  if (pos == nvars - 1) {
    cur[pos] = degree;
    out.push_back(cur);
    return;
  }
  for (int e = degree; e >= 0; --e) {
    cur[pos] = e;
    enumerate(nvars, degree - e, cur, pos + 1, out);
  }
}

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

}  // namespace

int monomial_count(int nvars, int degree) {
  // C(n + d - 1, d)
  double c = 1.0;
  for (int i = 1; i <= degree; ++i) c = c * (nvars - 1 + i) / i;
  return static_cast<int>(std::lround(c));
}

HomogeneousPolynomial::HomogeneousPolynomial(int nvars, int degree) : nvars_(nvars), degree_(degree) {
  if (nvars > 0) {
    std::vector<int> cur(nvars, 0);
    enumerate(nvars, degree, cur, 0, exponents_);
  }
  coeffs_ = Vec::Zero(static_cast<int>(exponents_.size()));
}

HomogeneousPolynomial HomogeneousPolynomial::fit(int nvars, int degree, const std::vector<Vec>& points,
                                                 const std::vector<double>& values) {
  HomogeneousPolynomial p(nvars, degree);
  const int m = static_cast<int>(points.size());
  if (m < p.size()) throw Error(ErrorCode::InvalidParameter, "too few samples for polynomial fit");
  Mat a(m, p.size());
  Vec b(m);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < p.size(); ++k) {
      double t = 1.0;
      for (int j = 0; j < nvars; ++j) t *= ipow(points[i](j), p.exponents_[k][j]);
      a(i, k) = t;
    }
    b(i) = values[i];
  }
  p.coeffs_ = a.colPivHouseholderQr().solve(b);
  p.fit_residual_ = (a * p.coeffs_ - b).norm() / std::max(b.norm(), 1e-300);
  return p;
}

double HomogeneousPolynomial::operator()(const Vec& u) const {
  double s = 0.0;
  for (int k = 0; k < size(); ++k) {
    double t = coeffs_(k);
    for (int j = 0; j < nvars_; ++j) t *= ipow(u(j), exponents_[k][j]);
    s += t;
  }
  return s;
}

Vec HomogeneousPolynomial::gradient(const Vec& u) const {
  Vec g = Vec::Zero(nvars_);
  for (int k = 0; k < size(); ++k) {
    const auto& e = exponents_[k];
    for (int i = 0; i < nvars_; ++i) {
      if (e[i] == 0) continue;
      double t = coeffs_(k) * e[i];
      for (int j = 0; j < nvars_; ++j) t *= ipow(u(j), j == i ? e[j] - 1 : e[j]);
      g(i) += t;
    }
  }
  return g;
}

Mat HomogeneousPolynomial::hessian(const Vec& u) const {
  Mat h = Mat::Zero(nvars_, nvars_);
  for (int k = 0; k < size(); ++k) {
    const auto& e = exponents_[k];
    for (int a = 0; a < nvars_; ++a) {
      if (e[a] == 0) continue;
      for (int b = a; b < nvars_; ++b) {
        std::vector<int> f = e;
        double t = coeffs_(k) * f[a];
        --f[a];
        if (f[b] == 0) continue;
        t *= f[b];
        --f[b];
        for (int j = 0; j < nvars_; ++j) t *= ipow(u(j), f[j]);
        h(a, b) += t;
        if (a != b) h(b, a) += t;
      }
    }
  }
  return h;
}

}  // namespace relmode
