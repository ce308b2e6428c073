#include "relmode/models.hpp"

#include <cmath>

#include "relmode/errors.hpp"

namespace relmode {

namespace {

// Value and partial derivatives of sum coef * prod s_i^p_i.
struct InvariantPoly {
  std::vector<PolyTerm> terms;
  int nvars = 0;

  double value(const std::vector<double>& s) const {
    double total = 0.0;
    for (const auto& t : terms) {
      double x = t.coef;
      for (int i = 0; i < nvars; ++i) x *= std::pow(s[i], t.powers[i]);
      total += x;
    }
    return total;
  }

  std::vector<double> partials(const std::vector<double>& s) const {
    std::vector<double> d(nvars, 0.0);
    for (const auto& t : terms) {
      for (int i = 0; i < nvars; ++i) {
        if (t.powers[i] == 0) continue;
        double x = t.coef * t.powers[i];
        for (int j = 0; j < nvars; ++j) x *= std::pow(s[j], j == i ? t.powers[j] - 1 : t.powers[j]);
        d[i] += x;
      }
    }
    return d;
  }
};

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorCode::InvalidParameter, std::string(name) + " must be positive");
}

// weights[i] is the state degree of variable i; every term must reach min_degree.
InvariantPoly checked_poly(const std::vector<PolyTerm>& terms, const std::vector<int>& weights, int min_degree,
                           const char* what) {
  InvariantPoly p{terms, static_cast<int>(weights.size())};
  for (const auto& t : terms) {
    if (t.powers.size() != weights.size()) {
      throw Error(ErrorCode::InvalidPerturbation, std::string(what) + " term needs " +
                                                      std::to_string(weights.size()) + " exponents");
    }
    int degree = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (t.powers[i] < 0) throw Error(ErrorCode::InvalidPerturbation, "negative exponent");
      degree += weights[i] * t.powers[i];
    }
    if (degree < min_degree) {
      throw Error(ErrorCode::InvalidPerturbation,
                  std::string(what) + " term of state degree " + std::to_string(degree) + " < " +
                      std::to_string(min_degree));
    }
  }
  return p;
}

std::map<std::string, double> poly_params(const std::string& prefix, const std::vector<PolyTerm>& terms) {
  std::map<std::string, double> out;
  for (const auto& t : terms) {
    std::string key = prefix + "[";
    for (std::size_t i = 0; i < t.powers.size(); ++i) key += (i ? "," : "") + std::to_string(t.powers[i]);
    out[key + "]"] = t.coef;
  }
  return out;
}

// diag(R, R) rotating (q_a, q_b) and (p_a, p_b) with n degrees of freedom.
Mat plane_rotation(int n, int a, int b) {
  Mat x = Mat::Zero(2 * n, 2 * n);
  x(a, b) = -1.0;
  x(b, a) = 1.0;
  x(n + a, n + b) = -1.0;
  x(n + b, n + a) = 1.0;
  return x;
}

}  // namespace

EquivariantHamiltonianModel spherical_pendulum(const PendulumParams& p) {
  require_positive(p.m, "m");
  require_positive(p.l, "l");
  require_positive(p.g, "g");
  // (x^2+y^2, px^2+py^2, x px + y py) have state degrees 2, 2, 2
  const InvariantPoly phi = checked_poly(p.phi, {1, 1, 1}, 2, "phi");
  const double m = p.m, l = p.l, g = p.g;
  auto h = [=](const Vec& v) {
    const double s1 = v(0) * v(0) + v(1) * v(1);
    const double s2 = v(2) * v(2) + v(3) * v(3);
    const double s3 = v(0) * v(2) + v(1) * v(3);
    return s2 / (2.0 * m) - s3 * s3 / (2.0 * m * l * l) - m * g * std::sqrt(l * l - s1) + m * g * l +
           phi.value({s1, s2, s3});
  };
  auto grad = [=](const Vec& v) {
    const double x = v(0), y = v(1), px = v(2), py = v(3);
    const double s1 = x * x + y * y, s2 = px * px + py * py, s3 = x * px + y * py;
    const auto d = phi.partials({s1, s2, s3});
    const double root = std::sqrt(l * l - s1);
    const double kq = m * g / root + 2.0 * d[0];
    const double kp = 1.0 / m + 2.0 * d[1];
    const double cross = -s3 / (m * l * l) + d[2];
    Vec out(4);
    out << kq * x + cross * px, kq * y + cross * py, kp * px + cross * x, kp * py + cross * y;
    return out;
  };
  auto domain = [l](const Vec& v) { return v(0) * v(0) + v(1) * v(1) < 0.98 * l * l; };
  ModelSpec spec{"spherical_pendulum", {{"m", m}, {"l", l}, {"g", g}}, {}};
  for (const auto& [k, c] : poly_params("phi", p.phi)) spec.params[k] = c;
  spec.notes.push_back("phi variables: (x^2+y^2, px^2+py^2, x px + y py)");
  LinearAction action(GroupDescriptor::circle(), {plane_rotation(2, 0, 1)});
  EquivariantHamiltonianModel model(spec, SymplecticSpace::canonical(4), action, h, grad, {}, domain);
  model.labels = {"x", "y", "px", "py"};
  return model;
}

double spring_frequency(const SpringParams& p) { return std::sqrt(p.k); }

EquivariantHamiltonianModel spring_pendulum_3d(const SpringParams& p) {
  require_positive(p.m, "m");
  require_positive(p.l, "l");
  require_positive(p.g, "g");
  require_positive(p.k, "k");
  // (x^2+y^2, px^2+py^2, zeta, pz) have state degrees 2, 2, 1, 1
  const InvariantPoly sigma = checked_poly(p.sigma, {2, 2, 1, 1}, 3, "sigma");
  const double k = p.k;
  const double z_star = p.l + p.g * p.m / p.k;
  {
    // literal gradient of 1/2|p|^2 - m g z + k/2 (x^2+y^2+(z-l)^2) at (0, 0, z*, 0, 0, 0)
    const double dz = -p.m * p.g + p.k * (z_star - p.l);
    if (std::abs(dz) > 1e-10 * std::max(1.0, p.m * p.g)) {
      throw Error(ErrorCode::InvalidParameter, "spring equilibrium check failed");
    }
  }
  // In deviation coordinates the linear terms cancel: h = 1/2|p|^2 + k/2 (x^2+y^2+zeta^2) + sigma_h.
  auto h = [=](const Vec& v) {
    const double s1 = v(0) * v(0) + v(1) * v(1);
    const double s2 = v(3) * v(3) + v(4) * v(4);
    return 0.5 * (s2 + v(5) * v(5)) + 0.5 * k * (s1 + v(2) * v(2)) + sigma.value({s1, s2, v(2), v(5)});
  };
  auto grad = [=](const Vec& v) {
    const double s1 = v(0) * v(0) + v(1) * v(1);
    const double s2 = v(3) * v(3) + v(4) * v(4);
    const auto d = sigma.partials({s1, s2, v(2), v(5)});
    Vec out(6);
    out << (k + 2.0 * d[0]) * v(0), (k + 2.0 * d[0]) * v(1), k * v(2) + d[2], (1.0 + 2.0 * d[1]) * v(3),
        (1.0 + 2.0 * d[1]) * v(4), v(5) + d[3];
    return out;
  };
  ModelSpec spec{"spring_pendulum_3d", {{"m", p.m}, {"l", p.l}, {"g", p.g}, {"k", p.k}}, {}};
  for (const auto& [key, c] : poly_params("sigma", p.sigma)) spec.params[key] = c;
  spec.notes.push_back("sigma variables: (x^2+y^2, px^2+py^2, zeta, pz), zeta = z - (l + g m / k)");
  spec.notes.push_back("linear frequency sqrt(k) in all three directions");
  LinearAction action(GroupDescriptor::circle(), {plane_rotation(3, 0, 1)});
  EquivariantHamiltonianModel model(spec, SymplecticSpace::canonical(6), action, h, grad);
  model.equilibrium = Vec::Zero(6);
  model.equilibrium(2) = z_star;
  model.labels = {"x", "y", "zeta", "px", "py", "pz"};
  return model;
}

EquivariantHamiltonianModel so3_isotropic(const So3Params& p) {
  require_positive(p.a, "a");
  require_positive(p.b, "b");
  const InvariantPoly f = checked_poly(p.f, {1, 1, 1}, 2, "f");
  const double a = p.a, b = p.b;
  auto h = [=](const Vec& v) {
    const Vec q = v.head(3), mom = v.tail(3);
    const double pp = mom.squaredNorm(), qq = q.squaredNorm(), qp = q.dot(mom);
    return a * pp + b * qq + f.value({pp, qq, qp});
  };
  auto grad = [=](const Vec& v) {
    const Vec q = v.head(3), mom = v.tail(3);
    const auto d = f.partials({mom.squaredNorm(), q.squaredNorm(), q.dot(mom)});
    Vec out(6);
    out.head(3) = (2.0 * b + 2.0 * d[1]) * q + d[2] * mom;
    out.tail(3) = (2.0 * a + 2.0 * d[0]) * mom + d[2] * q;
    return out;
  };
  ModelSpec spec{"so3_isotropic", {{"a", a}, {"b", b}}, {}};
  for (const auto& [key, c] : poly_params("f", p.f)) spec.params[key] = c;
  spec.notes.push_back("f variables: (|p|^2, |q|^2, q.p)");
  // xi_i = diag(E_i, E_i) with E_i the cross-product matrix of e_i
  std::vector<Mat> gens;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    Mat x = Mat::Zero(6, 6);
    x(k, j) = 1.0;
    x(j, k) = -1.0;
    x(3 + k, 3 + j) = 1.0;
    x(3 + j, 3 + k) = -1.0;
    gens.push_back(x);
  }
  LinearAction action(GroupDescriptor::so3(), gens);
  EquivariantHamiltonianModel model(spec, SymplecticSpace::canonical(6), action, h, grad);
  model.labels = {"q1", "q2", "q3", "p1", "p2", "p3"};
  return model;
}

EquivariantHamiltonianModel harmonic_fixture(const HarmonicParams& p) {
  const int n = static_cast<int>(p.frequencies.size());
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "at least one frequency required");
  for (double w : p.frequencies) require_positive(w, "frequency");
  const std::vector<double> w = p.frequencies;
  const double kappa = p.coupling;
  const bool rotation = p.group == "rotation";
  if (rotation && (n != 2 || std::abs(w[0] - w[1]) > 1e-14)) {
    throw Error(ErrorCode::InvalidParameter, "rotation group needs two equal frequencies");
  }
  // trivial/torus: kappa sum_{i<j} I_i I_j; rotation: kappa (q.p)^2
  auto h = [=](const Vec& v) {
    double s = 0.0;
    std::vector<double> actions(n);
    for (int i = 0; i < n; ++i) {
      actions[i] = 0.5 * (v(i) * v(i) + v(n + i) * v(n + i));
      s += w[i] * actions[i];
    }
    if (rotation) {
      const double qp = v.head(n).dot(v.tail(n));
      return s + kappa * qp * qp;
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += kappa * actions[i] * actions[j];
    return s;
  };
  auto grad = [=](const Vec& v) {
    Vec g(2 * n);
    if (rotation) {
      const double qp = v.head(n).dot(v.tail(n));
      for (int i = 0; i < n; ++i) {
        g(i) = w[i] * v(i) + 2.0 * kappa * qp * v(n + i);
        g(n + i) = w[i] * v(n + i) + 2.0 * kappa * qp * v(i);
      }
      return g;
    }
    std::vector<double> actions(n);
    for (int i = 0; i < n; ++i) actions[i] = 0.5 * (v(i) * v(i) + v(n + i) * v(n + i));
    for (int i = 0; i < n; ++i) {
      double coef = w[i];
      for (int j = 0; j < n; ++j) if (j != i) coef += kappa * actions[j];
      g(i) = coef * v(i);
      g(n + i) = coef * v(n + i);
    }
    return g;
  };
  ModelSpec spec{"harmonic_fixture", {{"coupling", kappa}}, {"group: " + p.group}};
  for (int i = 0; i < n; ++i) spec.params["frequency[" + std::to_string(i) + "]"] = w[i];
  std::vector<Mat> gens;
  GroupDescriptor group = GroupDescriptor::trivial();
  if (p.group == "torus") {
    group = GroupDescriptor::torus(n);
    for (int i = 0; i < n; ++i) {
      // X_{I_i}: (q_i, p_i) -> (p_i, -q_i)
      Mat x = Mat::Zero(2 * n, 2 * n);
      x(i, n + i) = 1.0;
      x(n + i, i) = -1.0;
      gens.push_back(x);
    }
  } else if (rotation) {
    group = GroupDescriptor::circle();
    gens.push_back(plane_rotation(2, 0, 1));
  } else if (p.group != "trivial") {
    throw Error(ErrorCode::InvalidParameter, "unknown fixture group '" + p.group + "'");
  }
  LinearAction action(group, gens);
  EquivariantHamiltonianModel model(spec, SymplecticSpace::canonical(2 * n), action, h, grad);
  for (int i = 0; i < n; ++i) model.labels.push_back("q" + std::to_string(i + 1));
  for (int i = 0; i < n; ++i) model.labels.push_back("p" + std::to_string(i + 1));
  return model;
}

std::vector<ModelInfo> list_models() {
  return {
      {"spherical_pendulum", "Spherical pendulum with an S^1-invariant perturbation phi", "circle", 4},
      {"spring_pendulum_3d", "Three-dimensional spring pendulum, rotations about the vertical axis", "circle", 6},
      {"so3_isotropic", "Isotropic oscillator a|p|^2 + b|q|^2 + f with diagonal SO(3) symmetry", "so3", 6},
      {"harmonic_fixture", "Decoupled oscillators with optional quartic coupling (test fixture)",
       "trivial|torus|rotation", 0},
  };
}

}  // namespace relmode
