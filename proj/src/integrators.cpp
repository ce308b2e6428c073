#include "relmode/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "relmode/errors.hpp"

namespace relmode {

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::symplectic_implicit_order4: return "symplectic_implicit_order4";
    case Scheme::adaptive_explicit_order5: return "adaptive_explicit_order5";
  }
  return "unknown";
}

void IntegratorConfig::validate() const {
  if (!(step > 0.0) || !(rtol > 0.0) || !(atol > 0.0) || max_steps <= 0) {
    throw Error(ErrorCode::InvalidParameter, "integrator step, tolerances and max_steps must be positive");
  }
}

namespace {

void check_finite(const Vec& v) {
  if (!v.allFinite()) throw Error(ErrorCode::NonFiniteState, "state became non-finite");
}

// Gauss-Legendre 3-stage collocation.
struct Gauss3 {
  double a[3][3];
  double b[3] = {5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0};
  double c[3];
  Gauss3() {
    const double s = std::sqrt(15.0);
    c[0] = 0.5 - s / 10.0;
    c[1] = 0.5;
    c[2] = 0.5 + s / 10.0;
    const double rows[3][3] = {{5.0 / 36.0, 2.0 / 9.0 - s / 15.0, 5.0 / 36.0 - s / 30.0},
                               {5.0 / 36.0 + s / 24.0, 2.0 / 9.0, 5.0 / 36.0 - s / 24.0},
                               {5.0 / 36.0 + s / 30.0, 2.0 / 9.0 + s / 15.0, 5.0 / 36.0}};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a[i][j] = rows[i][j];
  }
};

class GaussStepper {
 public:
  explicit GaussStepper(const Field& f) : f_(f) {}

  // One step y -> y + dy, returned as the increment so the caller can sum compensated.
  Vec increment(const Vec& y, double h) {
    Vec k[3];
    const Vec f0 = f_(y);
    for (int i = 0; i < 3; ++i) k[i] = f0;
    double prev = INFINITY;
    for (int it = 0; it < 100; ++it) {
      Vec next[3];
      double change = 0.0;
      for (int i = 0; i < 3; ++i) {
        Vec z = y;
        for (int j = 0; j < 3; ++j) z.noalias() += (h * tab_.a[i][j]) * k[j];
        next[i] = f_(z);
        change = std::max(change, (next[i] - k[i]).lpNorm<Eigen::Infinity>());
      }
      for (int i = 0; i < 3; ++i) k[i] = std::move(next[i]);
      const double scale = std::max(k[0].lpNorm<Eigen::Infinity>(), 1e-300);
      if (change <= 1e-15 * scale) break;
      // Stalled at round-off level.
      if (it > 4 && change >= prev && change <= 1e-12 * scale) break;
      prev = change;
    }
    Vec dy = Vec::Zero(y.size());
    for (int i = 0; i < 3; ++i) dy.noalias() += (h * tab_.b[i]) * k[i];
    return dy;
  }

 private:
  const Field& f_;
  Gauss3 tab_;
};

struct SegmentRunner {
  const Field& f;
  const IntegratorConfig& cfg;
  IntegrationStats& stats;
  const DomainFn& domain;
  double adaptive_dt = 0.0;

  // Advances v over a time span L (L >= 0, field already oriented).
  void run(Vec& v, double L) {
    if (L <= 0.0) return;
    if (cfg.scheme == Scheme::symplectic_implicit_order4) {
      run_gauss(v, L);
    } else {
      run_dopri(v, L);
    }
  }

  void run_gauss(Vec& v, double L) {
    const long n = std::max<long>(1, static_cast<long>(std::ceil(L / cfg.step - 1e-9)));
    const double h = L / static_cast<double>(n);
    GaussStepper stepper(f);
    Vec comp = Vec::Zero(v.size());  // Kahan compensation
    for (long s = 0; s < n; ++s) {
      if (++stats.steps > cfg.max_steps) throw Error(ErrorCode::StepLimitExceeded, "fixed-step budget exhausted");
      const Vec dy = stepper.increment(v, h) - comp;
      const Vec t = v + dy;
      comp = (t - v) - dy;
      v = t;
      check_finite(v);
      if (domain && !domain(v)) throw Error(ErrorCode::NonFiniteState, "trajectory left the model domain");
    }
  }

  void run_dopri(Vec& v, double L) {
    namespace odeint = boost::numeric::odeint;
    using State = std::vector<double>;
    const int n = static_cast<int>(v.size());
    auto system = [this, n](const State& x, State& dxdt, double) {
      const Vec dx = f(Eigen::Map<const Vec>(x.data(), n));
      dxdt.assign(dx.data(), dx.data() + n);
    };
    auto stepper = odeint::make_controlled(cfg.atol, cfg.rtol, odeint::runge_kutta_dopri5<State>());
    State x(v.data(), v.data() + n);
    double t = 0.0;
    double dt = adaptive_dt > 0.0 ? adaptive_dt : std::min(L, 1e-3);
    while (t < L) {
      if (stats.steps + stats.rejected > cfg.max_steps) {
        throw Error(ErrorCode::StepLimitExceeded, "adaptive step budget exhausted");
      }
      const bool last = t + dt >= L;
      double trial = last ? L - t : dt;
      const State saved = x;
      const double t_saved = t;
      const auto result = stepper.try_step(system, x, t, trial);
      if (result == odeint::success) {
        Eigen::Map<const Vec> xm(x.data(), n);
        if (!xm.allFinite()) throw Error(ErrorCode::NonFiniteState, "state became non-finite");
        if (domain && !domain(Vec(xm))) {
          x = saved;
          t = t_saved;
          dt = 0.5 * (last ? L - t : dt);
          stepper.reset();
          ++stats.rejected;
          if (dt < 1e-14 * L) throw Error(ErrorCode::NonFiniteState, "trajectory left the model domain");
          continue;
        }
        ++stats.steps;
        if (last) t = L;  // snap
        if (!last || trial > dt) dt = trial;
      } else {
        ++stats.rejected;
        dt = trial;
        if (!(dt > 0.0)) throw Error(ErrorCode::NonFiniteState, "step size underflow");
      }
    }
    adaptive_dt = dt;
    v = Eigen::Map<const Vec>(x.data(), n);
  }
};

Field oriented(const Field& f, double T) {
  if (T >= 0.0) return f;
  return [&f](const Vec& v) { return Vec(-f(v)); };
}

}  // namespace

Vec integrate(const Field& f, const Vec& v0, double T, const IntegratorConfig& cfg, IntegrationStats* stats,
              const DomainFn& domain) {
  cfg.validate();
  IntegrationStats local;
  const Field g = oriented(f, T);
  SegmentRunner runner{g, cfg, stats ? *stats : local, domain};
  Vec v = v0;
  check_finite(v);
  runner.run(v, std::abs(T));
  return v;
}

std::vector<Vec> integrate_sampled(const Field& f, const Vec& v0, double T, int intervals,
                                   const IntegratorConfig& cfg, IntegrationStats* stats, const DomainFn& domain) {
  cfg.validate();
  intervals = std::max(1, intervals);
  IntegrationStats local;
  const Field g = oriented(f, T);
  SegmentRunner runner{g, cfg, stats ? *stats : local, domain};
  std::vector<Vec> out;
  out.reserve(intervals + 1);
  Vec v = v0;
  check_finite(v);
  out.push_back(v);
  const double seg = std::abs(T) / intervals;
  for (int i = 0; i < intervals; ++i) {
    runner.run(v, seg);
    out.push_back(v);
  }
  return out;
}

}  // namespace relmode
