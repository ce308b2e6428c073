#pragma once

#include <functional>
#include <string>
#include <vector>

#include "relmode/linalg.hpp"

namespace relmode {

enum class Scheme {
  symplectic_implicit_order4,  // 3-stage Gauss-Legendre (order 6), fixed step
  adaptive_explicit_order5,    // Dormand-Prince 5(4), error-controlled
};

std::string to_string(Scheme scheme);

struct IntegratorConfig {
  Scheme scheme = Scheme::symplectic_implicit_order4;
  double step = 1e-2;   // fixed step (symplectic scheme)
  double rtol = 1e-12;  // adaptive scheme
  double atol = 1e-15;
  long max_steps = 5'000'000;
  /// Throws InvalidParameter on non-positive step or tolerances.
  void validate() const;
};

struct IntegrationStats {
  long steps = 0;
  long rejected = 0;
};

using Field = std::function<Vec(const Vec&)>;
using DomainFn = std::function<bool(const Vec&)>;

/// State at time T (T may be negative). Throws StepLimitExceeded or NonFiniteState.
Vec integrate(const Field& f, const Vec& v0, double T, const IntegratorConfig& cfg,
              IntegrationStats* stats = nullptr, const DomainFn& domain = {});

/// States at times T*i/intervals, i = 0..intervals.
std::vector<Vec> integrate_sampled(const Field& f, const Vec& v0, double T, int intervals,
                                   const IntegratorConfig& cfg, IntegrationStats* stats = nullptr,
                                   const DomainFn& domain = {});

}  // namespace relmode
