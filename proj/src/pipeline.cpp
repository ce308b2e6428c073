#include "relmode/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include <omp.h>

#include "relmode/errors.hpp"
#include "relmode/estimates.hpp"
#include "relmode/models.hpp"
#include "relmode/rpo_search.hpp"

namespace relmode {

using nlohmann::json;

namespace {

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec to_vec(const std::vector<double>& x) {
  Vec v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) v(static_cast<Eigen::Index>(i)) = x[i];
  return v;
}

// 1-based line of the first occurrence of "key" in the source, 0 when unknown.
int line_of_key(const std::string& text, const std::string& key) {
  if (text.empty() || key.empty()) return 0;
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

[[noreturn]] void config_error(const std::string& text, const std::string& key, const std::string& msg) {
  const int line = line_of_key(text, key);
  std::string where = line > 0 ? "line " + std::to_string(line) + ": " : std::string();
  throw Error(ErrorCode::ConfigError, where + (key.empty() ? "" : "'" + key + "': ") + msg);
}

std::string normalize_name(std::string name) {
  std::replace(name.begin(), name.end(), '-', '_');
  return name;
}

double get_number(const json& j, const std::string& key, const std::string& text) {
  if (!j.is_number()) config_error(text, key, "expected a number");
  return j.get<double>();
}

std::vector<PolyTerm> get_terms(const json& j, const std::string& key, const std::string& text) {
  if (!j.is_array()) config_error(text, key, "expected a list of {\"powers\": [...], \"coef\": x}");
  std::vector<PolyTerm> terms;
  for (const auto& t : j) {
    if (!t.is_object() || !t.contains("powers") || !t.contains("coef") || !t["powers"].is_array() ||
        !t["coef"].is_number()) {
      config_error(text, key, "every term needs integer \"powers\" and numeric \"coef\"");
    }
    PolyTerm term;
    for (const auto& p : t["powers"]) {
      if (!p.is_number_integer()) config_error(text, key, "powers must be integers");
      term.powers.push_back(p.get<int>());
    }
    term.coef = t["coef"].get<double>();
    terms.push_back(std::move(term));
  }
  return terms;
}

void reject_unknown(const json& params, const std::set<std::string>& allowed, const std::string& text) {
  for (const auto& [k, _] : params.items()) {
    if (!allowed.contains(k)) config_error(text, k, "unknown parameter");
  }
}

EquivariantHamiltonianModel build_model_impl(const std::string& raw_name, const json& params, const std::string& text) {
  const std::string name = normalize_name(raw_name);
  if (!params.is_object()) config_error(text, "params", "expected an object");
  auto num = [&](const char* key, double& dst) {
    if (params.contains(key)) dst = get_number(params[key], key, text);
  };
  if (name == "spherical_pendulum") {
    reject_unknown(params, {"m", "l", "g", "phi"}, text);
    PendulumParams p;
    num("m", p.m);
    num("l", p.l);
    num("g", p.g);
    if (params.contains("phi")) p.phi = get_terms(params["phi"], "phi", text);
    return spherical_pendulum(p);
  }
  if (name == "spring_pendulum_3d") {
    reject_unknown(params, {"m", "l", "g", "k", "sigma", "linear"}, text);
    SpringParams p;
    num("m", p.m);
    num("l", p.l);
    num("g", p.g);
    num("k", p.k);
    if (params.contains("sigma")) p.sigma = get_terms(params["sigma"], "sigma", text);
    if (params.contains("linear")) {
      if (!params["linear"].is_boolean()) config_error(text, "linear", "expected a boolean");
      if (params["linear"].get<bool>()) p.sigma.clear();
    }
    return spring_pendulum_3d(p);
  }
  if (name == "so3_isotropic") {
    reject_unknown(params, {"a", "b", "f"}, text);
    So3Params p;
    num("a", p.a);
    num("b", p.b);
    if (params.contains("f")) p.f = get_terms(params["f"], "f", text);
    return so3_isotropic(p);
  }
  if (name == "harmonic_fixture") {
    reject_unknown(params, {"frequencies", "coupling", "group"}, text);
    HarmonicParams p;
    if (params.contains("frequencies")) {
      if (!params["frequencies"].is_array()) config_error(text, "frequencies", "expected a list of numbers");
      p.frequencies.clear();
      for (const auto& w : params["frequencies"]) p.frequencies.push_back(get_number(w, "frequencies", text));
    }
    num("coupling", p.coupling);
    if (params.contains("group")) {
      if (!params["group"].is_string()) config_error(text, "group", "expected a string");
      p.group = params["group"].get<std::string>();
    }
    return harmonic_fixture(p);
  }
  throw Error(ErrorCode::UnknownModel, "'" + raw_name + "'; see list-models");
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json model_json(const EquivariantHamiltonianModel& model) {
  json params = json::object();
  for (const auto& [k, v] : model.spec().params) params[k] = v;
  return {{"name", model.name()},
          {"params", params},
          {"notes", model.spec().notes},
          {"group", to_string(model.action().group().kind())},
          {"group_dim", model.action().group().dim()},
          {"dim", model.dim()},
          {"labels", model.labels},
          {"equilibrium", vec_json(model.equilibrium)}};
}

json certificate_json(const RpoCertificate& c) {
  return {{"m", vec_json(c.m)},
          {"tau", c.tau},
          {"xi", vec_json(c.xi)},
          {"residual", c.residual},
          {"residual_check", c.residual_check},
          {"relative_residual", c.scale > 0.0 ? c.residual / c.scale : c.residual},
          {"scale", c.scale},
          {"energy", c.energy},
          {"momentum", vec_json(c.momentum)},
          {"energy_drift", c.energy_drift},
          {"witness", c.witness},
          {"iterations", c.iterations},
          {"isotropy", c.isotropy},
          {"provenance", c.provenance}};
}

json estimate_json(const RpoEstimate& e) {
  json j = {{"theorem", to_string(e.theorem)},
            {"isotropy", e.isotropy},
            {"momentum", e.momentum},
            {"dimensional_bound", e.dimensional_bound},
            {"reduced_space_dim", e.reduced_space_dim},
            {"branch", e.branch},
            {"warnings", e.warnings}};
  j["euler_bound"] = e.euler_bound ? json(*e.euler_bound) : json(nullptr);
  return j;
}

std::string error_status(const Error& e) { return "failed: " + std::string(e.what()); }

constexpr const char* kH2Radial =
    "failed: does not satisfy hypothesis (H2): the averaged Hamiltonian is radial, so the whole level set is critical";

// Everything computed once per analysis before the per-cell searches.
struct Linearization {
  LinearHamiltonianMap lh;
  ResonanceSpace u;
  Mat circle_generator;
  std::vector<IsotropyDatum> table;
  json spectrum;
  json resonance;
  json krein;
};

Linearization linearize(const EquivariantHamiltonianModel& model, const std::optional<double>& nu0_opt,
                        std::vector<std::string>& warnings) {
  const int n = model.dim();
  const Vec zero = Vec::Zero(n);
  const double gnorm = model.grad_h(zero).norm();
  if (gnorm > 1e-8) {
    throw Error(ErrorCode::NotRelativeEquilibrium, "origin is not an equilibrium, |dh(0)| = " + std::to_string(gnorm));
  }
  const Mat a = model.space().hamiltonian_matrix(model.hess_h(zero));
  Linearization L{jordan_chevalley(a, model.space()), {}, {}, {}, {}, {}, {}};
  const auto& lh = L.lh;

  const Eigen::EigenSolver<Mat> es(a);
  json eig = json::array();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    eig.push_back({es.eigenvalues()(i).real(), es.eigenvalues()(i).imag()});
  json clusters = json::array();
  for (const auto& c : lh.clusters)
    clusters.push_back({{"re", c.value.real()}, {"im", c.value.imag()}, {"multiplicity", c.multiplicity}});
  Mat nil_pow = Mat::Identity(n, n);
  for (int i = 0; i < n; ++i) nil_pow = nil_pow * lh.nilpotent;
  const auto freqs = imaginary_frequencies(lh);
  L.spectrum = {{"eigenvalues", eig},
                {"clusters", clusters},
                {"cluster_tolerance", lh.cluster_tolerance},
                {"frequencies", freqs},
                {"jordan_chevalley",
                 {{"sum_defect", (lh.semisimple + lh.nilpotent - a).norm()},
                  {"commutator", (lh.semisimple * lh.nilpotent - lh.nilpotent * lh.semisimple).norm()},
                  {"nilpotent_norm", lh.nilpotent.norm()},
                  {"nilpotency_defect", nil_pow.norm()},
                  {"semisimple_symplecticity", symplecticity_defect(lh.semisimple, model.space().omega())},
                  {"nilpotent_symplecticity", symplecticity_defect(lh.nilpotent, model.space().omega())}}}};

  const QuadraticForm q = quadratic_form_of(a, model.space());
  const KreinReport kr = krein_check(q, lh);
  L.krein = {{"definite", kr.definite}, {"spectrum_imaginary", kr.spectrum_imaginary}, {"semisimple", kr.semisimple}};
  if (!kr.definite) warnings.push_back("energy form at the equilibrium is indefinite; stability argument unavailable");

  if (freqs.empty()) throw Error(ErrorCode::FrequencyNotInSpectrum, "linearization has no imaginary eigenvalues");
  const double nu0 = nu0_opt.value_or(freqs.front());
  L.u = resonance_space(lh, nu0);
  const Mat& b = L.u.subspace.basis;
  const double period_defect = (expm(L.u.semisimple * L.u.period) * b - b).norm();
  L.resonance = {{"nu0", nu0},
                 {"period", L.u.period},
                 {"dim", L.u.subspace.dim()},
                 {"harmonics", L.u.harmonics},
                 {"period_defect", period_defect},
                 {"omega_inverse_condition", inverse_condition(L.u.restricted_omega)}};
  L.circle_generator = L.u.semisimple / nu0;
  L.table = isotropy_table(model.action(), L.u);
  return L;
}

// lambda restricted to the g-indices of l*.
Vec restrict_lambda(const std::vector<double>& full, const std::vector<int>& coords) {
  Vec out(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) out(static_cast<Eigen::Index>(i)) = full[coords[i]];
  return out;
}

struct CellTask {
  const IsotropyDatum* datum = nullptr;
  const TaylorAnalysis* taylor = nullptr;  // null when the Taylor analysis failed
  std::string taylor_error;
  std::vector<double> lambda_full;
  Vec lambda;  // restricted
};

struct CellResult {
  json estimate;
  json search;
  json branches = json::array();
  json certificates = json::array();
  std::vector<std::string> warnings;
  bool error = false;
};

CellResult run_cell(const EquivariantHamiltonianModel& model, const Linearization& L, const CellTask& t,
                    const AnalysisConfig& cfg, int inner_jobs, bool search) {
  CellResult out;
  const IsotropyDatum& d = *t.datum;
  const std::vector<double> lam(t.lambda.data(), t.lambda.data() + t.lambda.size());
  int bound = 0;
  try {
    RpoEstimate est = ls_estimate_equilibrium(d.fixed_space.dim(), d.dim_l, d.dim_l_lambda(lam));
    est.isotropy = d.name;
    est.momentum = lam;
    bound = est.dimensional_bound;
    out.estimate = estimate_json(est);
  } catch (const Error& e) {
    out.estimate = {{"theorem", to_string(TheoremTag::Equilibrium)},
                    {"isotropy", d.name},
                    {"momentum", lam},
                    {"error", e.what()}};
    out.error = true;
    return out;
  }
  json& s = out.search;
  s = {{"isotropy", d.name}, {"lambda", lam}, {"orbits", json::array()}};
  out.estimate["found"] = nullptr;
  out.estimate["hypotheses_ok"] = false;
  if (!search) return out;

  if (!t.taylor) {
    s["status"] = t.taylor_error;
    s["h1"] = t.taylor_error;
    s["h2"] = "not evaluated";
    return out;
  }
  const TaylorAnalysis& ta = *t.taylor;
  if (ta.radial()) {
    s["status"] = "skipped: radial";
    s["h1"] = "failed: RadialToMaxOrder: averaged Hamiltonian radial through order " + std::to_string(ta.max_order);
    s["h2"] = kH2Radial;
    out.warnings.push_back(d.name + ": radial through order " + std::to_string(ta.max_order) +
                           ", no RPO search attempted; does not satisfy hypothesis (H2)");
    return out;
  }
  s["h1"] = "passed: k = " + std::to_string(ta.k);

  const IsotropyCell cell = make_cell(model.action(), d.name, d.l_coords, t.lambda);
  SearchOptions so;
  so.seed = cfg.seed;
  so.jobs = inner_jobs;
  so.n_starts = cfg.n_starts;
  std::vector<CriticalOrbit> orbits;
  try {
    orbits = constrained_critical_orbits(model, ta, cell, so);
  } catch (const Error& e) {
    s["status"] = error_status(e);
    s["h2"] = "not evaluated";
    return out;
  }
  bool all_morse = true;
  double max_abs_value = 0.0;
  for (const auto& o : orbits) {
    all_morse = all_morse && o.g_morse;
    max_abs_value = std::max(max_abs_value, std::abs(o.value));
    s["orbits"].push_back({{"u", vec_json(o.u)},
                           {"value", o.value},
                           {"c", o.c},
                           {"multipliers", vec_json(o.multipliers)},
                           {"constraint_residual", o.constraint_residual},
                           {"projected_gradient", o.projected_gradient},
                           {"min_abs_eigenvalue", o.min_abs_eigenvalue},
                           {"g_morse", o.g_morse},
                           {"multiplicity", o.multiplicity}});
  }
  s["status"] = "ok";
  s["h2"] = all_morse ? "passed" : "failed: does not satisfy hypothesis (H2): degenerate critical orbit";
  if (!all_morse) out.warnings.push_back(d.name + ": degenerate critical orbit, does not satisfy hypothesis (H2)");

  // Amplitude where r^(k-2) |h_k| stays below 0.1 of the quadratic part.
  double r_max = cfg.r_max;
  if (max_abs_value > 0.0) r_max = std::min(r_max, std::pow(0.1 / max_abs_value, 1.0 / (ta.k - 2)));
  if (std::sqrt(cfg.energy) > r_max) {
    out.warnings.push_back(d.name + ": energy outside the continuation range r <= " + std::to_string(r_max));
  }
  BranchOptions bo;
  bo.r_max = r_max;
  const int g = model.action().group().dim();
  Mat basis(g, static_cast<Eigen::Index>(cell.l_lambda.size()));
  for (std::size_t i = 0; i < cell.l_lambda.size(); ++i) basis.col(static_cast<Eigen::Index>(i)) = cell.l_lambda[i];
  const double nu0 = L.u.nu0;
  const double period0 = 2.0 * std::numbers::pi / nu0;

  std::vector<RpoCertificate> certs;
  std::vector<int> cert_orbit;
  for (std::size_t oi = 0; oi < orbits.size(); ++oi) {
    const auto& o = orbits[oi];
    if (!o.g_morse) continue;
    json bj = {{"isotropy", d.name}, {"lambda", lam}, {"orbit", oi}, {"r_max", r_max}};
    bool pushed = false;
    try {
      const RpoBranch br = branch_continuation(model, ta, cell, o, bo);
      double qr = 0.0, jr = 0.0;
      for (const auto& smp : br.samples) {
        qr = std::max(qr, smp.q_residual);
        jr = std::max(jr, smp.j_residual);
      }
      bj.update({{"status", br.status},
                 {"samples", br.samples.size()},
                 {"c_fit", br.c_fit},
                 {"c_fit_residual", br.c_fit_residual},
                 {"lambda_fit", br.lambda_fit},
                 {"lambda_fit_residual", br.lambda_fit_residual},
                 {"fold", br.fold},
                 {"multiplier_blowup", br.multiplier_blowup},
                 {"max_q_residual", qr},
                 {"max_j_residual", jr}});
      const auto pt = branch_point_at_energy(model, ta, cell, br, cfg.energy);
      if (!pt) {
        bj["energy_point"] = nullptr;
        out.branches.push_back(bj);
        out.warnings.push_back(d.name + ": orbit " + std::to_string(oi) + ": no branch point at the requested energy");
        continue;
      }
      bj["energy_point"] = {{"r", pt->r}, {"c", pt->c}, {"multipliers", vec_json(pt->multipliers)}};
      out.branches.push_back(bj);
      pushed = true;

      Vec big_lambda = Vec::Zero(g);
      for (std::size_t i = 0; i < d.l_coords.size(); ++i)
        big_lambda(d.l_coords[i]) = pt->multipliers(static_cast<Eigen::Index>(i));
      const Vec xi0 = basis.transpose() * big_lambda;
      Vec target = model.J(pt->v);
      for (std::size_t i = 0; i < d.l_coords.size(); ++i)
        target(d.l_coords[i]) = cfg.energy * t.lambda(static_cast<Eigen::Index>(i));
      ShootOptions sh;
      sh.energy = cfg.energy;
      sh.momentum = target;
      sh.tol_residual = cfg.tol_residual;
      sh.jobs = inner_jobs;
      RpoCertificate c = shoot_rpo(model, pt->v, period0 / pt->c, xi0, basis, sh);
      c.isotropy = d.name;
      certs.push_back(std::move(c));
      cert_orbit.push_back(static_cast<int>(oi));
    } catch (const Error& e) {
      if (pushed) {
        out.branches.back()["status"] = error_status(e);
      } else {
        bj["status"] = error_status(e);
        out.branches.push_back(bj);
      }
      out.warnings.push_back(d.name + ": orbit " + std::to_string(oi) + ": " + e.what());
    }
  }

  const auto distinct = distinct_orbits(model, certs);
  for (const auto& dob : distinct) {
    json cj = certificate_json(dob.representative);
    cj["lambda"] = lam;
    cj["multiplicity"] = dob.multiplicity;
    cj["tau_ratio"] = dob.representative.tau / period0;
    cj["tau_within_25pct"] = std::abs(dob.representative.tau / period0 - 1.0) <= 0.25;
    out.certificates.push_back(cj);
  }
  s["certificates"] = certs.size();
  out.estimate["found"] = distinct.size();
  out.estimate["hypotheses_ok"] = all_morse;
  if (all_morse && static_cast<int>(distinct.size()) < bound) {
    out.warnings.push_back(d.name + ": found " + std::to_string(distinct.size()) + " distinct orbits below bound " +
                           std::to_string(bound));
  }
  return out;
}

json isotropy_json(const std::vector<IsotropyDatum>& table) {
  json a = json::array();
  for (const auto& d : table)
    a.push_back({{"name", d.name},
                 {"dim_fixed", d.fixed_space.dim()},
                 {"dim_k", d.dim_k},
                 {"dim_normalizer", d.dim_normalizer},
                 {"dim_l", d.dim_l},
                 {"spatial", d.spatial}});
  return a;
}

json spatiotemporal_rows(const EquivariantHamiltonianModel& model, const Linearization& L, const AnalysisConfig& cfg,
                         std::vector<std::string>& warnings, json& proxy_json) {
  json rows = json::array();
  const CircleAction circle = circle_action_from_semisimple(L.u, model.action());
  const SimplicityProxy proxy = simplicity_proxy(model.action(), L.u, circle);
  proxy_json = {{"passed", proxy.passed},
                {"complex_structure_defect", proxy.complex_structure_defect},
                {"commutant_dim", proxy.commutant_dim},
                {"forced", cfg.force_spatiotemporal}};
  SpatiotemporalResult st;
  try {
    st = spatiotemporal_subgroups(model.action(), L.u, circle, cfg.weight_window, cfg.force_spatiotemporal);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotSimpleAction) throw;
    warnings.push_back(std::string("spatiotemporal rows omitted: ") + e.what());
    return rows;
  }
  warnings.push_back("temporal weights enumerated for |w| <= " + std::to_string(cfg.weight_window) +
                     "; subgroups outside this window are not listed");
  for (const auto& s : st.subgroups) {
    if (s.fixed_space.dim() == 0) continue;
    try {
      // identity component of N(K) is Abelian for every one-dimensional K in the table
      RpoEstimate est = ls_estimate_spatiotemporal(s.fixed_space.dim(), s.dim_normalizer, s.dim_normalizer, s.dim_k);
      est.isotropy = s.spatial_name + "[w=" + std::to_string(s.weight) + "]";
      est.momentum = {static_cast<double>(s.weight)};
      json j = estimate_json(est);
      j["weight"] = s.weight;
      j["temporal_velocity"] = vec_json(s.temporal_velocity);
      j["found"] = nullptr;
      j["hypotheses_ok"] = false;
      rows.push_back(j);
    } catch (const Error& e) {
      rows.push_back({{"theorem", to_string(TheoremTag::Spatiotemporal)},
                      {"isotropy", s.spatial_name},
                      {"weight", s.weight},
                      {"error", e.what()}});
    }
  }
  return rows;
}

// Builds every (isotropy, lambda) cell of the selected spatial classes.
std::vector<CellTask> make_tasks(const EquivariantHamiltonianModel& model, const Linearization& L,
                                 const AnalysisConfig& cfg, const std::vector<TaylorAnalysis>& taylors,
                                 const std::vector<std::string>& taylor_errors) {
  const auto grid = resolved_momentum_grid(cfg, model);
  std::vector<CellTask> tasks;
  for (std::size_t i = 0; i < L.table.size(); ++i) {
    const auto& d = L.table[i];
    if (!cfg.isotropy.empty() && std::find(cfg.isotropy.begin(), cfg.isotropy.end(), d.name) == cfg.isotropy.end())
      continue;
    std::vector<std::vector<double>> seen;
    for (const auto& lam : grid) {
      const Vec r = restrict_lambda(lam, d.l_coords);
      const std::vector<double> key(r.data(), r.data() + r.size());
      if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
      seen.push_back(key);
      CellTask t;
      t.datum = &d;
      t.taylor = taylor_errors[i].empty() ? &taylors[i] : nullptr;
      t.taylor_error = taylor_errors[i];
      t.lambda_full = lam;
      t.lambda = r;
      tasks.push_back(std::move(t));
    }
  }
  return tasks;
}

json taylor_json(const std::string& name, const TaylorAnalysis* ta, const std::string& err) {
  json j = {{"isotropy", name}};
  if (!ta) {
    j["status"] = err;
    return j;
  }
  j.update({{"status", "ok"},
            {"dim", ta->subspace.dim()},
            {"k", ta->k},
            {"radial", ta->radial()},
            {"max_order", ta->max_order},
            {"residuals", ta->residuals},
            {"radial_coefficients", ta->radial_coefficients},
            {"hk_fit_residual", ta->radial() ? 0.0 : ta->hk.fit_residual()},
            {"warnings", ta->warnings}});
  return j;
}

struct Analysis {
  json report;
  int exit_code = 0;
};

Analysis analyze(const AnalysisConfig& cfg, bool search) {
  cfg.validate();
  const auto model = build_model(cfg.model, cfg.params);
  std::vector<std::string> warnings;
  json rep;
  rep["schema_version"] = kReportSchemaVersion;
  rep["command"] = search ? "analyze" : "estimate";
  rep["timestamp"] = utc_timestamp();
  rep["model"] = model_json(model);
  rep["config"] = cfg.to_json();
  rep["conventions"] = {{"omega", "omega(u, v) = u^T Omega v, Omega = [[0, I], [-I, 0]] in (q, p) order"},
                        {"vector_field", "X_h = (dh/dp, -dh/dq)"},
                        {"momentum", "<J(v), xi> = 1/2 omega(xi v, v)"},
                        {"momentum_grid", "lambda = J / Q; target momentum of a certificate is energy * lambda"},
                        {"residual", "||exp(-tau xi) F_tau(m) - m||; relative_residual divides by the state scale"}};

  const Vec zero = Vec::Zero(model.dim());
  rep["equilibrium"] = {{"gradient_norm", model.grad_h(zero).norm()},
                        {"h", model.h(zero)},
                        {"invariance_defect", model.invariance_defect(16, cfg.seed, 0.1)},
                        {"gradient_defect", model.gradient_defect(16, cfg.seed, 0.1)},
                        {"relative_equilibrium", false}};

  const Linearization L = linearize(model, cfg.nu0, warnings);
  rep["spectrum"] = L.spectrum;
  rep["krein"] = L.krein;
  rep["resonance"] = L.resonance;
  rep["isotropy"] = isotropy_json(L.table);
  json proxy_json;
  json st_rows = spatiotemporal_rows(model, L, cfg, warnings, proxy_json);
  rep["simplicity_proxy"] = proxy_json;

  for (const auto& name : cfg.isotropy) {
    const bool known = std::any_of(L.table.begin(), L.table.end(), [&](const auto& d) { return d.name == name; });
    if (!known) warnings.push_back("isotropy '" + name + "' has no nonzero fixed vectors in the resonance space");
  }

  RadialityOptions ro;
  ro.k_max = cfg.k_max;
  ro.tol_rad = cfg.tol_radial;
  ro.seed = cfg.seed;
  std::vector<TaylorAnalysis> taylors(L.table.size());
  std::vector<std::string> taylor_errors(L.table.size());
  json taylor_rows = json::array();
  if (search) {
    for (std::size_t i = 0; i < L.table.size(); ++i) {
      try {
        taylors[i] = taylor_analysis(model, L.table[i].fixed_space, L.circle_generator, ro);
      } catch (const Error& e) {
        taylor_errors[i] = error_status(e);
      }
      taylor_rows.push_back(taylor_json(L.table[i].name, taylor_errors[i].empty() ? &taylors[i] : nullptr,
                                        taylor_errors[i]));
    }
  }
  rep["taylor"] = taylor_rows;

  const auto tasks = make_tasks(model, L, cfg, taylors, taylor_errors);
  std::vector<CellResult> results(tasks.size());
  const int n_tasks = static_cast<int>(tasks.size());
  const bool outer = search && cfg.jobs > 1 && n_tasks > 1;
  const int inner_jobs = outer ? 1 : cfg.jobs;
#pragma omp parallel for schedule(dynamic) num_threads(outer ? cfg.jobs : 1)
  for (int i = 0; i < n_tasks; ++i) {
    try {
      results[i] = run_cell(model, L, tasks[i], cfg, inner_jobs, search);
    } catch (const std::exception& e) {
      results[i].error = true;
      results[i].estimate = {{"isotropy", tasks[i].datum->name}, {"error", e.what()}};
    }
  }

  json estimates = json::array(), searches = json::array(), branches = json::array(), certs = json::array();
  int exit_code = 0;
  for (auto& r : results) {
    estimates.push_back(r.estimate);
    if (!r.search.is_null()) searches.push_back(r.search);
    for (auto& b : r.branches) branches.push_back(b);
    for (auto& c : r.certificates) certs.push_back(c);
    for (auto& w : r.warnings) warnings.push_back(w);
    const json& e = r.estimate;
    if (search && e.contains("found") && e["found"].is_number() && e.value("hypotheses_ok", false) &&
        e["found"].get<int>() < e["dimensional_bound"].get<int>()) {
      exit_code = 2;
    }
  }
  for (auto& row : st_rows) estimates.push_back(row);
  rep["estimates"] = estimates;
  if (search) {
    rep["searches"] = searches;
    rep["branches"] = branches;
    rep["certificates"] = certs;
  }
  rep["warnings"] = warnings;
  rep["exit_code"] = exit_code;
  return {rep, exit_code};
}

std::string csv_number(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

AnalysisConfig AnalysisConfig::from_json(const json& j, const std::string& text) {
  if (!j.is_object()) config_error(text, "", "configuration must be a JSON object");
  static const std::set<std::string> known = {
      "model", "params", "nu0", "isotropy", "energy", "momentum_grid", "weight_window", "tolerances", "k_max",
      "r_max", "n_starts", "force_spatiotemporal", "seed", "jobs", "out", "csv"};
  AnalysisConfig c;
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) config_error(text, k, "unknown configuration key");
  }
  auto str = [&](const char* key, std::string& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_string()) config_error(text, key, "expected a string");
    dst = j[key].get<std::string>();
  };
  auto integer = [&](const char* key, auto& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer()) config_error(text, key, "expected an integer");
    dst = j[key].get<std::remove_reference_t<decltype(dst)>>();
  };
  str("model", c.model);
  if (j.contains("params")) {
    if (!j["params"].is_object()) config_error(text, "params", "expected an object");
    c.params = j["params"];
  }
  if (j.contains("nu0")) {
    const json& v = j["nu0"];
    if (v.is_string() && v.get<std::string>() == "auto") c.nu0.reset();
    else if (v.is_number()) c.nu0 = v.get<double>();
    else config_error(text, "nu0", "expected \"auto\" or a number");
  }
  if (j.contains("isotropy")) {
    const json& v = j["isotropy"];
    if (v.is_string() && v.get<std::string>() == "all") c.isotropy.clear();
    else if (v.is_array()) {
      for (const auto& x : v) {
        if (!x.is_string()) config_error(text, "isotropy", "expected subgroup names");
        c.isotropy.push_back(x.get<std::string>());
      }
    } else {
      config_error(text, "isotropy", "expected \"all\" or a list of names");
    }
  }
  if (j.contains("energy")) c.energy = get_number(j["energy"], "energy", text);
  if (j.contains("momentum_grid")) {
    const json& v = j["momentum_grid"];
    if (!v.is_array()) config_error(text, "momentum_grid", "expected a list");
    for (const auto& x : v) {
      if (x.is_number()) c.momentum_grid.push_back({x.get<double>()});
      else if (x.is_array()) {
        std::vector<double> row;
        for (const auto& y : x) row.push_back(get_number(y, "momentum_grid", text));
        c.momentum_grid.push_back(row);
      } else {
        config_error(text, "momentum_grid", "entries must be numbers or lists of numbers");
      }
    }
    if (c.momentum_grid.empty()) config_error(text, "momentum_grid", "grid must be nonempty");
  }
  integer("weight_window", c.weight_window);
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) config_error(text, "tolerances", "expected an object");
    for (const auto& [k, v] : t.items()) {
      if (k == "residual") c.tol_residual = get_number(v, k, text);
      else if (k == "radial") c.tol_radial = get_number(v, k, text);
      else config_error(text, k, "unknown tolerance");
    }
  }
  integer("k_max", c.k_max);
  if (j.contains("r_max")) c.r_max = get_number(j["r_max"], "r_max", text);
  integer("n_starts", c.n_starts);
  if (j.contains("force_spatiotemporal")) {
    if (!j["force_spatiotemporal"].is_boolean()) config_error(text, "force_spatiotemporal", "expected a boolean");
    c.force_spatiotemporal = j["force_spatiotemporal"].get<bool>();
  }
  integer("seed", c.seed);
  integer("jobs", c.jobs);
  str("out", c.out);
  str("csv", c.csv);
  try {
    c.validate();
  } catch (const Error& e) {
    // validate() names the offending key first
    const std::string msg = e.what();
    const auto q1 = msg.find('\'');
    const auto q2 = q1 == std::string::npos ? q1 : msg.find('\'', q1 + 1);
    const std::string key = q2 == std::string::npos ? "" : msg.substr(q1 + 1, q2 - q1 - 1);
    const int line = line_of_key(text, key);
    if (line > 0) throw Error(ErrorCode::ConfigError, "line " + std::to_string(line) + ": " + msg.substr(msg.find(": ") + 2));
    throw;
  }
  return c;
}

AnalysisConfig AnalysisConfig::from_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t pos = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto begin = text.begin();
    const int line = 1 + static_cast<int>(std::count(begin, begin + static_cast<std::ptrdiff_t>(pos), '\n'));
    const auto last_nl = text.rfind('\n', pos == 0 ? 0 : pos - 1);
    const std::size_t col = last_nl == std::string::npos || pos == 0 ? pos + 1 : pos - last_nl;
    throw Error(ErrorCode::ConfigError, "line " + std::to_string(line) + ", column " + std::to_string(col) +
                                            ": malformed JSON");
  }
  return from_json(j, text);
}

AnalysisConfig AnalysisConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

void AnalysisConfig::validate() const {
  if (!(energy > 0.0) || !std::isfinite(energy)) throw Error(ErrorCode::ConfigError, "'energy' must be positive");
  if (nu0 && !(*nu0 > 0.0)) throw Error(ErrorCode::ConfigError, "'nu0' must be positive");
  if (!(tol_residual > 0.0)) throw Error(ErrorCode::ConfigError, "'residual' tolerance must be positive");
  if (!(tol_radial > 0.0)) throw Error(ErrorCode::ConfigError, "'radial' tolerance must be positive");
  if (weight_window < 0) throw Error(ErrorCode::ConfigError, "'weight_window' must be nonnegative");
  if (k_max < 4) throw Error(ErrorCode::ConfigError, "'k_max' must be at least 4");
  if (!(r_max > 0.0)) throw Error(ErrorCode::ConfigError, "'r_max' must be positive");
  if (n_starts < 0) throw Error(ErrorCode::ConfigError, "'n_starts' must be nonnegative");
  if (jobs < 1) throw Error(ErrorCode::ConfigError, "'jobs' must be at least 1");
}

json AnalysisConfig::to_json() const {
  json grid = json::array();
  for (const auto& row : momentum_grid) grid.push_back(row);
  json j = {{"model", model},
            {"params", params},
            {"isotropy", isotropy.empty() ? json("all") : json(isotropy)},
            {"energy", energy},
            {"momentum_grid", grid},
            {"weight_window", weight_window},
            {"tolerances", {{"residual", tol_residual}, {"radial", tol_radial}}},
            {"k_max", k_max},
            {"r_max", r_max},
            {"n_starts", n_starts},
            {"force_spatiotemporal", force_spatiotemporal},
            {"seed", seed},
            {"out", out},
            {"csv", csv}};
  j["nu0"] = nu0 ? json(*nu0) : json("auto");
  // jobs is omitted: reports must not depend on the thread count
  return j;
}

EquivariantHamiltonianModel build_model(const std::string& name, const json& params) {
  return build_model_impl(name, params.is_null() ? json::object() : params, {});
}

std::vector<std::vector<double>> resolved_momentum_grid(const AnalysisConfig& cfg,
                                                        const EquivariantHamiltonianModel& model) {
  const GroupDescriptor& g = model.action().group();
  const auto gd = static_cast<std::size_t>(g.dim());
  if (cfg.momentum_grid.empty()) {
    std::vector<double> def(gd, 0.0);
    if (g.kind() == GroupKind::circle) def[0] = 0.1;
    if (g.kind() == GroupKind::so3) def[2] = 0.1;
    return {def};
  }
  std::vector<std::vector<double>> out;
  for (const auto& row : cfg.momentum_grid) {
    if (row.size() != gd) {
      throw Error(ErrorCode::ConfigError, "'momentum_grid' entry has " + std::to_string(row.size()) +
                                              " components, the group has dimension " + std::to_string(gd));
    }
    out.push_back(row);
  }
  return out;
}

AnalysisOutcome cmd_analyze(const AnalysisConfig& cfg) {
  auto a = analyze(cfg, true);
  return {std::move(a.report), a.exit_code};
}

json cmd_estimate(const AnalysisConfig& cfg) { return analyze(cfg, false).report; }

json cmd_verify(const EquivariantHamiltonianModel& model, const VerifyRequest& req) {
  if (static_cast<int>(req.state.size()) != model.dim()) {
    throw Error(ErrorCode::ConfigError, "'state' must have " + std::to_string(model.dim()) + " components");
  }
  const int g = model.action().group().dim();
  std::vector<double> xi = req.xi.empty() ? std::vector<double>(static_cast<std::size_t>(g), 0.0) : req.xi;
  if (static_cast<int>(xi.size()) != g) {
    throw Error(ErrorCode::ConfigError, "'xi' must have " + std::to_string(g) + " components");
  }
  const Vec m0 = to_vec(req.state);
  const Vec mu = model.J(m0);
  const auto iso = model.action().group().coadjoint_isotropy(std::span<const double>(mu.data(), mu.size()));
  Mat basis(g, static_cast<Eigen::Index>(iso.size()));
  for (std::size_t i = 0; i < iso.size(); ++i) basis.col(static_cast<Eigen::Index>(i)) = iso[i];
  const Vec xi0 = basis.transpose() * to_vec(xi);
  ShootOptions so;
  so.tol_residual = req.tol_residual;
  so.jobs = req.jobs;
  const RpoCertificate c = shoot_rpo(model, m0, req.tau, xi0, basis, so);
  json rep = {{"schema_version", kReportSchemaVersion},
              {"command", "verify"},
              {"timestamp", utc_timestamp()},
              {"model", model_json(model)},
              {"certificate", certificate_json(c)}};
  return rep;
}

json cmd_list_models() {
  json models = json::array();
  const std::map<std::string, json> params = {
      {"spherical_pendulum",
       {{"m", 1.0}, {"l", 1.0}, {"g", 1.0}, {"phi", "[{\"powers\": [i, j, k], \"coef\": c}] over (x^2+y^2, px^2+py^2, x px + y py)"}}},
      {"spring_pendulum_3d",
       {{"m", 1.0},
        {"l", 1.0},
        {"g", 1.0},
        {"k", 1.0},
        {"linear", false},
        {"sigma", "[{\"powers\": [i, j, k, l], \"coef\": c}] over (x^2+y^2, px^2+py^2, zeta, pz)"}}},
      {"so3_isotropic", {{"a", 0.5}, {"b", 0.5}, {"f", "[{\"powers\": [i, j, k], \"coef\": c}] over (|p|^2, |q|^2, q.p)"}}},
      {"harmonic_fixture", {{"frequencies", {1.0, 1.0}}, {"coupling", 0.0}, {"group", "trivial | torus | rotation"}}},
  };
  for (const auto& m : list_models()) {
    models.push_back({{"name", m.name},
                      {"description", m.description},
                      {"group", m.group},
                      {"dim", m.dim == 0 ? json("2 * len(frequencies)") : json(m.dim)},
                      {"params", params.at(m.name)}});
  }
  return {{"schema_version", kReportSchemaVersion}, {"command", "list-models"}, {"models", models}};
}

std::string certificates_csv(const json& report) {
  const std::string model = report.at("model").at("name").get<std::string>();
  const int g = report.at("model").at("group_dim").get<int>();
  std::ostringstream os;
  os << "model,isotropy,energy";
  std::size_t nlam = 0;
  for (const auto& c : report.value("certificates", json::array())) nlam = std::max(nlam, c.at("lambda").size());
  for (std::size_t i = 0; i < nlam; ++i) os << ",lambda_" << i;
  os << ",tau";
  for (int i = 0; i < g; ++i) os << ",xi_" << i;
  os << ",residual,energy_drift\n";
  for (const auto& c : report.value("certificates", json::array())) {
    os << model << ',' << c.at("isotropy").get<std::string>() << ',' << csv_number(c.at("energy").get<double>());
    for (std::size_t i = 0; i < nlam; ++i)
      os << ',' << (i < c.at("lambda").size() ? csv_number(c.at("lambda")[i].get<double>()) : std::string());
    os << ',' << csv_number(c.at("tau").get<double>());
    for (int i = 0; i < g; ++i) os << ',' << csv_number(c.at("xi")[static_cast<std::size_t>(i)].get<double>());
    os << ',' << csv_number(c.at("residual").get<double>()) << ',' << csv_number(c.at("energy_drift").get<double>())
       << '\n';
  }
  return os.str();
}

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

}  // namespace relmode
