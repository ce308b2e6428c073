#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "relmode/errors.hpp"
#include "relmode/pipeline.hpp"

using nlohmann::json;
using relmode::AnalysisConfig;
using relmode::Error;
using relmode::ErrorCode;

namespace {

struct Flags {
  std::string model, params, config, nu0, momentum_grid, out, csv;
  std::optional<double> energy, tol_residual;
  std::optional<int> weight_window, jobs;
  std::optional<std::uint64_t> seed;
  // verify
  std::string state, xi;
  double tau = 0.0;
};

json parse_flag_json(const std::string& text, const char* flag) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string(flag) + ": malformed JSON at byte " + std::to_string(e.byte));
  }
}

AnalysisConfig make_config(const Flags& f) {
  AnalysisConfig c = f.config.empty() ? AnalysisConfig{} : AnalysisConfig::from_file(f.config);
  if (!f.model.empty()) c.model = f.model;
  if (!f.params.empty()) {
    c.params = parse_flag_json(f.params, "--params");
    if (!c.params.is_object()) throw Error(ErrorCode::ConfigError, "--params: expected a JSON object");
  }
  if (!f.nu0.empty()) {
    if (f.nu0 == "auto") {
      c.nu0.reset();
    } else {
      try {
        c.nu0 = std::stod(f.nu0);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "--nu0: expected 'auto' or a number");
      }
    }
  }
  if (f.energy) c.energy = *f.energy;
  if (!f.momentum_grid.empty()) {
    json j = {{"momentum_grid", parse_flag_json(f.momentum_grid, "--momentum-grid")}};
    c.momentum_grid = AnalysisConfig::from_json(j).momentum_grid;
  }
  if (f.weight_window) c.weight_window = *f.weight_window;
  if (f.tol_residual) c.tol_residual = *f.tol_residual;
  if (f.jobs) c.jobs = *f.jobs;
  if (f.seed) c.seed = *f.seed;
  if (const char* env = std::getenv("RELMODE_SEED")) {
    try {
      c.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "RELMODE_SEED: expected a nonnegative integer");
    }
  }
  if (!f.out.empty()) c.out = f.out;
  if (!f.csv.empty()) c.csv = f.csv;
  c.validate();
  return c;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + path + "'");
  out << text;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--model", f.model, "Model name (see list-models)");
  sub->add_option("--params", f.params, "Model parameters as a JSON object");
  sub->add_option("--config", f.config, "JSON configuration file; flags override its values");
  sub->add_option("--nu0", f.nu0, "Base frequency: auto or a number");
  sub->add_option("--energy", f.energy, "Energy level epsilon");
  sub->add_option("--momentum-grid", f.momentum_grid, "JSON list of scaled momenta lambda = J/Q");
  sub->add_option("--weight-window", f.weight_window, "Temporal weight window |w| <= W");
  sub->add_option("--seed", f.seed, "RNG seed (RELMODE_SEED overrides)");
  sub->add_option("--jobs", f.jobs, "Worker threads");
  sub->add_option("--out", f.out, "Report path (default stdout)");
  sub->add_option("--tol-residual", f.tol_residual, "Relative shooting residual tolerance");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative periodic orbits near symmetric elliptic equilibria"};
  app.require_subcommand(1);
  Flags f;
  auto* analyze = app.add_subcommand("analyze", "Full pipeline: estimates, searches, certificates");
  add_common(analyze, f);
  analyze->add_option("--csv", f.csv, "Certificate table path");
  auto* estimate = app.add_subcommand("estimate", "Estimate table only");
  add_common(estimate, f);
  auto* verify = app.add_subcommand("verify", "Certify a single relative periodic orbit");
  verify->add_option("--model", f.model, "Model name")->required();
  verify->add_option("--params", f.params, "Model parameters as a JSON object");
  verify->add_option("--state", f.state, "Initial state as a JSON list")->required();
  verify->add_option("--tau", f.tau, "Period guess")->required();
  verify->add_option("--xi", f.xi, "Drift coefficients as a JSON list");
  verify->add_option("--tol-residual", f.tol_residual, "Relative shooting residual tolerance");
  verify->add_option("--jobs", f.jobs, "Worker threads");
  verify->add_option("--out", f.out, "Report path (default stdout)");
  auto* list = app.add_subcommand("list-models", "Built-in models and their parameters");
  list->add_option("--out", f.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*analyze) {
      const AnalysisConfig cfg = make_config(f);
      const auto outcome = relmode::cmd_analyze(cfg);
      write_text(cfg.out, relmode::dump_report(outcome.report));
      if (!cfg.csv.empty()) write_text(cfg.csv, relmode::certificates_csv(outcome.report));
      if (outcome.exit_code == 2) std::cerr << "relmode: a lower bound was not met by the found orbits\n";
      return outcome.exit_code;
    }
    if (*estimate) {
      const AnalysisConfig cfg = make_config(f);
      write_text(cfg.out, relmode::dump_report(relmode::cmd_estimate(cfg)));
      return 0;
    }
    if (*verify) {
      const json params = f.params.empty() ? json::object() : parse_flag_json(f.params, "--params");
      const auto model = relmode::build_model(f.model, params);
      relmode::VerifyRequest req;
      const json state = parse_flag_json(f.state, "--state");
      if (!state.is_array()) throw Error(ErrorCode::ConfigError, "--state: expected a JSON list");
      for (const auto& x : state) {
        if (!x.is_number()) throw Error(ErrorCode::ConfigError, "--state: expected numbers");
        req.state.push_back(x.get<double>());
      }
      if (!f.xi.empty()) {
        const json xi = parse_flag_json(f.xi, "--xi");
        if (!xi.is_array()) throw Error(ErrorCode::ConfigError, "--xi: expected a JSON list");
        for (const auto& x : xi) {
          if (!x.is_number()) throw Error(ErrorCode::ConfigError, "--xi: expected numbers");
          req.xi.push_back(x.get<double>());
        }
      }
      req.tau = f.tau;
      if (f.tol_residual) req.tol_residual = *f.tol_residual;
      if (f.jobs) req.jobs = *f.jobs;
      write_text(f.out, relmode::dump_report(relmode::cmd_verify(model, req)));
      return 0;
    }
    write_text(f.out, relmode::dump_report(relmode::cmd_list_models()));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "relmode: " << e.what() << "\n";
    return 1;
  }
}
