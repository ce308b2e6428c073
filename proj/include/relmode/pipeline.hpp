#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "relmode/model.hpp"

namespace relmode {

inline constexpr const char* kReportSchemaVersion = "1.0";

struct AnalysisConfig {
  std::string model = "spherical_pendulum";
  nlohmann::json params = nlohmann::json::object();
  std::optional<double> nu0;          // empty: smallest linear frequency
  std::vector<std::string> isotropy;  // empty: every spatial isotropy class
  double energy = 1e-3;
  /// Scaled momenta lambda = J / Q as full g* vectors; empty means the model default.
  std::vector<std::vector<double>> momentum_grid;
  int weight_window = 3;
  double tol_residual = 1e-8;
  double tol_radial = 1e-6;
  int k_max = 8;
  double r_max = 0.2;
  int n_starts = 0;
  bool force_spatiotemporal = false;
  std::uint64_t seed = 7;
  int jobs = 1;
  std::string out;
  std::string csv;

  /// Throws ConfigError with the offending line when the text is available.
  static AnalysisConfig from_json(const nlohmann::json& j, const std::string& source_text = {});
  static AnalysisConfig from_text(const std::string& text);
  static AnalysisConfig from_file(const std::string& path);
  nlohmann::json to_json() const;
  /// Throws ConfigError.
  void validate() const;
};

/// Builds a built-in model from JSON parameters; unknown keys are ConfigError.
EquivariantHamiltonianModel build_model(const std::string& name, const nlohmann::json& params);

/// Momentum grid with the model default substituted and every entry sized to dim g.
std::vector<std::vector<double>> resolved_momentum_grid(const AnalysisConfig& cfg,
                                                        const EquivariantHamiltonianModel& model);

struct AnalysisOutcome {
  nlohmann::json report;
  int exit_code = 0;  // 0 ok, 2 some bound not met
};

AnalysisOutcome cmd_analyze(const AnalysisConfig& cfg);
nlohmann::json cmd_estimate(const AnalysisConfig& cfg);

struct VerifyRequest {
  std::vector<double> state;
  double tau = 0.0;
  std::vector<double> xi;  // drift coefficients in g; empty means zero
  double tol_residual = 1e-8;
  int jobs = 1;
};

nlohmann::json cmd_verify(const EquivariantHamiltonianModel& model, const VerifyRequest& req);
nlohmann::json cmd_list_models();

/// Certificate table of an analyze report, one row per distinct orbit.
std::string certificates_csv(const nlohmann::json& report);

/// Report serialization; keys are sorted by construction.
std::string dump_report(const nlohmann::json& report);

}  // namespace relmode
