#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "relmode/errors.hpp"
#include "relmode/pipeline.hpp"

using namespace relmode;
using nlohmann::json;

namespace {

std::string error_message(const std::string& text) {
  try {
    AnalysisConfig::from_text(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    return e.what();
  }
  FAIL("expected a ConfigError");
  return {};
}

AnalysisConfig small_pendulum() {
  AnalysisConfig c;
  c.model = "spherical_pendulum";
  c.momentum_grid = {{0.1}};
  return c;
}

json without_timestamp(json j) {
  j.erase("timestamp");
  return j;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "relmode_test_pipeline";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RELMODE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config errors name the offending line") {
  const std::string unknown = "{\n  \"model\": \"spherical_pendulum\",\n  \"energie\": 0.001\n}";
  CHECK(error_message(unknown).find("line 3") != std::string::npos);
  const std::string bad_energy = "{\n  \"model\": \"spherical_pendulum\",\n  \"energy\": -1\n}";
  const auto m = error_message(bad_energy);
  CHECK(m.find("line 3") != std::string::npos);
  CHECK(m.find("energy") != std::string::npos);
  const std::string malformed = "{\n  \"model\": \"spherical_pendulum\",\n  \"energy\": 0.001,,\n}";
  CHECK(error_message(malformed).find("line 3") != std::string::npos);
  const std::string empty_grid = "{\n\"momentum_grid\": []\n}";
  CHECK(error_message(empty_grid).find("momentum_grid") != std::string::npos);
}

TEST_CASE("config round trip") {
  AnalysisConfig c = small_pendulum();
  c.energy = 2e-3;
  c.isotropy = {"e"};
  c.nu0 = 1.0;
  const auto back = AnalysisConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
}

TEST_CASE("unknown model and parameters") {
  CHECK_THROWS_AS(build_model("double_pendulum", json::object()), Error);
  try {
    build_model("spherical_pendulum", json{{"mass", 1.0}});
    FAIL("expected a ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
  }
  CHECK(build_model("spherical-pendulum", json::object()).name() == "spherical_pendulum");
}

TEST_CASE("default momentum grids have the algebra's dimension") {
  AnalysisConfig c;
  c.model = "so3_isotropic";
  const auto model = build_model(c.model, c.params);
  const auto grid = resolved_momentum_grid(c, model);
  REQUIRE_FALSE(grid.empty());
  for (const auto& row : grid) CHECK(row.size() == 3);
}

TEST_CASE("analysis is deterministic apart from the timestamp") {
  const auto a = cmd_analyze(small_pendulum());
  const auto b = cmd_analyze(small_pendulum());
  CHECK(a.exit_code == 0);
  CHECK(dump_report(without_timestamp(a.report)) == dump_report(without_timestamp(b.report)));
  CHECK(a.report.at("schema_version") == kReportSchemaVersion);
  REQUIRE(a.report.at("certificates").size() >= 1);
  for (const auto& c : a.report.at("certificates")) CHECK(c.at("residual").get<double>() <= 1e-8);
}

TEST_CASE("estimate-only command") {
  AnalysisConfig c;
  c.model = "so3_isotropic";
  c.momentum_grid = {{0.0, 0.0, 0.1}};
  const auto rep = cmd_estimate(c);
  CHECK_FALSE(rep.contains("certificates"));
  bool found = false;
  for (const auto& e : rep.at("estimates")) {
    if (e.value("isotropy", "") == "e" && e.value("theorem", "") == "Equilibrium") {
      CHECK(e.at("dimensional_bound") == 1);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("radial fixture flags the hypothesis failure and attempts no search") {
  AnalysisConfig c;
  c.model = "harmonic_fixture";
  c.params = {{"frequencies", {1.0, 1.0}}, {"coupling", 0.0}, {"group", "trivial"}};
  const auto out = cmd_analyze(c);
  CHECK(out.exit_code == 0);
  CHECK(out.report.at("certificates").empty());
  const std::string w = out.report.at("warnings").dump();
  CHECK(w.find("does not satisfy hypothesis (H2)") != std::string::npos);
}

TEST_CASE("verify on a harmonic circle state") {
  const auto model = build_model("harmonic_fixture", {{"frequencies", {1.0, 1.0}}, {"group", "rotation"}});
  VerifyRequest req;
  req.state = {0.3, 0.0, 0.0, 0.0};
  req.tau = 6.3;
  const auto rep = cmd_verify(model, req);
  CHECK(rep.at("certificate").at("residual").get<double>() <= 1e-10);
  CHECK(rep.at("certificate").at("tau").get<double>() == doctest::Approx(2.0 * 3.141592653589793).epsilon(1e-8));
  req.state = {1.0};
  CHECK_THROWS_AS(cmd_verify(model, req), Error);
}

TEST_CASE("list-models has four entries") { CHECK(cmd_list_models().at("models").size() == 4); }

TEST_CASE("certificate CSV") {
  const auto out = cmd_analyze(small_pendulum());
  const std::string csv = certificates_csv(out.report);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "model,isotropy,energy,lambda_0,tau,xi_0,residual,energy_drift");
  int rows = 0;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == static_cast<int>(out.report.at("certificates").size()));
}

TEST_CASE("command line exit codes and outputs") {
  const auto report = scratch("report.json");
  const auto csv = scratch("certs.csv");
  std::filesystem::remove(report);
  std::filesystem::remove(csv);
  CHECK(run_cli("analyze --model spherical_pendulum --momentum-grid '[[0.1]]' --out " + report.string() +
                " --csv " + csv.string()) == 0);
  const json rep = json::parse(slurp(report));
  CHECK(rep.at("command") == "analyze");
  CHECK(std::filesystem::exists(csv));
  CHECK(run_cli("list-models") == 0);
  CHECK(run_cli("analyze --model no_such_model") == 1);
  CHECK(run_cli("analyze --model spherical_pendulum --energy -1") == 1);
  const auto cfg = scratch("bad.json");
  std::ofstream(cfg) << "{\n \"model\": \"spherical_pendulum\",\n \"bogus\": 1\n}\n";
  CHECK(run_cli("analyze --config " + cfg.string()) == 1);
  CHECK(run_cli("verify --model harmonic_fixture --params '{\"group\":\"rotation\"}' --state '[0.3,0,0,0]' --tau 6.3") ==
        0);
}

TEST_CASE("RELMODE_SEED overrides --seed") {
  const auto a = scratch("seed_a.json");
  const auto b = scratch("seed_b.json");
  setenv("RELMODE_SEED", "11", 1);
  CHECK(run_cli("estimate --model spherical_pendulum --seed 3 --out " + a.string()) == 0);
  unsetenv("RELMODE_SEED");
  CHECK(run_cli("estimate --model spherical_pendulum --seed 11 --out " + b.string()) == 0);
  CHECK(json::parse(slurp(a)).at("config").at("seed") == 11);
  CHECK(json::parse(slurp(b)).at("config").at("seed") == 11);
}
