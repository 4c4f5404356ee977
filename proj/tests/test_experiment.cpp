#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "spectral_eta/error.hpp"
#include "spectral_eta/experiment.hpp"
#include "spectral_eta/report.hpp"

using namespace spectral_eta;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("spectral_eta_test_" + name);
  fs::remove_all(dir);
  return dir;
}

const ResultRow* find_row(const ExperimentOutput& out, const std::string& q) {
  for (const auto& r : out.rows)
    if (r.quantity == q) return &r;
  return nullptr;
}

Errc config_error_of(const json& j) {
  try {
    ExperimentConfig::from_json(j);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("configuration was accepted");
  return Errc::config_error;
}

}  // namespace

TEST_CASE("identical raw matrices give eta0 = 0") {
  const json j = {{"pipeline", "releta"},
                  {"model", {{"type", "raw-matrix"}, {"a0", {{2.0, 0.5}, {0.5, -1.0}}}, {"a1", {{2.0, 0.5}, {0.5, -1.0}}}}}};
  const ExperimentOutput out = run_experiment(ExperimentConfig::from_json(j));
  const ResultRow* eta = find_row(out, "eta0");
  REQUIRE(eta != nullptr);
  CHECK(std::abs(eta->value) < 1e-14);
  const ResultRow* sig = find_row(out, "eta0_signature_residual");
  REQUIRE(sig != nullptr);
  CHECK(sig->status == Status::pass);
  CHECK(out.all_passed());
}

TEST_CASE("complex matrix entries and the signature oracle") {
  const json j = {{"pipeline", "releta"},
                  {"model",
                   {{"type", "raw-matrix"},
                    {"a0", {{1.0, json::array({0.0, 1.0})}, {json::array({0.0, -1.0}), 1.0}}},
                    {"a1", {{1.0, 0.0}, {0.0, 1.0}}}}}};
  const ExperimentOutput out = run_experiment(ExperimentConfig::from_json(j));
  // a0 has eigenvalues 0 and 2.
  CHECK(find_row(out, "eta0")->value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.all_passed());
}

TEST_CASE("malformed configurations") {
  CHECK(config_error_of(json::array()) == Errc::config_error);
  CHECK(config_error_of({{"model", json::object()}}) == Errc::config_error);
  CHECK(config_error_of({{"pipeline", "nonsense"}}) == Errc::config_error);
  CHECK(config_error_of({{"pipeline", "releta"}, {"numeric", {{"t_lo", 1.0}, {"t_cut", 0.5}}}}) == Errc::invalid_time);
  CHECK(config_error_of({{"pipeline", "theta-scan"}, {"theta", {0.0, 2.0}}}) == Errc::invalid_theta);
  CHECK(config_error_of({{"pipeline", "releta"}, {"numeric", {{"K", "eight"}}}}) == Errc::config_error);
  CHECK(config_error_of({{"pipeline", "variation"}, {"r_grid", {0.0, 1.5}}}) == Errc::config_error);

  const json bad_matrix = {{"pipeline", "releta"}, {"model", {{"type", "raw-matrix"}, {"a0", {{1.0, 2.0}, {0.0, 1.0}}}, {"a1", {{1.0}}}}}};
  try {
    run_experiment(ExperimentConfig::from_json(bad_matrix));
    FAIL("expected NotSelfAdjoint");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_self_adjoint);
  }
  CHECK_THROWS_AS(ExperimentConfig::from_file("/nonexistent/config.json"), Error);
}

TEST_CASE("CSV bodies are deterministic") {
  const json j = {{"pipeline", "sf"},
                  {"seed", 11},
                  {"model", {{"type", "raw-matrix"}, {"random", {{"kind", "block"}, {"size", 16}, {"block", 4}, {"min_gap", 1e-3}}}}},
                  {"r_grid", 5}};
  const ExperimentConfig cfg = ExperimentConfig::from_json(j);
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  write_artifacts(a, cfg, run_experiment(cfg));
  write_artifacts(b, cfg, run_experiment(cfg));
  CHECK(slurp(a / "results.csv") == slurp(b / "results.csv"));
  CHECK(slurp(a / "samples.csv") == slurp(b / "samples.csv"));
  CHECK_FALSE(fs::exists(a / "results.csv.tmp"));
  const json meta = json::parse(slurp(a / "meta.json"));
  CHECK(meta.at("pipeline") == "sf");
  CHECK(meta.at("seed") == 11);
  CHECK(meta.at("config") == j);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("report renders data files") {
  const json j = {{"pipeline", "ssf"},
                  {"model", {{"type", "raw-matrix"}, {"random", {{"kind", "kernel"}, {"size", 12}, {"k0", 2}, {"k1", 1}}}}}};
  const ExperimentConfig cfg = ExperimentConfig::from_json(j);
  const fs::path dir = scratch("report");
  write_artifacts(dir, cfg, run_experiment(cfg));
  const ReportSummary s = write_report(dir);
  CHECK(s.failed == 0);
  CHECK(s.passed > 0);
  CHECK(fs::exists(dir / "summary.txt"));
  CHECK(fs::exists(dir / "ssf.dat"));
  CHECK(fs::exists(dir / "decay.dat"));
  fs::remove_all(dir);
}

TEST_CASE("report on an empty directory is a configuration error") {
  const fs::path dir = scratch("empty");
  fs::create_directories(dir);
  try {
    write_report(dir);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::config_error);
    CHECK(exit_code_for(e.code()) == kExitConfig);
  }
  fs::remove_all(dir);
}

TEST_CASE("number formatting and CSV splitting") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(-2.0) == "-2");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  const auto f = split_csv_line("a,\"b,c\",\"d\"\"e\",");
  REQUIRE(f.size() == 4);
  CHECK(f[1] == "b,c");
  CHECK(f[2] == "d\"e");
  CHECK(f[3].empty());
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(Errc::config_error) == 2);
  CHECK(exit_code_for(Errc::invalid_potential) == 2);
  CHECK(exit_code_for(Errc::fit_unstable) == 3);
  CHECK(exit_code_for(Errc::tracking_failed) == 3);
  CHECK(exit_code_for(Errc::near_pole) == 3);
}
