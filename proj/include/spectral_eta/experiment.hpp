#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectral_eta/error.hpp"
#include "spectral_eta/eta_zeta.hpp"
#include "spectral_eta/flow_shift.hpp"
#include "spectral_eta/lattice.hpp"

namespace spectral_eta {

enum class Pipeline { releta, relzeta, sf, ssf, variation, glue, theta_scan, example_r2, mod2z };
enum class ModelKind { dirac1d, dirac2d, raw_matrix };

std::string to_string(Pipeline p);

/// Parsed and validated run configuration. The original JSON is kept so it
/// can be echoed into meta.json.
struct ExperimentConfig {
  Pipeline pipeline = Pipeline::releta;
  ModelKind model = ModelKind::raw_matrix;
  std::uint64_t seed = 1;
  EtaConfig eta;
  FlowOptions flow;
  CutOptions cut_options;
  int cut = -1;  // node index; −1 picks the model default
  std::vector<double> thetas;
  std::vector<double> r_grid;
  std::vector<Complex> s_values;
  double stencil = 1e-3;
  int flow_band = 0;  // eigenvalues recorded around zero per r (0 = all)
  nlohmann::json source;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::filesystem::path& path);
};

enum class Status { pass, fail, info };

struct ResultRow {
  std::string quantity;
  double value = 0.0;
  double tolerance = 0.0;  // 0 for informational rows
  Status status = Status::info;
  std::string identity;  // the identity a failing row refers to
};

struct SampleRow {
  std::string series;
  double x = 0.0;
  long index = 0;
  double value = 0.0;
};

struct ExperimentOutput {
  std::vector<ResultRow> rows;
  std::vector<SampleRow> samples;
  std::map<std::string, double> timings;  // seconds per stage

  bool all_passed() const;
  std::vector<const ResultRow*> failures() const;
};

/// Runs the configured pipeline. Numeric failures propagate as Error.
ExperimentOutput run_experiment(const ExperimentConfig& config);

/// Writes results.csv, samples.csv and meta.json into `dir`, each through a
/// temporary file and a rename.
void write_artifacts(const std::filesystem::path& dir, const ExperimentConfig& config, const ExperimentOutput& out);

/// %.17g rendering used for every number in the CSV files.
std::string format_number(double x);

void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string to_string(Status s);

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Exit code for an error raised by the toolkit.
int exit_code_for(Errc code);

}  // namespace spectral_eta
