#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spectral_eta/acceptance.hpp"
#include "spectral_eta/error.hpp"
#include "spectral_eta/experiment.hpp"
#include "spectral_eta/parallel.hpp"
#include "spectral_eta/report.hpp"

namespace se = spectral_eta;

namespace {

int apply_threads(int requested) {
  int threads = requested;
  if (const char* env = std::getenv("SPECTRAL_ETA_THREADS")) {
    try {
      threads = std::stoi(env);
    } catch (const std::exception&) {
      std::cerr << "error: SPECTRAL_ETA_THREADS must be an integer\n";
      return se::kExitConfig;
    }
  }
  if (threads < 0) {
    std::cerr << "error: thread count must be non-negative\n";
    return se::kExitConfig;
  }
  se::set_thread_count(threads);
  return se::kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  const se::ExperimentConfig config = se::ExperimentConfig::from_file(config_path);
  const se::ExperimentOutput out = se::run_experiment(config);
  se::write_artifacts(out_dir, config, out);
  for (const auto& r : out.rows)
    std::cout << se::to_string(r.status) << "  " << r.quantity << " = " << se::format_number(r.value) << "\n";
  const auto failures = out.failures();
  for (const se::ResultRow* r : failures)
    std::cerr << "check failed (" << r->identity << "): " << r->quantity << " = " << se::format_number(r->value)
              << ", tolerance " << se::format_number(r->tolerance) << "\n";
  std::cout << "artifacts written to " << out_dir << "\n";
  return failures.empty() ? se::kExitOk : se::kExitCheckFailed;
}

int cmd_report(const std::string& dir) {
  const se::ReportSummary s = se::write_report(dir);
  std::cout << s.table;
  for (const auto& p : s.written) std::cout << "wrote " << p.string() << "\n";
  return se::kExitOk;
}

int cmd_verify(bool quick, const std::vector<int>& only) {
  se::AcceptanceOptions opt;
  opt.quick = quick;
  opt.only.insert(only.begin(), only.end());
  const auto results = se::run_acceptance(opt, std::cout);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
  return failed ? se::kExitCheckFailed : se::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative eta invariants, spectral flow and gluing checks on lattice Dirac operators"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = all cores)");

  std::string config_path;
  std::string out_dir = "out";
  auto* run = app.add_subcommand("run", "run one experiment from a JSON config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "artifact directory");
  run->add_option("--threads", threads, "worker threads (0 = all cores)");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "summarize an artifact directory and write .dat plot data");
  report->add_option("dir", report_dir, "artifact directory")->required();

  bool quick = false;
  std::vector<int> only;
  auto* verify = app.add_subcommand("verify-all", "run the acceptance suite");
  verify->add_flag("--quick", quick, "smaller ensembles and grids");
  verify->add_option("--only", only, "criterion numbers to run");
  verify->add_option("--threads", threads, "worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? se::kExitOk : se::kExitConfig;
  }

  if (const int rc = apply_threads(threads); rc != se::kExitOk) return rc;
  try {
    if (*run) return cmd_run(config_path, out_dir);
    if (*report) return cmd_report(report_dir);
    if (*verify) return cmd_verify(quick, only);
  } catch (const se::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return se::exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return se::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return se::kExitNumeric;
  }
  return se::kExitConfig;
}
