#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace spectral_eta {

struct ReportSummary {
  std::vector<std::filesystem::path> written;
  int passed = 0;
  int failed = 0;
  int informational = 0;
  std::string table;  // also written to summary.txt
};

/// Reads results.csv, samples.csv and meta.json from `dir` and writes
/// whitespace-separated .dat files next to them:
///   flow.dat       r, then one column per tracked eigenvalue
///   crossings.dat  r, direction
///   decay.dat      t, log|trace| (fitted line in the header)
///   theta.dat      θ, ξ̄, ξ
///   ssf.dat        breakpoint, σ on the interval to its right
///   variation.dat  r, c_n, dη/dr
/// Other series go to <series>.dat as x, index, value.
/// Throws Error(config_error) when an artifact is missing.
ReportSummary write_report(const std::filesystem::path& dir);

/// Splits one CSV line, honouring double quotes.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace spectral_eta
