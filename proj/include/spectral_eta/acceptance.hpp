#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace spectral_eta {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double runtime_limit = 0.0;  // seconds, 0 when unconstrained
};

struct AcceptanceOptions {
  // Smaller ensembles and grids; tolerances are unchanged.
  bool quick = false;
  // Criteria to run (empty runs all twelve).
  std::set<int> only;
};

/// Runs the acceptance criteria in order, writing one line per criterion to
/// `out` as soon as it finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& out);

std::string format_line(const CriterionResult& r);

}  // namespace spectral_eta
