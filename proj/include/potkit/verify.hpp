#pragma once

// Self-check suites run by `potkit verify`. Each check compares a computed
// quantity against a closed form or an exact property and records the values.

#include <iosfwd>
#include <string>
#include <vector>

namespace potkit {

struct CheckResult {
  std::string suite;
  std::string name;
  bool pass = false;
  /// Values behind the verdict, 6 significant digits.
  std::string detail;
  /// Informational lines (reported discrepancies) never fail.
  bool informational = false;
};

/// radial, functional, equilibrium, voxel, forces, photoeffect, all.
const std::vector<std::string>& known_suites();

/// Throws InvalidInput for an unknown suite name. Solver errors inside a
/// check are caught and recorded as failures.
std::vector<CheckResult> run_suite(const std::string& name);

/// "PASS suite: name (detail)" per check, "INFO ..." for informational ones,
/// then "passed N/M".
void write_suite_report(const std::vector<CheckResult>& results, std::ostream& out);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace potkit
