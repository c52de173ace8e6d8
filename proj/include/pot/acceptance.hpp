#pragma once

// The acceptance suite behind `pot_sim validate` and the acceptance test.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pot {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  bool quick = false;             ///< only the fast subset (1-6, 10)
  std::vector<int> only;          ///< restrict to these ids when nonempty
  std::optional<std::string> gain_table_path;  ///< replaces the computed table in criterion 4
  std::uint64_t seed = 20240611;
};

inline constexpr int kCriterionCount = 10;

bool in_quick_subset(int id);
std::string criterion_name(int id);

/// Runs the selected criteria in order, printing one line per criterion to
/// `log` as it finishes. A criterion that throws is reported as a failure.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream* log = nullptr);

std::string format_result(const CriterionResult& r);

}  // namespace pot
