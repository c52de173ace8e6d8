#pragma once

// CSV writers for BER and trade-off curves, and run manifests.
//
// Every CSV starts with a `# schema: <name>` line. Numbers use 17 significant
// digits so a rerun with the same inputs reproduces the file byte for byte.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pot/analysis.hpp"
#include "pot/interference.hpp"

namespace pot {

inline constexpr const char* kBerSchema = "pot.ber_curve.v1";
inline constexpr const char* kTradeoffSchema = "pot.tradeoff.v1";

/// |analytic - mc| / sigma; infinite when sigma is zero and the values differ.
double agreement(double analytic, double mc, double sigma);

/// Columns: ebn0_db, ber_analytic, ber_mc, ci_halfwidth, bits, agreement.
/// Missing curves leave their columns empty; `sigma` feeds the agreement column.
void write_ber_csv(std::ostream& os, const std::vector<double>& ebn0_db, const std::optional<BerCurve>& analytic,
                   const std::optional<BerCurve>& mc, const std::vector<double>& sigma = {});

/// Columns: parameter, spectral_efficiency, psi_other_full, psi_other_partial, psi_self.
void write_tradeoff_csv(std::ostream& os, const TradeoffCurve& curve);

/// Sits next to every output as <output>.manifest (JSON).
struct RunManifest {
  std::string command;
  std::string scenario_path;
  std::vector<std::pair<std::string, std::string>> scenario;  ///< parsed key/value inputs
  std::string output_path;
  std::uint64_t seed = 0;
  std::string tool_version;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
};

std::string manifest_json(const RunManifest& m);
void write_manifest(const RunManifest& m);
RunManifest read_manifest(const std::string& path);

std::string tool_version();

}  // namespace pot
