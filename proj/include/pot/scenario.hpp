#pragma once

// Scenario files and the pipelines that turn them into gain tables, trade-off
// curves and BER curves.
//
// A scenario is a list of `key = value` lines; `#` starts a comment and lists
// are comma-separated. CFO levels and gain-table eps values are fractions of F.
// Unknown keys are a ConfigError so typos do not silently fall back to defaults.

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pot/analysis.hpp"
#include "pot/interference.hpp"
#include "pot/montecarlo.hpp"

namespace pot {

class Scenario {
 public:
  static Scenario parse(std::istream& is, const std::string& source = "<stream>");
  static Scenario load(const std::string& path);
  static Scenario from_string(const std::string& text);

  const std::string& source() const { return source_; }
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  bool has(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  /// Empty when the key is absent; a present but empty list is a ConfigError.
  std::optional<std::vector<double>> list(const std::string& key) const;

  void set(const std::string& key, const std::string& value);

 private:
  const std::string* find(const std::string& key) const;
  std::string source_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Keys every builder understands.
const std::vector<std::string>& scenario_keys();

FilterSpec filter_from(const Scenario& s);
LatticeParams lattice_from(const Scenario& s);
NetworkModel network_from(const Scenario& s);
TrialConfig trial_config_from(const Scenario& s);
TradeoffConfig tradeoff_config_from(const Scenario& s);
/// Eb/N0 grid in dB (key ebn0_db); ConfigError when absent or empty.
std::vector<double> ebn0_grid_from(const Scenario& s);

struct GainTableRequest {
  FilterSpec filter;
  LatticeParams lattice{1.2, 1.0, 1, 1};
  int q = 8;
  std::vector<double> eps;  ///< absolute, in F0
  int n_tau = 64;
  GainWindow window;
};
GainTableRequest gain_request_from(const Scenario& s);
GainTable compute_gain_table(const GainTableRequest& r);

/// Gain table on the simulator's tau grid and CFO levels.
GainTable gain_table_for(const TrialConfig& cfg);
/// L_I(z) for the configured scenario; the table must hold every CFO level.
Transform interference_transform(const TrialConfig& cfg, const GainTable& table);
/// Closed-form curve for FMT-ZF; ConfigError for NOFDM.
BerCurve analytic_ber(const TrialConfig& cfg, const std::vector<double>& ebn0_db,
                      const std::optional<GainTable>& table = std::nullopt);

struct McCurve {
  BerCurve curve;
  std::vector<TrialResult> points;
};
/// One run_trial per grid point; point k uses seed chunk_seed(cfg.seed, k).
McCurve mc_ber(const TrialConfig& cfg, const std::vector<double>& ebn0_db);

}  // namespace pot
