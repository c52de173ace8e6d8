// pot_sim: gain tables, trade-off curves, BER sweeps and the acceptance suite.
//
// Exit codes: 0 success, 1 validation or numerical failure, 2 usage error.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pot/acceptance.hpp"
#include "pot/errors.hpp"
#include "pot/io.hpp"
#include "pot/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

pot::Scenario load(const Common& c) {
  pot::Scenario s = pot::Scenario::load(c.config);
  if (c.seed) s.set("seed", std::to_string(*c.seed));
  return s;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw pot::ConfigError("cannot write '" + path + "'");
  f << text;
}

void finish(const std::string& command, const Common& c, const pot::Scenario& s, std::chrono::steady_clock::time_point t0,
            std::vector<std::string> warnings = {}) {
  pot::RunManifest m;
  m.command = command;
  m.scenario_path = c.config;
  m.scenario = s.entries();
  m.output_path = c.out;
  m.seed = static_cast<std::uint64_t>(s.integer("seed", 1));
  m.tool_version = pot::tool_version();
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m.warnings = std::move(warnings);
  pot::write_manifest(m);
}

int cmd_gain_table(const Common& c, const std::string& format) {
  const auto t0 = std::chrono::steady_clock::now();
  const pot::Scenario s = load(c);
  const pot::GainTable t = pot::compute_gain_table(pot::gain_request_from(s));
  std::ostringstream os;
  if (format == "panel") pot::write_gain_panel_csv(os, t);
  else pot::write_gain_table_csv(os, t);
  write_file(c.out, os.str());
  finish("gain-table", c, s, t0);
  return kOk;
}

int cmd_tradeoff(const Common& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const pot::Scenario s = load(c);
  const pot::TradeoffCurve curve = pot::tradeoff_sweep(pot::tradeoff_config_from(s));
  std::ostringstream os;
  pot::write_tradeoff_csv(os, curve);
  write_file(c.out, os.str());
  finish("tradeoff", c, s, t0);
  return kOk;
}

int cmd_ber(const Common& c, const std::string& mode, const std::string& table_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const pot::Scenario s = load(c);
  const pot::TrialConfig cfg = pot::trial_config_from(s);
  const std::vector<double> grid = pot::ebn0_grid_from(s);
  std::optional<pot::GainTable> table;
  if (!table_path.empty()) {
    std::ifstream f(table_path);
    if (!f) throw pot::ConfigError("cannot open gain table '" + table_path + "'");
    table = pot::read_gain_table_csv(f);
  }
  std::optional<pot::BerCurve> analytic, mc;
  std::vector<double> sigma;
  std::vector<std::string> warnings;
  if (mode != "mc") analytic = pot::analytic_ber(cfg, grid, table);
  if (mode != "analytic") {
    const pot::McCurve r = pot::mc_ber(cfg, grid);
    mc = r.curve;
    for (std::size_t k = 0; k < r.points.size(); ++k) {
      sigma.push_back(r.points[k].sigma);
      if (r.points[k].warning) warnings.push_back("ebn0_db=" + std::to_string(grid[k]) + ": " + r.points[k].note);
    }
  }
  std::ostringstream os;
  pot::write_ber_csv(os, grid, analytic, mc, sigma);
  write_file(c.out, os.str());
  finish("ber --mode " + mode, c, s, t0, warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return kOk;
}

int cmd_validate(bool quick, const std::string& table_path, const std::vector<int>& only, std::optional<std::uint64_t> seed) {
  pot::AcceptanceOptions o;
  o.quick = quick;
  o.only = only;
  if (!table_path.empty()) o.gain_table_path = table_path;
  if (seed) o.seed = *seed;
  const auto results = pot::run_acceptance(o, &std::cout);
  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::cout << (failed == 0 ? "all " : "") << results.size() - static_cast<std::size_t>(failed) << "/" << results.size()
            << " criteria passed\n";
  return failed == 0 ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partially overlapping tones: gain tables, trade-offs, BER analysis and simulation"};
  app.require_subcommand(1);

  Common gain, trade, ber;
  std::string format = "long", mode = "analytic", ber_table, validate_table;
  bool quick = false;
  std::vector<int> only;
  std::optional<std::uint64_t> validate_seed;

  auto add_common = [](CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output CSV; a .manifest file is written next to it")->required();
    sub->add_option("--seed", c.seed, "overrides the scenario seed");
  };

  auto* g = app.add_subcommand("gain-table", "tau x eps gain table for one filter and lattice");
  add_common(g, gain);
  g->add_option("--format", format, "long (tau,eps,psi rows) or panel (one column per eps)")
      ->check(CLI::IsMember({"long", "panel"}));

  auto* t = app.add_subcommand("tradeoff", "spectral efficiency versus interference gain");
  add_common(t, trade);

  auto* b = app.add_subcommand("ber", "BER versus Eb/N0");
  add_common(b, ber);
  b->add_option("--mode", mode, "analytic, mc or both")->check(CLI::IsMember({"analytic", "mc", "both"}));
  b->add_option("--gain-table", ber_table, "use this gain table for the analytic curve")->check(CLI::ExistingFile);

  auto* v = app.add_subcommand("validate", "run the acceptance criteria");
  v->add_flag("--quick", quick, "fast subset only");
  v->add_option("--config", validate_table, "gain table CSV to check in place of the computed one");
  v->add_option("--only", only, "criterion ids to run");
  v->add_option("--seed", validate_seed, "master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return cmd_gain_table(gain, format);
    if (*t) return cmd_tradeoff(trade);
    if (*b) return cmd_ber(ber, mode, ber_table);
    if (*v) return cmd_validate(quick, validate_table, only, validate_seed);
  } catch (const pot::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
