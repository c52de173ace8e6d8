#include "pot/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "pot/errors.hpp"

namespace pot {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

double agreement(double analytic, double mc, double sigma) {
  const double d = std::abs(analytic - mc);
  if (sigma > 0.0) return d / sigma;
  return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

void write_ber_csv(std::ostream& os, const std::vector<double>& ebn0_db, const std::optional<BerCurve>& analytic,
                   const std::optional<BerCurve>& mc, const std::vector<double>& sigma) {
  if (analytic && analytic->size() != ebn0_db.size()) throw LengthError("analytic curve length differs from grid");
  if (mc && (mc->size() != ebn0_db.size() || mc->ci_halfwidth.size() != ebn0_db.size()))
    throw LengthError("Monte Carlo curve length differs from grid");
  const bool both = analytic && mc;
  if (both && sigma.size() != ebn0_db.size()) throw LengthError("sigma length differs from grid");
  os << "# schema: " << kBerSchema << "\n";
  os << "ebn0_db,ber_analytic,ber_mc,ci_halfwidth,bits,agreement\n";
  for (std::size_t k = 0; k < ebn0_db.size(); ++k) {
    os << num(ebn0_db[k]) << ',';
    if (analytic) os << num(analytic->ber[k]);
    os << ',';
    if (mc) os << num(mc->ber[k]) << ',' << num(mc->ci_halfwidth[k]) << ',' << num(mc->bits[k]);
    else os << ",,";
    os << ',';
    if (both) os << num(agreement(analytic->ber[k], mc->ber[k], sigma[k]));
    os << '\n';
  }
}

void write_tradeoff_csv(std::ostream& os, const TradeoffCurve& curve) {
  os << "# schema: " << kTradeoffSchema << "\n";
  os << "# axis=" << to_string(curve.axis) << "\n";
  os << "parameter,spectral_efficiency,psi_other_full,psi_other_partial,psi_self\n";
  for (const auto& r : curve.rows)
    os << num(r.parameter) << ',' << num(r.spectral_efficiency) << ',' << num(r.psi_other_full) << ','
       << num(r.psi_other_partial) << ',' << num(r.psi_self) << '\n';
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["schema"] = "pot.manifest.v1";
  j["command"] = m.command;
  j["scenario_path"] = m.scenario_path;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.scenario) inputs[k] = v;
  j["scenario"] = inputs;
  j["output_path"] = m.output_path;
  j["seed"] = m.seed;
  j["tool_version"] = m.tool_version;
  j["wall_seconds"] = m.wall_seconds;
  j["warnings"] = m.warnings;
  return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& m) {
  const std::string path = m.output_path + ".manifest";
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write manifest '" + path + "'");
  f << manifest_json(m);
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open manifest '" + path + "'");
  try {
    const auto j = nlohmann::ordered_json::parse(f);
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.scenario_path = j.at("scenario_path").get<std::string>();
    for (const auto& [k, v] : j.at("scenario").items()) m.scenario.emplace_back(k, v.get<std::string>());
    m.output_path = j.at("output_path").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.wall_seconds = j.at("wall_seconds").get<double>();
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed manifest '" + path + "': " + e.what());
  }
}

std::string tool_version() { return "pot_sim 1.0.0"; }

}  // namespace pot
