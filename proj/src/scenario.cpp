#include "pot/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <memory>
#include <sstream>

namespace pot {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end || !std::isfinite(out))
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

template <class E>
E choose(const std::string& key, const std::string& v, std::initializer_list<std::pair<const char*, E>> options) {
  std::string names;
  for (const auto& [name, value] : options) {
    if (v == name) return value;
    names += names.empty() ? name : std::string("|") + name;
  }
  throw ConfigError("key '" + key + "': expected " + names + ", got '" + v + "'");
}

}  // namespace

const std::vector<std::string>& scenario_keys() {
  static const std::vector<std::string> keys = {
      "scheme",   "filter",     "alpha",       "rho",        "F",         "T",        "N",
      "q",        "modulation", "ebn0_db",     "noise",      "fading",    "scenario", "sir_db",
      "eps_frac", "eps_probs",  "lambda",      "d_min",      "D",         "K0",       "n",
      "beta",     "r_max",      "pdp",         "n_tau",      "window",    "burst_k",  "mlse_block",
      "traceback", "bits_target", "seed",      "aggressor_symbols", "prune", "eps_list", "axis",
      "axis_values"};
  return keys;
}

Scenario Scenario::parse(std::istream& is, const std::string& source) {
  Scenario s;
  s.source_ = source;
  const auto& known = scenario_keys();
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const std::string where = source + ":" + std::to_string(number) + ": ";
    const std::string body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (s.find(key)) throw ConfigError(where + "duplicate key '" + key + "'");
    s.entries_.emplace_back(key, value);
  }
  return s;
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open scenario file '" + path + "'");
  return parse(f, path);
}

Scenario Scenario::from_string(const std::string& text) {
  std::istringstream is(text);
  return parse(is);
}

const std::string* Scenario::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

bool Scenario::has(const std::string& key) const { return find(key) != nullptr; }

std::string Scenario::text(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

double Scenario::number(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  return v ? parse_double(key, *v) : fallback;
}

long Scenario::integer(const std::string& key, long fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  long out = 0;
  const char* end = v->data() + v->size();
  const auto [ptr, ec] = std::from_chars(v->data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ConfigError("key '" + key + "': expected an integer, got '" + *v + "'");
  return out;
}

bool Scenario::flag(const std::string& key, bool fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  return choose<bool>(key, *v, {{"true", true}, {"false", false}, {"1", true}, {"0", false}});
}

std::optional<std::vector<double>> Scenario::list(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) return std::nullopt;
  std::vector<double> out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) throw ConfigError("key '" + key + "': empty list element");
    out.push_back(parse_double(key, t));
  }
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

void Scenario::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = value;
      return;
    }
  entries_.emplace_back(key, value);
}

FilterSpec filter_from(const Scenario& s) {
  const std::string kind = s.text("filter", "rrc");
  const FilterKind k =
      choose<FilterKind>("filter", kind, {{"rrc", FilterKind::Rrc}, {"gaussian", FilterKind::Gaussian}, {"rect", FilterKind::Rect}});
  FilterSpec f{k, s.number("alpha", 0.2), s.number("rho", 1.0)};
  f.validate();
  return f;
}

LatticeParams lattice_from(const Scenario& s) {
  const bool nofdm = s.text("scheme", "fmt") == "nofdm";
  const FilterSpec f = filter_from(s);
  // FMT defaults to the Nyquist spacing of its RRC; NOFDM to the critical lattice
  const double f_default = (!nofdm && f.kind == FilterKind::Rrc) ? 1.0 + f.alpha : 1.0;
  LatticeParams l{s.number("F", f_default), s.number("T", 1.0), static_cast<int>(s.integer("N", 16)), 1};
  l.validate();
  return l;
}

NetworkModel network_from(const Scenario& s) {
  NetworkModel n;
  n.lambda = s.number("lambda", n.lambda);
  n.d_min = s.number("d_min", n.d_min);
  n.D = s.number("D", n.D);
  n.K0 = s.number("K0", n.K0);
  n.n = s.number("n", n.n);
  n.beta = s.number("beta", n.beta);
  n.validate();
  return n;
}

TrialConfig trial_config_from(const Scenario& s) {
  TrialConfig c;
  c.scheme = choose<Scheme>("scheme", s.text("scheme", "fmt"), {{"fmt", Scheme::FmtZf}, {"nofdm", Scheme::NofdmMlse}});
  c.filter = filter_from(s);
  c.lattice = lattice_from(s);
  c.q = static_cast<int>(s.integer("q", c.q));
  c.modulation = static_cast<int>(s.integer("modulation", c.modulation));
  c.noise = s.flag("noise", c.noise);
  c.fading = s.flag("fading", c.fading);
  c.scenario = choose<ScenarioKind>("scenario", s.text("scenario", "none"),
                                    {{"none", ScenarioKind::None}, {"single", ScenarioKind::Single}, {"ppp", ScenarioKind::Ppp}});
  c.sir_db = s.number("sir_db", c.sir_db);
  c.network = network_from(s);

  const std::vector<double> frac = s.list("eps_frac").value_or(std::vector<double>{0.5});
  std::vector<double> probs = s.list("eps_probs").value_or(std::vector<double>(frac.size(), 1.0 / frac.size()));
  if (probs.size() != frac.size()) throw ConfigError("eps_frac and eps_probs differ in length");
  c.cfo.eps_levels.clear();
  for (double x : frac) c.cfo.eps_levels.push_back(x * c.lattice.F);
  c.cfo.probs = probs;

  c.aggressor_symbols = choose<AggressorSymbols>(
      "aggressor_symbols", s.text("aggressor_symbols", "gaussian"),
      {{"gaussian", AggressorSymbols::Gaussian}, {"qam", AggressorSymbols::Constellation}});
  c.r_max = s.number("r_max", c.r_max);
  c.n_tau = static_cast<int>(s.integer("n_tau", c.n_tau));
  const std::string pdp = s.text("pdp", "flat");
  c.pdp = choose<int>("pdp", pdp, {{"flat", 0}, {"exp4", 1}}) == 0 ? PowerDelayProfile::flat()
                                                                  : PowerDelayProfile::exp4(c.lattice.T);
  c.window.n_half = static_cast<int>(s.integer("window", c.window.n_half));
  c.burst_k = static_cast<int>(s.integer("burst_k", c.burst_k));
  c.mlse_block = static_cast<int>(s.integer("mlse_block", c.mlse_block));
  c.traceback = static_cast<int>(s.integer("traceback", c.traceback));
  const long bits = s.integer("bits_target", static_cast<long>(c.bits_target));
  if (bits < 0) throw ConfigError("bits_target must be nonnegative");
  c.bits_target = static_cast<std::uint64_t>(bits);
  const long seed = s.integer("seed", static_cast<long>(c.seed));
  c.seed = static_cast<std::uint64_t>(seed);
  c.prune = s.number("prune", c.prune);
  c.ebn0_db = s.list("ebn0_db").value_or(std::vector<double>{c.ebn0_db}).front();
  c.validate();
  return c;
}

TradeoffConfig tradeoff_config_from(const Scenario& s) {
  TradeoffConfig c;
  c.axis = parse_tradeoff_axis(s.text("axis", "F"));
  const auto v = s.list("axis_values");
  if (!v) throw ConfigError("axis_values is required");
  c.values = *v;
  c.alpha = s.number("alpha", c.alpha);
  c.q = static_cast<int>(s.integer("q", c.q));
  c.n_tau = static_cast<int>(s.integer("n_tau", c.n_tau));
  c.window.n_half = static_cast<int>(s.integer("window", c.window.n_half));
  return c;
}

std::vector<double> ebn0_grid_from(const Scenario& s) {
  const auto v = s.list("ebn0_db");
  if (!v) throw ConfigError("ebn0_db grid is required");
  return *v;
}

GainTableRequest gain_request_from(const Scenario& s) {
  GainTableRequest r;
  r.filter = filter_from(s);
  r.lattice = lattice_from(s);
  r.q = static_cast<int>(s.integer("q", r.q));
  for (double x : s.list("eps_list").value_or(std::vector<double>{0.0, 0.5})) r.eps.push_back(x * r.lattice.F);
  r.n_tau = static_cast<int>(s.integer("n_tau", r.n_tau));
  r.window.n_half = static_cast<int>(s.integer("window", r.window.n_half));
  return r;
}

GainTable compute_gain_table(const GainTableRequest& r) {
  if (r.eps.empty()) throw ConfigError("eps list is empty");
  const PrototypeFilter g = make_filter(r.filter, gain_rate(r.q, r.lattice, r.window));
  return build_gain_table(g, g, r.lattice, r.eps, r.n_tau, r.window);
}

GainTable gain_table_for(const TrialConfig& cfg) {
  GainTableRequest r;
  r.filter = cfg.filter;
  r.lattice = cfg.lattice;
  r.q = cfg.q;
  r.eps = cfg.cfo.eps_levels;
  r.n_tau = cfg.n_tau;
  r.window = cfg.window;
  return compute_gain_table(r);
}

Transform interference_transform(const TrialConfig& cfg, const GainTable& table) {
  table.validate();
  if (cfg.scenario == ScenarioKind::None) return Transform::none();
  std::vector<InterferenceLevel> levels;
  for (std::size_t j = 0; j < cfg.cfo.eps_levels.size(); ++j) {
    std::size_t col = 0;
    try {
      col = table.eps_index(cfg.cfo.eps_levels[j]);
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
    levels.push_back({cfg.cfo.probs[j], psi_profile(table, col)});
  }
  if (cfg.scenario == ScenarioKind::Ppp) return ppp_transform(cfg.network, std::move(levels));

  const double c = sir_to_ratio(cfg.sir_db);
  auto shared = std::make_shared<const std::vector<InterferenceLevel>>(std::move(levels));
  auto mix = [shared](auto&& per_level) {
    double s = 0.0;
    for (const auto& l : *shared) s += l.prob * per_level(l.psi);
    return s;
  };
  Transform t;
  t.value = [c, mix](double z) {
    return mix([&](const std::vector<double>& psi) { return laplace_single(z, c, psi); });
  };
  t.complement = [c, mix](double z) {
    return mix([&](const std::vector<double>& psi) {
      double s = 0.0;
      for (double p : psi) s += z * c * p / (1.0 + z * c * p);
      return s / static_cast<double>(psi.size());
    });
  };
  return t;
}

BerCurve analytic_ber(const TrialConfig& cfg, const std::vector<double>& ebn0_db, const std::optional<GainTable>& table) {
  if (cfg.scheme != Scheme::FmtZf) throw ConfigError("the closed-form BER covers FMT with ZF reception only");
  if (ebn0_db.empty()) throw ConfigError("Eb/N0 grid is empty");
  const ModQam mod = ModQam::make(cfg.modulation);
  const Transform t = cfg.scenario == ScenarioKind::None
                          ? Transform::none()
                          : interference_transform(cfg, table ? *table : gain_table_for(cfg));
  if (cfg.noise) return analytic_curve(ebn0_db, mod, t);
  BerCurve c;
  c.ebn0_db = ebn0_db;
  c.ber.assign(ebn0_db.size(), avg_ber(INFINITY, mod, t));
  return c;
}

McCurve mc_ber(const TrialConfig& cfg, const std::vector<double>& ebn0_db) {
  if (ebn0_db.empty()) throw ConfigError("Eb/N0 grid is empty");
  McCurve out;
  out.curve.ebn0_db = ebn0_db;
  for (std::size_t k = 0; k < ebn0_db.size(); ++k) {
    TrialConfig c = cfg;
    c.ebn0_db = ebn0_db[k];
    c.seed = chunk_seed(cfg.seed, k);
    const TrialResult r = run_trial(c);
    out.curve.ber.push_back(r.ber);
    out.curve.ci_halfwidth.push_back(r.ci_halfwidth);
    out.curve.bits.push_back(static_cast<double>(r.bits));
    out.points.push_back(r);
  }
  return out;
}

}  // namespace pot
