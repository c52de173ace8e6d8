#include "pot/interference.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "pot/parallel.hpp"
#include "pot/simd/kernels.hpp"

namespace pot {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double half_extent(const PrototypeFilter& g) {
  const auto reach = std::max(std::abs(g.first_index()), std::abs(g.last_index())) + 1;
  return static_cast<double>(reach) / g.rate();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

int gain_rate(int q, const LatticeParams& lattice, const GainWindow& window) {
  if (window.n_half < 0) throw ParameterError("subcarrier window must be nonnegative");
  LatticeParams wide = lattice;
  wide.N = 2 * window.n_half + 1;
  return signal_rate(q, wide);
}

int covering_k(const PrototypeFilter& tx, const PrototypeFilter& rx, const LatticeParams& lattice) {
  lattice.validate();
  const double reach = half_extent(tx) + half_extent(rx);
  return static_cast<int>(std::ceil(reach / lattice.T)) + 2;
}

double ProjectionTable::total_energy() const {
  double s = 0.0;
  for (const cd& v : c) s += std::norm(v);
  return s;
}

ProjectionEngine::ProjectionEngine(const PrototypeFilter& tx, const PrototypeFilter& rx, const LatticeParams& lattice,
                                   double eps, const GainWindow& window)
    : tx_(&tx), rx_(&rx), lattice_(lattice), eps_(eps), n_half_(window.n_half) {
  lattice.validate();
  if (tx.rate() != rx.rate()) throw ParameterError("tx and rx filters sampled at different rates");
  if (window.n_half < 0 || window.k_sum < 0) throw ParameterError("gain window must be nonnegative");
  k_sum_ = window.k_sum > 0 ? window.k_sum : covering_k(tx, rx, lattice);
  const int rate = rx.rate();
  const std::size_t len = rx.samples().size();
  phasors_.resize(static_cast<std::size_t>(2 * n_half_ + 1));
  for (int n = -n_half_; n <= n_half_; ++n) {
    auto& p = phasors_[static_cast<std::size_t>(n + n_half_)];
    p.resize(len);
    const double f = n * lattice.F + eps;
    for (std::size_t i = 0; i < len; ++i) {
      const double t = static_cast<double>(rx.first_index() + static_cast<std::int64_t>(i)) / rate;
      p[i] = std::polar(1.0, -kTwoPi * f * t);
    }
  }
}

ProjectionTable ProjectionEngine::table(double tau) const {
  const int rate = rx_->rate();
  const std::int64_t a = rx_->first_index();
  const std::int64_t b = rx_->last_index();
  const auto rx = rx_->samples();
  const double tx_lo = static_cast<double>(tx_->first_index() - 1) / rate;
  const double tx_hi = static_cast<double>(tx_->last_index() + 1) / rate;

  ProjectionTable out;
  out.k_sum = k_sum_;
  out.n_half = n_half_;
  const int n_count = 2 * n_half_ + 1;
  out.c.assign(static_cast<std::size_t>(2 * k_sum_ - 1) * static_cast<std::size_t>(n_count), cd{});

  // With an integral symbol shift one tau-shifted evaluation serves every m.
  const double tr = lattice_.T * rate;
  const bool integral = std::abs(tr - std::round(tr)) < 1e-9;
  const auto shift = static_cast<std::int64_t>(std::llround(tr));
  const std::int64_t ext_lo = a - static_cast<std::int64_t>(k_sum_ - 1) * shift;
  std::vector<double> ext;
  if (integral) {
    const std::int64_t ext_hi = b + static_cast<std::int64_t>(k_sum_ - 1) * shift;
    ext.resize(static_cast<std::size_t>(ext_hi - ext_lo + 1));
    for (std::int64_t j = ext_lo; j <= ext_hi; ++j)
      ext[static_cast<std::size_t>(j - ext_lo)] = tx_->value(static_cast<double>(j) / rate - tau);
  }

  std::vector<cd> w;
  for (int m = out.m_min(); m <= out.m_max(); ++m) {
    const double dt = m * lattice_.T + tau;
    const std::int64_t lo = std::max(a, static_cast<std::int64_t>(std::floor((tx_lo + dt) * rate)));
    const std::int64_t hi = std::min(b, static_cast<std::int64_t>(std::ceil((tx_hi + dt) * rate)));
    if (hi < lo) continue;
    const auto len = static_cast<std::size_t>(hi - lo + 1);
    w.resize(len);
    bool any = false;
    for (std::size_t i = 0; i < len; ++i) {
      const std::int64_t k = lo + static_cast<std::int64_t>(i);
      const double v = integral ? ext[static_cast<std::size_t>(k - static_cast<std::int64_t>(m) * shift - ext_lo)]
                                : tx_->value(static_cast<double>(k) / rate - dt);
      w[i] = v * std::conj(rx[static_cast<std::size_t>(k - a)]);
      any = any || v != 0.0;
    }
    if (!any) continue;
    const std::span<const cd> ws(w);
    for (int n = -n_half_; n <= n_half_; ++n) {
      const auto& p = phasors_[static_cast<std::size_t>(n + n_half_)];
      const std::span<const cd> ps(p.data() + (lo - a), len);
      out.c[static_cast<std::size_t>(m - out.m_min()) * static_cast<std::size_t>(n_count) +
            static_cast<std::size_t>(n + n_half_)] = simd::dot_conj(ws, ps) / static_cast<double>(rate);
    }
  }
  return out;
}

double mean_other_gain(const PrototypeFilter& tx, const PrototypeFilter& rx, const LatticeParams& lattice, double tau,
                       double eps, const GainWindow& window) {
  if (!(tau >= 0.0 && tau < lattice.T)) throw ParameterError("timing offset must lie in [0, T)");
  return ProjectionEngine(tx, rx, lattice, eps, window).table(tau).total_energy();
}

double mean_self_gain(const PrototypeFilter& g, const LatticeParams& lattice, const GainWindow& window) {
  const ProjectionTable t = ProjectionEngine(g, g, lattice, 0.0, window).table(0.0);
  return t.total_energy() - std::norm(t.at(0, 0));
}

namespace {

std::vector<double> tau_nodes(double T, int n, TauRule rule) {
  std::vector<double> nodes;
  if (rule == TauRule::Trapezoid) {
    for (int j = 0; j <= n; ++j) nodes.push_back(T * j / n);
  } else {
    for (int j = 0; j < n; ++j) nodes.push_back(T * (j + 0.5) / n);
  }
  return nodes;
}

}  // namespace

double timing_averaged_gain(const PrototypeFilter& tx, const PrototypeFilter& rx, const LatticeParams& lattice,
                            double eps, int n_tau_points, const GainWindow& window, TauRule rule) {
  if (n_tau_points < 16) throw ParameterError("timing average needs at least 16 points");
  const ProjectionEngine engine(tx, rx, lattice, eps, window);
  const auto nodes = tau_nodes(lattice.T, n_tau_points, rule);
  std::vector<double> vals(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t i) { vals[i] = engine.table(nodes[i]).total_energy(); });
  double s = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const bool end = rule == TauRule::Trapezoid && (i == 0 || i + 1 == vals.size());
    s += end ? 0.5 * vals[i] : vals[i];
  }
  return s / n_tau_points;
}

double projection_energy_ratio(const BasebandSignal& s, const PrototypeFilter& g, const LatticeParams& lattice) {
  const double e = s.energy();
  if (!(e > 0.0)) throw ParameterError("test signal has zero energy");
  // zero-pad to the analysis window
  BasebandSignal padded;
  padded.rate = s.rate;
  const std::int64_t lo_shift = std::llround((-lattice.K + 1) * lattice.T * s.rate);
  const std::int64_t hi_shift = std::llround((lattice.K - 1) * lattice.T * s.rate);
  padded.start = std::min(s.start, g.first_index() + lo_shift);
  const std::int64_t end = std::max(s.end(), g.last_index() + hi_shift + 1);
  padded.samples.assign(static_cast<std::size_t>(end - padded.start), cd{});
  accumulate(padded, s);
  const SymbolGrid grid = analyze(padded, g, lattice);
  double total = 0.0;
  for (const cd& v : grid.values()) total += std::norm(v);
  return total / e;
}

FrameBounds frame_bounds_estimate(const PrototypeFilter& g, const LatticeParams& lattice, int n_trials,
                                  std::uint64_t seed, TestSignalFamily family) {
  if (n_trials < 100) throw ParameterError("frame bound estimation needs at least 100 trials");
  lattice.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  FrameBounds fb;
  fb.a = std::numeric_limits<double>::infinity();
  fb.b = 0.0;
  const double n_center = 0.5 * (lattice.N - 1);
  for (int trial = 0; trial < n_trials; ++trial) {
    BasebandSignal s;
    if (family == TestSignalFamily::Synthesized) {
      SymbolGrid grid(lattice.K, lattice.N);
      for (int m = grid.m_min(); m <= grid.m_max(); ++m)
        for (int n = 0; n < grid.N(); ++n) grid.at(m, n) = {normal(rng), normal(rng)};
      s = synthesize(grid, g, lattice);
    } else {
      const int parts = 1 + static_cast<int>(unit(rng) * 3.0) % 3;
      for (int p = 0; p < parts; ++p) {
        const double dt = (unit(rng) - 0.5) * lattice.T;
        const double df = (n_center + unit(rng) - 0.5) * lattice.F;
        accumulate(s, modulated_shift(g, 0, 0, lattice, dt, df), cd{normal(rng), normal(rng)});
      }
    }
    const double r = projection_energy_ratio(s, g, lattice);
    fb.a = std::min(fb.a, r);
    fb.b = std::max(fb.b, r);
    ++fb.trials;
  }
  return fb;
}

std::string to_string(TradeoffAxis axis) {
  switch (axis) {
    case TradeoffAxis::OrthogonalFixedAlpha: return "F";
    case TradeoffAxis::OrthogonalMatchedAlpha: return "F_matched";
    case TradeoffAxis::GaussianRho: return "rho";
  }
  return "F";
}

TradeoffAxis parse_tradeoff_axis(const std::string& name) {
  if (name == "F") return TradeoffAxis::OrthogonalFixedAlpha;
  if (name == "F_matched") return TradeoffAxis::OrthogonalMatchedAlpha;
  if (name == "rho") return TradeoffAxis::GaussianRho;
  throw ConfigError("unknown trade-off axis '" + name + "' (expected F, F_matched or rho)");
}

TradeoffCurve tradeoff_sweep(const TradeoffConfig& config) {
  TradeoffCurve curve;
  curve.axis = config.axis;
  for (double v : config.values) {
    LatticeParams lattice;
    FilterSpec spec;
    switch (config.axis) {
      case TradeoffAxis::OrthogonalFixedAlpha:
        if (!(v >= 1.0)) throw ParameterError("subcarrier spacing below F0 is not an orthogonal scheme");
        lattice.F = v;
        spec = FilterSpec::rrc(config.alpha);
        break;
      case TradeoffAxis::OrthogonalMatchedAlpha:
        if (!(v >= 1.0 && v <= 2.0)) throw ParameterError("matched roll-off needs F in [1, 2]");
        lattice.F = v;
        spec = FilterSpec::rrc(v - 1.0);
        break;
      case TradeoffAxis::GaussianRho:
        spec = FilterSpec::gaussian(v);
        break;
    }
    const PrototypeFilter g = make_filter(spec, gain_rate(config.q, lattice, config.window));
    TradeoffRow row;
    row.parameter = v;
    row.spectral_efficiency = 1.0 / lattice.density();
    row.psi_other_full = timing_averaged_gain(g, g, lattice, 0.0, config.n_tau, config.window);
    row.psi_other_partial = timing_averaged_gain(g, g, lattice, 0.5 * lattice.F, config.n_tau, config.window);
    row.psi_self = mean_self_gain(g, lattice, config.window);
    curve.rows.push_back(row);
  }
  return curve;
}

double GainTable::tau_mean(std::size_t i_eps) const {
  double s = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) s += at(i, i_eps);
  return s / static_cast<double>(tau.size());
}

double GainTable::tau_spread(std::size_t i_eps) const {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    lo = std::min(lo, at(i, i_eps));
    hi = std::max(hi, at(i, i_eps));
  }
  return hi - lo;
}

double GainTable::tau_stddev(std::size_t i_eps) const {
  const double mu = tau_mean(i_eps);
  double s = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) s += (at(i, i_eps) - mu) * (at(i, i_eps) - mu);
  return std::sqrt(s / static_cast<double>(tau.size()));
}

std::size_t GainTable::eps_index(double value) const {
  for (std::size_t j = 0; j < eps.size(); ++j)
    if (std::abs(eps[j] - value) < 1e-9) return j;
  throw ParameterError("gain table has no column for eps = " + fmt(value));
}

void GainTable::validate() const {
  if (tau.empty() || eps.empty()) throw ConfigError("gain table is empty");
  if (psi.size() != tau.size() * eps.size()) throw ConfigError("gain table is not a full tau x eps grid");
  if (!(T > 0.0)) throw ConfigError("gain table symbol spacing must be positive");
  for (double t : tau)
    if (!(t >= 0.0 && t < T)) throw ConfigError("gain table tau outside [0, T)");
  for (double p : psi)
    if (!std::isfinite(p) || p < 0.0) throw ConfigError("gain table entry is negative or not finite");
  if (!std::isfinite(psi_self) || psi_self < 0.0) throw ConfigError("gain table psi_self is negative or not finite");
}

GainTable build_gain_table(const PrototypeFilter& tx, const PrototypeFilter& rx, const LatticeParams& lattice,
                           const std::vector<double>& eps_list, int n_tau, const GainWindow& window) {
  if (eps_list.empty()) throw ParameterError("gain table needs at least one eps value");
  if (n_tau < 1) throw ParameterError("gain table needs at least one tau point");
  GainTable table;
  table.T = lattice.T;
  table.eps = eps_list;
  for (int j = 0; j < n_tau; ++j) table.tau.push_back(lattice.T * j / n_tau);
  table.psi.assign(table.tau.size() * table.eps.size(), 0.0);
  for (std::size_t e = 0; e < table.eps.size(); ++e) {
    const ProjectionEngine engine(tx, rx, lattice, table.eps[e], window);
    parallel_for(table.tau.size(), [&](std::size_t i) {
      table.psi[i * table.eps.size() + e] = engine.table(table.tau[i]).total_energy();
    });
  }
  // self gain is defined for tx = rx; with distinct filters it uses the receiver's
  table.psi_self = mean_self_gain(rx, lattice, window);
  return table;
}

void write_gain_table_csv(std::ostream& os, const GainTable& table) {
  os << "# schema: pot.gain_table.v1\n";
  os << "# psi_self=" << fmt(table.psi_self) << "\n";
  os << "# T=" << fmt(table.T) << "\n";
  os << "tau,eps,psi\n";
  for (std::size_t i = 0; i < table.tau.size(); ++i)
    for (std::size_t j = 0; j < table.eps.size(); ++j)
      os << fmt(table.tau[i]) << ',' << fmt(table.eps[j]) << ',' << fmt(table.at(i, j)) << '\n';
}

void write_gain_panel_csv(std::ostream& os, const GainTable& table) {
  os << "# schema: pot.gain_panel.v1\n";
  os << "tau";
  for (double e : table.eps) os << ",psi_eps_" << fmt(e);
  os << '\n';
  for (std::size_t i = 0; i < table.tau.size(); ++i) {
    os << fmt(table.tau[i]);
    for (std::size_t j = 0; j < table.eps.size(); ++j) os << ',' << fmt(table.at(i, j));
    os << '\n';
  }
}

namespace {

double parse_number(const std::string& s, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("gain table line " + std::to_string(line) + ": '" + s + "' is not a number");
  }
  if (used != s.size()) throw ConfigError("gain table line " + std::to_string(line) + ": trailing characters");
  return v;
}

}  // namespace

GainTable read_gain_table_csv(std::istream& is) {
  GainTable table;
  std::string line;
  int line_no = 0;
  bool schema = false, header = false, have_self = false;
  std::map<std::pair<std::size_t, std::size_t>, double> cells;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# schema: ", 0) == 0) {
        if (line != "# schema: pot.gain_table.v1") throw ConfigError("unsupported gain table schema: " + line.substr(10));
        schema = true;
      } else if (line.rfind("# psi_self=", 0) == 0) {
        table.psi_self = parse_number(line.substr(11), line_no);
        have_self = true;
      } else if (line.rfind("# T=", 0) == 0) {
        table.T = parse_number(line.substr(4), line_no);
      }
      continue;
    }
    if (!header) {
      if (line != "tau,eps,psi") throw ConfigError("gain table header must be 'tau,eps,psi'");
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 3) throw ConfigError("gain table line " + std::to_string(line_no) + ": expected 3 columns");
    const double tau = parse_number(f[0], line_no), eps = parse_number(f[1], line_no);
    const double psi = parse_number(f[2], line_no);
    auto locate = [](std::vector<double>& axis, double v) {
      for (std::size_t k = 0; k < axis.size(); ++k)
        if (axis[k] == v) return k;
      axis.push_back(v);
      return axis.size() - 1;
    };
    const auto key = std::make_pair(locate(table.tau, tau), locate(table.eps, eps));
    if (!cells.emplace(key, psi).second)
      throw ConfigError("gain table line " + std::to_string(line_no) + ": duplicate (tau, eps)");
  }
  if (!schema) throw ConfigError("gain table is missing its schema line");
  if (!header) throw ConfigError("gain table is missing its column header");
  if (!have_self) throw ConfigError("gain table is missing psi_self");
  if (cells.size() != table.tau.size() * table.eps.size())
    throw ConfigError("gain table is not a full tau x eps grid");
  table.psi.resize(cells.size());
  for (const auto& [k, v] : cells) table.psi[k.first * table.eps.size() + k.second] = v;
  table.validate();
  return table;
}

}  // namespace pot
