#include "pot/montecarlo.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "pot/mlse.hpp"
#include "pot/parallel.hpp"

namespace pot {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::size_t kBurstsPerChunk = 256;

cd complex_normal(std::mt19937_64& rng, double variance) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

struct Entry {
  int dm;
  int dn;
  cd a;
};

struct Box {
  int dm_lo, dm_hi, dn_lo, dn_hi;
};

// Projection coefficients sorted by decreasing energy, with the energy left
// after each prefix and the bounding box of each prefix.
struct SortedTable {
  std::vector<Entry> entries;
  std::vector<double> suffix;  // suffix[k] = sum of |a|^2 over entries[k..]
  std::vector<Box> prefix_box; // prefix_box[k] covers entries[0..k]

  static SortedTable from(const ProjectionTable& t) {
    SortedTable s;
    for (int m = t.m_min(); m <= t.m_max(); ++m)
      for (int n = -t.n_half; n <= t.n_half; ++n)
        if (t.at(m, n) != cd{}) s.entries.push_back({m, n, t.at(m, n)});
    std::stable_sort(s.entries.begin(), s.entries.end(),
                     [](const Entry& x, const Entry& y) { return std::norm(x.a) > std::norm(y.a); });
    s.suffix.assign(s.entries.size() + 1, 0.0);
    for (std::size_t k = s.entries.size(); k-- > 0;) s.suffix[k] = s.suffix[k + 1] + std::norm(s.entries[k].a);
    Box b{0, 0, 0, 0};
    for (std::size_t k = 0; k < s.entries.size(); ++k) {
      const Entry& e = s.entries[k];
      b = k == 0 ? Box{e.dm, e.dm, e.dn, e.dn}
                 : Box{std::min(b.dm_lo, e.dm), std::max(b.dm_hi, e.dm), std::min(b.dn_lo, e.dn), std::max(b.dn_hi, e.dn)};
      s.prefix_box.push_back(b);
    }
    return s;
  }

  // entries whose scaled energy reaches the floor
  std::size_t keep(double scale, double floor) const {
    if (floor <= 0.0) return entries.size();
    std::size_t lo = 0, hi = entries.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (scale * std::norm(entries[mid].a) >= floor) lo = mid + 1;
      else hi = mid;
    }
    return lo;
  }
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

int gray(int v) { return v ^ (v >> 1); }

}  // namespace

std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t index) { return splitmix64(seed + (index + 1) * kGolden); }

QamConstellation::QamConstellation(int M, double symbol_energy) {
  const int side = static_cast<int>(std::lround(std::sqrt(M)));
  if (side * side != M || side < 2 || M > 256) throw ParameterError("constellation must be square QAM");
  if (!(symbol_energy > 0.0)) throw ParameterError("symbol energy must be positive");
  side_ = side;
  bits_ = std::countr_zero(static_cast<unsigned>(M));
  // mean energy of the unscaled grid is 2 (M - 1) / 3
  scale_ = std::sqrt(symbol_energy * 3.0 / (2.0 * (M - 1)));
  for (int ix = 0; ix < side; ++ix)
    for (int iy = 0; iy < side; ++iy)
      points_.emplace_back(scale_ * (2 * ix - (side - 1)), scale_ * (2 * iy - (side - 1)));
}

int QamConstellation::slice(cd y) const {
  auto axis = [&](double v) {
    const long k = std::lround((v / scale_ + (side_ - 1)) / 2.0);
    return static_cast<int>(std::clamp<long>(k, 0, side_ - 1));
  };
  return axis(y.real()) * side_ + axis(y.imag());
}

int QamConstellation::bit_errors(int a, int b) const {
  const int dx = gray(a / side_) ^ gray(b / side_);
  const int dy = gray(a % side_) ^ gray(b % side_);
  return std::popcount(static_cast<unsigned>(dx)) + std::popcount(static_cast<unsigned>(dy));
}

double ppp_r_max(const NetworkModel& net, double fraction) {
  net.validate();
  const double p = net.n / 10.0 - 2.0;
  if (!(p > 0.0)) throw ParameterError("PPP interference diverges for path-loss slope n <= 20");
  if (!(fraction > 0.0 && fraction < 1.0)) throw ParameterError("tail fraction must lie in (0, 1)");
  return net.d_min * std::pow(fraction, -1.0 / p);
}

Deployment sample_ppp(const NetworkModel& net, const CfoPmf& cfo, double T, int n_tau, double r_max,
                      std::mt19937_64& rng) {
  net.validate();
  cfo.validate();
  if (!(r_max > net.d_min)) throw ParameterError("r_max must exceed d_min");
  if (n_tau < 1 || !(T > 0.0)) throw ParameterError("invalid timing grid");
  const double area = std::numbers::pi * (r_max * r_max - net.d_min * net.d_min);
  std::poisson_distribution<long> count(net.lambda * area);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> open(std::nextafter(0.0, 1.0), 1.0);
  std::discrete_distribution<std::size_t> level(cfo.probs.begin(), cfo.probs.end());
  std::uniform_int_distribution<int> tau(0, n_tau - 1);
  Deployment dep;
  const long k = count(rng);
  dep.aggressors.reserve(static_cast<std::size_t>(k));
  for (long i = 0; i < k; ++i) {
    Aggressor a;
    const double d2 = net.d_min * net.d_min + unit(rng) * (r_max * r_max - net.d_min * net.d_min);
    a.d = std::max(std::sqrt(d2), net.d_min);
    a.angle = kTwoPi * unit(rng);
    a.r_own = std::sqrt(-std::log(open(rng)) / (net.lambda * std::numbers::pi));
    a.eps_index = level(rng);
    a.eps = cfo.eps_levels[a.eps_index];
    a.tau_index = static_cast<std::size_t>(tau(rng));
    a.tau = T * static_cast<double>(a.tau_index) / n_tau;
    dep.aggressors.push_back(a);
  }
  return dep;
}

PowerDelayProfile PowerDelayProfile::flat() { return {{1.0}, {0.0}}; }

PowerDelayProfile PowerDelayProfile::exp4(double T) {
  PowerDelayProfile p;
  double s = 0.0;
  for (int l = 0; l < 4; ++l) s += std::exp(-l);
  for (int l = 0; l < 4; ++l) {
    p.powers.push_back(std::exp(-l) / s);
    p.delays.push_back(T * l / 16.0);
  }
  return p;
}

void PowerDelayProfile::validate() const {
  if (powers.empty() || powers.size() != delays.size()) throw ParameterError("power-delay profile is malformed");
  double s = 0.0;
  for (std::size_t l = 0; l < powers.size(); ++l) {
    if (!(powers[l] >= 0.0) || !(delays[l] >= 0.0)) throw ParameterError("power-delay profile entries must be nonnegative");
    s += powers[l];
  }
  if (std::abs(s - 1.0) > 1e-9) throw ParameterError("power-delay profile powers must sum to 1");
}

cd ChannelRealization::response(double f) const {
  cd h{};
  for (std::size_t l = 0; l < taps.size(); ++l) h += taps[l] * std::polar(1.0, -kTwoPi * f * delays[l]);
  return h;
}

ChannelRealization sample_channel(const PowerDelayProfile& pdp, std::mt19937_64& rng) {
  pdp.validate();
  ChannelRealization c;
  c.delays = pdp.delays;
  for (double p : pdp.powers) c.taps.push_back(complex_normal(rng, p));
  return c;
}

std::vector<cd> zf_equalize(std::span<const cd> estimates, std::span<const cd> gains) {
  if (estimates.size() != gains.size()) throw ParameterError("estimate and gain counts differ");
  std::vector<cd> out(estimates.size());
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    cd g = gains[k];
    if (std::abs(g) < 1e-12) g = g == cd{} ? cd{1e-12, 0.0} : 1e-12 * g / std::abs(g);
    out[k] = estimates[k] / g;
  }
  return out;
}

std::string to_string(Scheme s) { return s == Scheme::FmtZf ? "fmt" : "nofdm"; }

std::string to_string(ScenarioKind s) {
  switch (s) {
    case ScenarioKind::None: return "none";
    case ScenarioKind::Single: return "single";
    case ScenarioKind::Ppp: return "ppp";
  }
  return "none";
}

std::string to_string(AggressorSymbols s) { return s == AggressorSymbols::Gaussian ? "gaussian" : "qam"; }

void TrialConfig::validate() const {
  filter.validate();
  lattice.validate();
  if (q < kMinSamplesPerT0) throw ParameterError("oversampling must be at least 8 samples per T0");
  ModQam::make(modulation);
  if (!std::isfinite(ebn0_db)) throw ParameterError("Eb/N0 must be finite");
  if (!(symbol_energy > 0.0)) throw ParameterError("symbol energy must be positive");
  if (n_tau < 1) throw ParameterError("n_tau must be positive");
  pdp.validate();
  const double step = lattice.T / n_tau;
  for (double d : pdp.delays)
    if (std::abs(d / step - std::round(d / step)) > 1e-9)
      throw ParameterError("channel delays must be multiples of T / n_tau");
  if (scenario != ScenarioKind::None) cfo.validate();
  if (scenario == ScenarioKind::Ppp) network.validate();
  if (!std::isfinite(sir_db)) throw ParameterError("SIR must be finite");
  if (burst_k < 0) throw ParameterError("burst_k must be nonnegative");
  if (scheme == Scheme::NofdmMlse && mlse_block < 8) throw ParameterError("MLSE block must hold at least 8 symbols");
  if (traceback < 1) throw ParameterError("traceback depth must be positive");
  if (bits_target < 10000) throw ParameterError("bits_target must be at least 1e4");
  if (!(prune >= 0.0)) throw ParameterError("prune floor must be nonnegative");
}

struct LinkSimulator::Impl {
  TrialConfig cfg;
  QamConstellation qam;
  PrototypeFilter g;
  int rate = 0;
  int n_meas = 0;
  std::vector<int> obs;  // observation cells m'
  double n0 = 0.0;
  std::vector<double> tap_steps;  // channel delays in tau-grid steps
  std::vector<SortedTable> victim;                    // per channel tap delay
  std::vector<std::vector<SortedTable>> aggressor;    // [eps level][tau index]
  Box victim_box{0, 0, 0, 0};
  int vm_lo = 0, vm_hi = 0, vn_lo = 0, vn_hi = 0;
  Eigen::MatrixXd noise_factor;
  int peak = 0;
  std::unique_ptr<MlseEqualizer> mlse;

  explicit Impl(const TrialConfig& c) : cfg(c), qam(c.modulation, c.symbol_energy) {
    cfg.validate();
    rate = gain_rate(cfg.q, cfg.lattice, cfg.window);
    g = make_filter(cfg.filter, rate);
    n_meas = cfg.lattice.N / 2;
    const double ebn0 = db_to_linear(cfg.ebn0_db);
    n0 = cfg.noise ? cfg.symbol_energy / (qam.bits_per_symbol() * ebn0) : 0.0;
    for (double d : cfg.pdp.delays) tap_steps.push_back(std::round(d / (cfg.lattice.T / cfg.n_tau)));

    for (double d : cfg.pdp.delays) {
      const ProjectionEngine eng(g, g, cfg.lattice, 0.0, cfg.window);
      victim.push_back(SortedTable::from(eng.table(d)));
    }
    if (cfg.scenario != ScenarioKind::None) {
      for (double eps : cfg.cfo.eps_levels) {
        const ProjectionEngine eng(g, g, cfg.lattice, eps, cfg.window);
        std::vector<SortedTable> col(static_cast<std::size_t>(cfg.n_tau));
        parallel_for(col.size(), [&](std::size_t j) {
          col[j] = SortedTable::from(eng.table(cfg.lattice.T * static_cast<double>(j) / cfg.n_tau));
        });
        aggressor.push_back(std::move(col));
      }
    }

    // victim region: every symbol with a retained coefficient on some tap
    bool first = true;
    for (const auto& t : victim) {
      const std::size_t k = t.keep(1.0, cfg.prune);
      if (k == 0) continue;
      const Box& b = t.prefix_box[k - 1];
      victim_box = first ? b
                         : Box{std::min(victim_box.dm_lo, b.dm_lo), std::max(victim_box.dm_hi, b.dm_hi),
                               std::min(victim_box.dn_lo, b.dn_lo), std::max(victim_box.dn_hi, b.dn_hi)};
      first = false;
    }
    vn_lo = std::max(0, n_meas + victim_box.dn_lo);
    vn_hi = std::min(cfg.lattice.N - 1, n_meas + victim_box.dn_hi);

    if (cfg.scheme == Scheme::FmtZf) {
      obs = {0};
      const int reach = cfg.burst_k > 0 ? cfg.burst_k - 1 : std::max(-victim_box.dm_lo, victim_box.dm_hi);
      vm_lo = -reach;
      vm_hi = reach;
    } else {
      // centre the taps on the peak of the flat composite response
      double best = -1.0;
      for (const Entry& e : victim[0].entries)
        if (e.dn == 0 && std::norm(e.a) > best) {
          best = std::norm(e.a);
          peak = e.dm;
        }
      const int block = cfg.mlse_block;
      for (int j = -3; j <= block + 2; ++j) obs.push_back(j - peak);
      vm_lo = 0;
      vm_hi = block - 1;
      mlse = std::make_unique<MlseEqualizer>(std::vector<cd>(kMlseTaps, cd{1.0}), qam.points(), cfg.traceback);
    }
    build_noise_factor();
  }

  // white noise correlated by the receive filters: cov = N0 A((m_b - m_a) T, 0)
  void build_noise_factor() {
    const auto n = static_cast<Eigen::Index>(obs.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
    const ProjectionEngine eng(g, g, cfg.lattice, 0.0, GainWindow{0, 0});
    const ProjectionTable t = eng.table(0.0);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) {
        const int dm = obs[static_cast<std::size_t>(b)] - obs[static_cast<std::size_t>(a)];
        cov(a, b) = (dm >= t.m_min() && dm <= t.m_max()) ? t.at(dm, 0).real() : 0.0;
      }
    cov = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    noise_factor = es.eigenvectors() * lam.asDiagonal();
  }

  std::size_t victim_index(int m, int n) const {
    return static_cast<std::size_t>(m - vm_lo) * static_cast<std::size_t>(vn_hi - vn_lo + 1) +
           static_cast<std::size_t>(n - vn_lo);
  }

  // table, m offset and kept count for aggressor tap l
  struct TapRef {
    const SortedTable* table;
    int wrap;
  };
  TapRef tap_ref(std::size_t eps_index, std::size_t tau_index, std::size_t l) const {
    const long c = static_cast<long>(tau_index) + static_cast<long>(tap_steps[l]);
    const long wrap = c / cfg.n_tau;
    const long rem = c % cfg.n_tau;
    return {&aggressor[eps_index][static_cast<std::size_t>(rem)], static_cast<int>(wrap)};
  }

  cd draw_symbol(std::mt19937_64& rng, AggressorSymbols kind) const {
    if (kind == AggressorSymbols::Gaussian) return complex_normal(rng, cfg.symbol_energy);
    std::uniform_int_distribution<int> idx(0, qam.M() - 1);
    return qam.point(idx(rng));
  }
};

LinkSimulator::LinkSimulator(const TrialConfig& config) : impl_(std::make_unique<Impl>(config)) {}
LinkSimulator::~LinkSimulator() = default;
LinkSimulator::LinkSimulator(LinkSimulator&&) noexcept = default;

const TrialConfig& LinkSimulator::config() const { return impl_->cfg; }
const QamConstellation& LinkSimulator::constellation() const { return impl_->qam; }
std::vector<int> LinkSimulator::observation_cells() const { return impl_->obs; }
int LinkSimulator::measured_subcarrier() const { return impl_->n_meas; }

BurstRealization LinkSimulator::draw(std::mt19937_64& rng) const {
  const Impl& s = *impl_;
  const TrialConfig& cfg = s.cfg;
  BurstRealization b;
  auto channel = [&] {
    if (cfg.fading) return sample_channel(cfg.pdp, rng);
    ChannelRealization c;
    c.delays = cfg.pdp.delays;
    for (double p : cfg.pdp.powers) c.taps.emplace_back(std::sqrt(p), 0.0);
    return c;
  };
  b.victim_channel = channel();
  std::uniform_int_distribution<int> idx(0, s.qam.M() - 1);
  const std::size_t count = static_cast<std::size_t>(s.vm_hi - s.vm_lo + 1) * static_cast<std::size_t>(s.vn_hi - s.vn_lo + 1);
  b.victim_index.resize(count);
  b.victim_symbols.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    b.victim_index[k] = idx(rng);
    b.victim_symbols[k] = s.qam.point(b.victim_index[k]);
  }

  std::vector<std::pair<Aggressor, double>> agg;
  if (cfg.scenario == ScenarioKind::Single) {
    std::discrete_distribution<std::size_t> level(cfg.cfo.probs.begin(), cfg.cfo.probs.end());
    std::uniform_int_distribution<int> tau(0, cfg.n_tau - 1);
    Aggressor a;
    a.eps_index = level(rng);
    a.tau_index = static_cast<std::size_t>(tau(rng));
    agg.emplace_back(a, sir_to_ratio(cfg.sir_db));
  } else if (cfg.scenario == ScenarioKind::Ppp) {
    const double r_max = cfg.r_max > 0.0 ? cfg.r_max : ppp_r_max(cfg.network);
    const Deployment dep = sample_ppp(cfg.network, cfg.cfo, cfg.lattice.T, cfg.n_tau, r_max, rng);
    for (const Aggressor& a : dep.aggressors)
      agg.emplace_back(a, power_ratio(cfg.network.D, a.r_own, a.d, cfg.network));
  }

  for (const auto& [a, power] : agg) {
    BurstRealization::Interferer it;
    it.power = power;
    it.eps_index = a.eps_index;
    it.tau_index = a.tau_index;
    it.channel = channel();
    // symbol region: union of the retained coefficients over all taps
    Box box{0, 0, 0, 0};
    bool any = false;
    for (std::size_t l = 0; l < cfg.pdp.delays.size(); ++l) {
      const auto ref = s.tap_ref(a.eps_index, a.tau_index, l);
      const std::size_t k = ref.table->keep(power, cfg.prune);
      if (k == 0) continue;
      Box t = ref.table->prefix_box[k - 1];
      t.dm_lo -= ref.wrap;
      t.dm_hi -= ref.wrap;
      box = any ? Box{std::min(box.dm_lo, t.dm_lo), std::max(box.dm_hi, t.dm_hi), std::min(box.dn_lo, t.dn_lo),
                      std::max(box.dn_hi, t.dn_hi)}
                : t;
      any = true;
    }
    it.m_lo = s.obs.front() + box.dm_lo;
    it.m_hi = s.obs.back() + box.dm_hi;
    it.n_lo = std::max(0, s.n_meas + box.dn_lo);
    it.n_hi = std::min(cfg.lattice.N - 1, s.n_meas + box.dn_hi);
    if (any && it.n_lo <= it.n_hi) {
      const std::size_t n_sym =
          static_cast<std::size_t>(it.m_hi - it.m_lo + 1) * static_cast<std::size_t>(it.n_hi - it.n_lo + 1);
      it.symbols.resize(n_sym);
      for (auto& d : it.symbols) d = s.draw_symbol(rng, cfg.aggressor_symbols);
    } else {
      it.m_hi = it.m_lo - 1;
      it.n_hi = it.n_lo - 1;
    }
    // pruned energy enters as a Gaussian term of matching variance
    double tail = 0.0;
    for (std::size_t l = 0; l < cfg.pdp.delays.size(); ++l) {
      const auto ref = s.tap_ref(a.eps_index, a.tau_index, l);
      tail += std::norm(it.channel.taps[l]) * ref.table->suffix[ref.table->keep(power, cfg.prune)];
    }
    it.tail.resize(s.obs.size());
    for (auto& t : it.tail) t = tail > 0.0 ? complex_normal(rng, power * tail * cfg.symbol_energy) : cd{};
    b.interferers.push_back(std::move(it));
  }
  return b;
}

std::vector<cd> LinkSimulator::noise(std::mt19937_64& rng) const {
  const Impl& s = *impl_;
  const auto n = static_cast<Eigen::Index>(s.obs.size());
  std::vector<cd> out(s.obs.size());
  if (s.n0 == 0.0) return out;
  Eigen::VectorXcd w(n);
  for (Eigen::Index k = 0; k < n; ++k) w(k) = complex_normal(rng, s.n0);
  const Eigen::VectorXcd z = s.noise_factor.cast<cd>() * w;
  for (Eigen::Index k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = z(k);
  return out;
}

std::vector<cd> LinkSimulator::observe(const BurstRealization& b, ObservationPath path) const {
  const Impl& s = *impl_;
  const TrialConfig& cfg = s.cfg;
  const double F = cfg.lattice.F, T = cfg.lattice.T;
  const int n0 = s.n_meas;
  std::vector<cd> y(s.obs.size());

  if (path == ObservationPath::Projection) {
    for (std::size_t a = 0; a < s.obs.size(); ++a) {
      const int mp = s.obs[a];
      cd acc{};
      for (std::size_t l = 0; l < s.victim.size(); ++l) {
        const SortedTable& t = s.victim[l];
        const double delta = cfg.pdp.delays[l];
        const std::size_t keep = t.keep(1.0, cfg.prune);
        cd part{};
        for (std::size_t k = 0; k < keep; ++k) {
          const Entry& e = t.entries[k];
          const int m = mp + e.dm, n = n0 + e.dn;
          if (m < s.vm_lo || m > s.vm_hi || n < s.vn_lo || n > s.vn_hi) continue;
          const double ph = -kTwoPi * n * F * delta + kTwoPi * e.dn * F * mp * T;
          part += e.a * std::polar(1.0, ph) * b.victim_symbols[s.victim_index(m, n)];
        }
        acc += b.victim_channel.taps[l] * part;
      }
      for (const auto& it : b.interferers) {
        const double eps = cfg.cfo.eps_levels[it.eps_index];
        const double amp = std::sqrt(it.power);
        const int width = it.n_hi - it.n_lo + 1;
        for (std::size_t l = 0; l < cfg.pdp.delays.size(); ++l) {
          const auto ref = s.tap_ref(it.eps_index, it.tau_index, l);
          const double delta = cfg.pdp.delays[l];
          const std::size_t keep = ref.table->keep(it.power, cfg.prune);
          cd part{};
          for (std::size_t k = 0; k < keep; ++k) {
            const Entry& e = ref.table->entries[k];
            const int m = mp + e.dm - ref.wrap, n = n0 + e.dn;
            if (m < it.m_lo || m > it.m_hi || n < it.n_lo || n > it.n_hi) continue;
            const double ph = -kTwoPi * (n * F + eps) * delta + kTwoPi * (e.dn * F + eps) * mp * T;
            part += e.a * std::polar(1.0, ph) *
                    it.symbols[static_cast<std::size_t>(m - it.m_lo) * static_cast<std::size_t>(width) +
                               static_cast<std::size_t>(n - it.n_lo)];
          }
          acc += amp * it.channel.taps[l] * part;
        }
        acc += it.tail[a];
      }
      y[a] = acc;
    }
    return y;
  }

  // waveform path: synthesize, apply channels, correlate
  BasebandSignal r;
  for (std::size_t l = 0; l < s.victim.size(); ++l) {
    const double delta = cfg.pdp.delays[l];
    for (int m = s.vm_lo; m <= s.vm_hi; ++m)
      for (int n = s.vn_lo; n <= s.vn_hi; ++n) {
        const cd d = b.victim_symbols[s.victim_index(m, n)];
        accumulate(r, modulated_shift(s.g, m, n, cfg.lattice, delta, 0.0),
                   b.victim_channel.taps[l] * std::polar(1.0, -kTwoPi * n * F * delta) * d);
      }
  }
  for (const auto& it : b.interferers) {
    const double eps = cfg.cfo.eps_levels[it.eps_index];
    const double tau = T * static_cast<double>(it.tau_index) / cfg.n_tau;
    const int width = it.n_hi - it.n_lo + 1;
    for (std::size_t l = 0; l < cfg.pdp.delays.size(); ++l) {
      const double delta = cfg.pdp.delays[l];
      for (int m = it.m_lo; m <= it.m_hi; ++m)
        for (int n = it.n_lo; n <= it.n_hi; ++n) {
          const cd d = it.symbols[static_cast<std::size_t>(m - it.m_lo) * static_cast<std::size_t>(width) +
                                  static_cast<std::size_t>(n - it.n_lo)];
          accumulate(r, modulated_shift(s.g, m, n, cfg.lattice, tau + delta, eps),
                     std::sqrt(it.power) * it.channel.taps[l] * std::polar(1.0, -kTwoPi * (n * F + eps) * delta) * d);
        }
    }
  }
  for (std::size_t a = 0; a < s.obs.size(); ++a) {
    y[a] = r.samples.empty() ? cd{} : inner_product(r, modulated_shift(s.g, s.obs[a], n0, cfg.lattice));
    for (const auto& it : b.interferers) y[a] += it.tail[a];
  }
  return y;
}

std::vector<cd> LinkSimulator::mlse_taps(const ChannelRealization& channel) const {
  const Impl& s = *impl_;
  const TrialConfig& cfg = s.cfg;
  std::vector<cd> taps(kMlseTaps);
  for (int i = 0; i < kMlseTaps; ++i) {
    // y[m'] = sum_i taps[i] d[m' + peak + 3 - i]
    const int dm = s.peak + 3 - i;
    cd h{};
    for (std::size_t l = 0; l < s.victim.size(); ++l) {
      for (const Entry& e : s.victim[l].entries)
        if (e.dm == dm && e.dn == 0)
          h += channel.taps[l] * e.a * std::polar(1.0, -kTwoPi * s.n_meas * cfg.lattice.F * cfg.pdp.delays[l]);
    }
    taps[static_cast<std::size_t>(i)] = h;
  }
  return taps;
}

double LinkSimulator::mlse_tap_energy_capture() const {
  const Impl& s = *impl_;
  double in = 0.0, all = 0.0;
  for (const Entry& e : s.victim[0].entries) {
    if (e.dn != 0) continue;
    all += std::norm(e.a);
    if (std::abs(e.dm - s.peak) <= 3) in += std::norm(e.a);
  }
  return all > 0.0 ? in / all : 0.0;
}

std::pair<std::uint64_t, std::uint64_t> LinkSimulator::detect(const BurstRealization& b, std::span<const cd> y) const {
  const Impl& s = *impl_;
  const TrialConfig& cfg = s.cfg;
  std::uint64_t errors = 0, bits = 0;
  if (cfg.scheme == Scheme::FmtZf) {
    cd gain{};
    for (std::size_t l = 0; l < s.victim.size(); ++l)
      for (const Entry& e : s.victim[l].entries)
        if (e.dm == 0 && e.dn == 0)
          gain += b.victim_channel.taps[l] * e.a * std::polar(1.0, -kTwoPi * s.n_meas * cfg.lattice.F * cfg.pdp.delays[l]);
    const cd est = zf_equalize(y.first(1), std::span<const cd>(&gain, 1))[0];
    const int sent = b.victim_index[s.victim_index(0, s.n_meas)];
    errors = static_cast<std::uint64_t>(s.qam.bit_errors(s.qam.slice(est), sent));
    bits = static_cast<std::uint64_t>(s.qam.bits_per_symbol());
    return {errors, bits};
  }
  const std::vector<cd> taps = mlse_taps(b.victim_channel);
  const MlseEqualizer eq(taps, s.qam.points(), cfg.traceback);
  const std::vector<int> dec = eq.equalize(y);
  const int block = cfg.mlse_block;
  for (int m = block / 4; m < block - block / 4; ++m) {
    errors += static_cast<std::uint64_t>(s.qam.bit_errors(dec[static_cast<std::size_t>(m)],
                                                          b.victim_index[s.victim_index(m, s.n_meas)]));
    bits += static_cast<std::uint64_t>(s.qam.bits_per_symbol());
  }
  return {errors, bits};
}

TrialResult run_trial(const TrialConfig& config) {
  const LinkSimulator sim(config);
  const TrialConfig& cfg = sim.config();
  const std::uint64_t per_burst =
      cfg.scheme == Scheme::FmtZf
          ? static_cast<std::uint64_t>(sim.constellation().bits_per_symbol())
          : static_cast<std::uint64_t>(cfg.mlse_block - 2 * (cfg.mlse_block / 4)) *
                static_cast<std::uint64_t>(sim.constellation().bits_per_symbol());
  const std::uint64_t bursts = (cfg.bits_target + per_burst - 1) / per_burst;
  const std::uint64_t chunks = (bursts + kBurstsPerChunk - 1) / kBurstsPerChunk;

  struct Tally {
    std::uint64_t errors = 0, bits = 0, bursts = 0;
    double sq = 0.0;  // sum of squared per-burst error counts
    double cross = 0.0;  // sum of errors * bits per burst
    double bits_sq = 0.0;
  };
  std::vector<Tally> tallies(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    std::mt19937_64 rng(chunk_seed(cfg.seed, c));
    const std::uint64_t begin = c * kBurstsPerChunk;
    const std::uint64_t end = std::min<std::uint64_t>(bursts, begin + kBurstsPerChunk);
    Tally& t = tallies[c];
    for (std::uint64_t k = begin; k < end; ++k) {
      const BurstRealization b = sim.draw(rng);
      std::vector<cd> y = sim.observe(b, ObservationPath::Projection);
      const std::vector<cd> w = sim.noise(rng);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += w[i];
      const auto [e, n] = sim.detect(b, y);
      t.errors += e;
      t.bits += n;
      t.bursts += 1;
      t.sq += static_cast<double>(e) * static_cast<double>(e);
      t.cross += static_cast<double>(e) * static_cast<double>(n);
      t.bits_sq += static_cast<double>(n) * static_cast<double>(n);
    }
  });
  Tally all;
  for (const Tally& t : tallies) {
    all.errors += t.errors;
    all.bits += t.bits;
    all.bursts += t.bursts;
    all.sq += t.sq;
    all.cross += t.cross;
    all.bits_sq += t.bits_sq;
  }
  TrialResult r;
  r.errors = all.errors;
  r.bits = all.bits;
  r.bursts = all.bursts;
  r.ber = static_cast<double>(all.errors) / static_cast<double>(all.bits);
  const double p = r.ber;
  const double nb = static_cast<double>(all.bits);
  const double binomial = std::sqrt(p * (1.0 - p) / nb);
  // bits of one burst share its channel, so also take the spread of per-burst counts
  double cluster = 0.0;
  if (all.bursts > 1) {
    const double ss = all.sq - 2.0 * p * all.cross + p * p * all.bits_sq;
    const double k = static_cast<double>(all.bursts);
    cluster = std::sqrt(std::max(ss, 0.0) * k / (k - 1.0)) / nb;
  }
  r.sigma = std::max(binomial, cluster);
  r.ci_halfwidth = 1.96 * r.sigma;
  if (all.errors < 10) {
    r.warning = true;
    r.note = all.errors == 0 ? "no bit errors observed; confidence interval is degenerate"
                             : "fewer than 10 bit errors; confidence interval is unreliable";
  }
  return r;
}

std::pair<double, double> mgf_monte_carlo(double z, const NetworkModel& net, double psi_bar, std::uint64_t draws,
                                          std::uint64_t seed, double r_max) {
  net.validate();
  if (!(z >= 0.0) || !(psi_bar >= 0.0)) throw ParameterError("z and psi_bar must be nonnegative");
  if (draws < 2) throw ParameterError("need at least two draws");
  const double p = net.n / 10.0 - 2.0;
  if (!(p > 0.0)) throw ParameterError("PPP interference diverges for path-loss slope n <= 20");
  if (r_max <= 0.0) {
    // keep z E[I beyond r_max] below 2e-4
    const double q = net.beta * net.n / 20.0;
    const double lp = net.lambda * std::numbers::pi;
    const double kfar = std::pow(net.D, (net.n - net.beta * net.n) / 10.0) * std::pow(lp, -q) * std::tgamma(1.0 + q);
    const double mass = 2.0 * std::numbers::pi * net.lambda * kfar * z * psi_bar / p;
    r_max = std::max(net.d_min * 1.01, std::pow(mass / 2e-4, 1.0 / p));
  }
  const CfoPmf one{{0.0}, {1.0}};
  const std::uint64_t per_chunk = 4096;
  const std::uint64_t chunks = (draws + per_chunk - 1) / per_chunk;
  std::vector<std::pair<double, double>> sums(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    std::mt19937_64 rng(chunk_seed(seed, c));
    std::exponential_distribution<double> expo(1.0);
    const std::uint64_t begin = c * per_chunk;
    const std::uint64_t end = std::min<std::uint64_t>(draws, begin + per_chunk);
    double s = 0.0, s2 = 0.0;
    for (std::uint64_t k = begin; k < end; ++k) {
      const Deployment dep = sample_ppp(net, one, 1.0, 1, r_max, rng);
      double interference = 0.0;
      for (const Aggressor& a : dep.aggressors)
        interference += power_ratio(net.D, a.r_own, a.d, net) * psi_bar * expo(rng);
      const double v = std::exp(-z * interference);
      s += v;
      s2 += v * v;
    }
    sums[c] = {s, s2};
  });
  double s = 0.0, s2 = 0.0;
  for (const auto& [a, b] : sums) {
    s += a;
    s2 += b;
  }
  const double n = static_cast<double>(draws);
  const double mean = s / n;
  const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

}  // namespace pot
