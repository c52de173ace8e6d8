#pragma once

// Link-level Monte Carlo: PPP or single-aggressor deployments, Rayleigh block
// fading, uniform timing misalignment on the tau grid, intentional CFO, and ZF
// (FMT) or per-subcarrier MLSE (NOFDM) reception of the mid-band subcarrier.
//
// Two observation paths exist. The projection path evaluates the receive
// correlations directly from tabulated ambiguity values; the waveform path
// synthesizes every burst, applies the channels and runs analyze(). They are
// equal by linearity and the tests hold them to each other.

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pot/analysis.hpp"
#include "pot/interference.hpp"

namespace pot {

class QamConstellation {
 public:
  explicit QamConstellation(int M, double symbol_energy = 1.0);

  int M() const { return static_cast<int>(points_.size()); }
  int bits_per_symbol() const { return bits_; }
  const std::vector<cd>& points() const { return points_; }
  cd point(int index) const { return points_[static_cast<std::size_t>(index)]; }

  /// Nearest point (per-axis slicing with Gray-coded axes).
  int slice(cd y) const;
  int bit_errors(int a, int b) const;

 private:
  int side_;
  int bits_;
  double scale_;
  std::vector<cd> points_;
};

struct Aggressor {
  double d = 0.0;      ///< distance to the victim receiver, m
  double angle = 0.0;  ///< rad
  double r_own = 0.0;  ///< own-link distance, m
  double eps = 0.0;    ///< CFO in F0
  std::size_t eps_index = 0;
  double tau = 0.0;  ///< timing offset in [0, T)
  std::size_t tau_index = 0;
};

struct Deployment {
  std::vector<Aggressor> aggressors;
};

/// Timing offsets are drawn uniformly from the n_tau-point grid on [0, T).
Deployment sample_ppp(const NetworkModel& net, const CfoPmf& cfo, double T, int n_tau, double r_max,
                      std::mt19937_64& rng);

/// Radius beyond which the expected interference power is `fraction` of the
/// total, from the path-loss integral (d_min / r_max)^(n/10 - 2) = fraction.
double ppp_r_max(const NetworkModel& net, double fraction = 1e-3);

struct PowerDelayProfile {
  std::vector<double> powers;
  std::vector<double> delays;  ///< in T0

  static PowerDelayProfile flat();
  /// Four taps at multiples of T / 16 with powers proportional to exp(-l).
  static PowerDelayProfile exp4(double T = 1.0);
  void validate() const;
};

struct ChannelRealization {
  std::vector<cd> taps;
  std::vector<double> delays;

  /// Frequency response sum_l taps[l] exp(-j 2 pi f delays[l]).
  cd response(double f) const;
};

ChannelRealization sample_channel(const PowerDelayProfile& pdp, std::mt19937_64& rng);

/// Divides each estimate by its gain; gains below 1e-12 in magnitude are
/// replaced by 1e-12 with the same phase.
std::vector<cd> zf_equalize(std::span<const cd> estimates, std::span<const cd> gains);

enum class Scheme { FmtZf, NofdmMlse };
enum class ScenarioKind { None, Single, Ppp };
enum class AggressorSymbols { Gaussian, Constellation };

std::string to_string(Scheme s);
std::string to_string(ScenarioKind s);
std::string to_string(AggressorSymbols s);

struct TrialConfig {
  Scheme scheme = Scheme::FmtZf;
  FilterSpec filter = FilterSpec::rrc(0.2);
  LatticeParams lattice{1.2, 1.0, 16, 1};
  int q = 8;
  int modulation = 4;
  double ebn0_db = 10.0;
  bool noise = true;
  double symbol_energy = 1.0;

  ScenarioKind scenario = ScenarioKind::None;
  double sir_db = 0.0;
  NetworkModel network;
  CfoPmf cfo{{0.6}, {1.0}};
  AggressorSymbols aggressor_symbols = AggressorSymbols::Gaussian;
  double r_max = 0.0;  ///< 0 selects ppp_r_max(network)

  PowerDelayProfile pdp = PowerDelayProfile::flat();
  bool fading = true;  ///< false fixes every channel to a unit tap
  int n_tau = 64;
  GainWindow window;
  int burst_k = 0;     ///< FMT: victim burst m in [-K+1, K-1]; 0 derives it from the filter reach
  int mlse_block = 64; ///< NOFDM: symbols per Viterbi block
  int traceback = 20;

  /// Coefficients with received energy below this floor are pruned and their
  /// energy added back as Gaussian noise; 0 keeps every coefficient.
  double prune = 1e-8;

  std::uint64_t bits_target = 100000;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrialResult {
  double ber = 0.0;
  double sigma = 0.0;         ///< standard error used for agreement tests
  double ci_halfwidth = 0.0;  ///< 1.96 sigma
  std::uint64_t bits = 0;
  std::uint64_t errors = 0;
  std::uint64_t bursts = 0;
  bool warning = false;
  std::string note;
};

/// One burst's random draws, independent of how observations are computed.
struct BurstRealization {
  std::vector<cd> victim_symbols;  ///< [m][n] over the victim symbol region
  std::vector<int> victim_index;   ///< constellation indices of victim_symbols
  ChannelRealization victim_channel;
  struct Interferer {
    double power = 0.0;  ///< received power relative to the victim's
    std::size_t eps_index = 0;
    std::size_t tau_index = 0;
    ChannelRealization channel;
    int m_lo = 0, m_hi = -1, n_lo = 0, n_hi = -1;  ///< aggressor symbol region
    std::vector<cd> symbols;  ///< [m][n] over the aggressor symbol region
    std::vector<cd> tail;     ///< Gaussian stand-in for pruned coefficients, per observation
  };
  std::vector<Interferer> interferers;
};

enum class ObservationPath { Projection, Waveform };

/// Precomputed filters, coefficient tables and noise factors for one config.
class LinkSimulator {
 public:
  explicit LinkSimulator(const TrialConfig& config);
  ~LinkSimulator();
  LinkSimulator(LinkSimulator&&) noexcept;

  const TrialConfig& config() const;
  const QamConstellation& constellation() const;

  /// Observation cells m' of the measured subcarrier (one value for FMT, the
  /// B + 6 Viterbi inputs for NOFDM).
  std::vector<int> observation_cells() const;
  int measured_subcarrier() const;

  BurstRealization draw(std::mt19937_64& rng) const;
  std::vector<cd> observe(const BurstRealization& burst, ObservationPath path) const;
  std::vector<cd> noise(std::mt19937_64& rng) const;

  /// Decides the measured symbols; returns (bit errors, bits).
  std::pair<std::uint64_t, std::uint64_t> detect(const BurstRealization& burst, std::span<const cd> y) const;

  /// Composite 7-tap response used by the MLSE for this burst's victim channel.
  std::vector<cd> mlse_taps(const ChannelRealization& channel) const;
  /// Fraction of the T-spaced composite energy captured by the 7 taps (flat channel).
  double mlse_tap_energy_capture() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

TrialResult run_trial(const TrialConfig& config);

/// E[exp(-z I)] for I = sum_k C_k psi_bar E_k over PPP deployments with
/// E_k ~ Exp(1), estimated from `draws` realizations. Returns (mean, standard error).
std::pair<double, double> mgf_monte_carlo(double z, const NetworkModel& net, double psi_bar, std::uint64_t draws,
                                          std::uint64_t seed, double r_max = 0.0);

/// Sub-seed for chunk `index` of a run with master seed `seed` (splitmix64 of
/// seed + (index + 1) * golden-ratio increment).
std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace pot
