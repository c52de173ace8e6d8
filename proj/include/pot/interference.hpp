#pragma once

// Mean interference gains of an aggressor burst projected onto a victim
// receive filter, their timing averages, frame-bound estimates and the
// spectral-efficiency / interference trade-off sweeps.
//
// The victim cell of interest is (m', n') = (0, 0); aggressor symbols run over
// m in [-K+1, K-1] and relative subcarriers n in [-W, W].

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pot/waveform.hpp"

namespace pot {

struct GainWindow {
  int n_half = 8;  ///< W: aggressor subcarriers n in [-W, W]
  int k_sum = 0;   ///< K for the m sum; 0 derives it from the filter supports
};

/// q * max(1, ceil((2W + 1) F)): a grid fine enough for every modulation
/// frequency the window reaches.
int gain_rate(int q, const LatticeParams& lattice, const GainWindow& window);

/// Smallest K whose m range contains every shift overlapping both supports for
/// any tau in [0, T).
int covering_k(const PrototypeFilter& tx, const PrototypeFilter& rx, const LatticeParams& lattice);

/// c[m][n] = <g_tx(t - mT - tau) exp(j 2 pi (nF + eps) t), g_rx(t)>.
struct ProjectionTable {
  int k_sum = 0;
  int n_half = 0;
  std::vector<cd> c;

  int m_min() const { return -k_sum + 1; }
  int m_max() const { return k_sum - 1; }
  cd at(int m, int n) const {
    return c[static_cast<std::size_t>(m - m_min()) * static_cast<std::size_t>(2 * n_half + 1) +
             static_cast<std::size_t>(n + n_half)];
  }
  double total_energy() const;
};

/// Computes projection tables for one (tx, rx, lattice, eps). The rx-grid
/// phasors are built once, so sweeping tau is cheap.
class ProjectionEngine {
 public:
  ProjectionEngine(const PrototypeFilter& tx, const PrototypeFilter& rx, const LatticeParams& lattice, double eps,
                   const GainWindow& window = {});

  ProjectionTable table(double tau) const;
  int k_sum() const { return k_sum_; }

 private:
  const PrototypeFilter* tx_;
  const PrototypeFilter* rx_;
  LatticeParams lattice_;
  double eps_;
  int n_half_;
  int k_sum_;
  std::vector<std::vector<cd>> phasors_;  // conj modulation per relative n
};

double mean_other_gain(const PrototypeFilter& tx, const PrototypeFilter& rx, const LatticeParams& lattice, double tau,
                       double eps, const GainWindow& window = {});

/// Gain of the link's own burst excluding the concentric term (tx = rx = g).
double mean_self_gain(const PrototypeFilter& g, const LatticeParams& lattice, const GainWindow& window = {});

enum class TauRule { Trapezoid, Midpoint };

/// Uniform average of mean_other_gain over tau in [0, T).
double timing_averaged_gain(const PrototypeFilter& tx, const PrototypeFilter& rx, const LatticeParams& lattice,
                            double eps, int n_tau_points = 64, const GainWindow& window = {},
                            TauRule rule = TauRule::Trapezoid);

/// Test signals: random symbol grids synthesized on the lattice, or random
/// sums of continuously time-frequency shifted prototypes inside the window.
enum class TestSignalFamily { Synthesized, Shifted };

struct FrameBounds {
  double a = 0.0;
  double b = 0.0;
  int trials = 0;
};

/// Sum over the lattice of |<s, g_mn>|^2 divided by ||s||^2. Throws
/// ParameterError for a zero-energy signal.
double projection_energy_ratio(const BasebandSignal& s, const PrototypeFilter& g, const LatticeParams& lattice);

FrameBounds frame_bounds_estimate(const PrototypeFilter& g, const LatticeParams& lattice, int n_trials,
                                  std::uint64_t seed, TestSignalFamily family);

enum class TradeoffAxis {
  OrthogonalFixedAlpha,    ///< RRC at fixed roll-off, F swept, T = 1
  OrthogonalMatchedAlpha,  ///< RRC with alpha = F - 1, F swept in [1, 2]
  GaussianRho,             ///< Gaussian at TF = 1, rho swept
};

std::string to_string(TradeoffAxis axis);
TradeoffAxis parse_tradeoff_axis(const std::string& name);

struct TradeoffConfig {
  TradeoffAxis axis = TradeoffAxis::OrthogonalFixedAlpha;
  std::vector<double> values;
  double alpha = 0.2;
  int q = 8;
  int n_tau = 64;
  GainWindow window;
};

struct TradeoffRow {
  double parameter = 0.0;
  double spectral_efficiency = 0.0;  ///< 1 / (T F)
  double psi_other_full = 0.0;       ///< tau-averaged, eps = 0
  double psi_other_partial = 0.0;    ///< tau-averaged, eps = F / 2
  double psi_self = 0.0;
};

struct TradeoffCurve {
  TradeoffAxis axis = TradeoffAxis::OrthogonalFixedAlpha;
  std::vector<TradeoffRow> rows;
};

TradeoffCurve tradeoff_sweep(const TradeoffConfig& config);

struct GainTable {
  std::vector<double> tau;  ///< in [0, T)
  std::vector<double> eps;
  std::vector<double> psi;  ///< row-major [tau][eps]
  double psi_self = 0.0;
  double T = 1.0;

  double at(std::size_t i_tau, std::size_t i_eps) const { return psi[i_tau * eps.size() + i_eps]; }
  double tau_mean(std::size_t i_eps) const;
  double tau_spread(std::size_t i_eps) const;  ///< max - min over tau
  double tau_stddev(std::size_t i_eps) const;
  /// Index of the eps column closest to `value`; throws ParameterError if none within 1e-9.
  std::size_t eps_index(double value) const;
  void validate() const;
};

GainTable build_gain_table(const PrototypeFilter& tx, const PrototypeFilter& rx, const LatticeParams& lattice,
                           const std::vector<double>& eps_list, int n_tau = 64, const GainWindow& window = {});

/// Long format, one row per (tau, eps); psi_self travels in a header comment.
void write_gain_table_csv(std::ostream& os, const GainTable& table);
GainTable read_gain_table_csv(std::istream& is);

/// Wide format, one row per tau with one column per eps.
void write_gain_panel_csv(std::ostream& os, const GainTable& table);

}  // namespace pot
