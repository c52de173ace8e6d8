#pragma once

// Prototype filters and Gabor (Weyl-Heisenberg) systems on a rectangular
// time-frequency lattice. Time is measured in units of T0 and frequency in
// units of F0 = 1/T0; every continuous integral is a Riemann sum on a uniform
// grid of `rate` samples per T0, with grid index i at time i / rate.

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pot/errors.hpp"

namespace pot {

using cd = std::complex<double>;

enum class FilterKind { Rrc, Gaussian, Rect };

struct FilterSpec {
  FilterKind kind = FilterKind::Rrc;
  double alpha = 0.2;  ///< RRC roll-off, [0, 1]
  double rho = 1.0;    ///< Gaussian dispersion, > 0

  static FilterSpec rrc(double alpha) { return {FilterKind::Rrc, alpha, 1.0}; }
  static FilterSpec gaussian(double rho) { return {FilterKind::Gaussian, 0.0, rho}; }
  static FilterSpec rect() { return {FilterKind::Rect, 0.0, 1.0}; }

  void validate() const;
};

std::string to_string(const FilterSpec& spec);

/// Closed-form pulse before energy normalization: the standard RRC time-domain
/// expression, (2 rho)^(1/4) exp(-pi rho t^2), or the unit box on [-1/2, 1/2).
double raw_pulse(const FilterSpec& spec, double t);

inline constexpr int kMinSamplesPerT0 = 8;
inline constexpr double kRrcDefaultSpan = 128.0;
inline constexpr double kGaussianTruncation = 1e-6;

/// Sampled, energy-normalized prototype filter g(t).
class PrototypeFilter {
 public:
  /// `span` is the total duration in T0; 0 selects the default for the kind
  /// (128 T0 for RRC, the 1e-6 amplitude point for Gaussian, 1 for Rect).
  static PrototypeFilter make(const FilterSpec& spec, int samples_per_t0, double span = 0.0);

  const FilterSpec& spec() const { return spec_; }
  int rate() const { return rate_; }
  double span() const { return span_; }
  std::int64_t first_index() const { return first_; }
  std::int64_t last_index() const { return first_ + static_cast<std::int64_t>(samples_.size()) - 1; }
  std::span<const cd> samples() const { return samples_; }

  /// Normalized pulse at an arbitrary time; zero outside the sampled support.
  double value(double t) const;

  /// Discrete energy sum |g[i]|^2 / rate (1 up to rounding).
  double energy() const;

 private:
  FilterSpec spec_;
  int rate_ = 0;
  double span_ = 0.0;
  double scale_ = 1.0;
  std::int64_t first_ = 0;
  std::vector<cd> samples_;
};

inline PrototypeFilter make_filter(const FilterSpec& spec, int samples_per_t0, double span = 0.0) {
  return PrototypeFilter::make(spec, samples_per_t0, span);
}

struct LatticeParams {
  double F = 1.0;  ///< subcarrier spacing in F0
  double T = 1.0;  ///< symbol spacing in T0
  int N = 1;       ///< subcarriers
  int K = 1;       ///< symbols m in [-K+1, K-1]

  void validate() const;
  double density() const { return T * F; }
};

/// Samples per T0 for a signal occupying N subcarriers: q * max(1, ceil(N F)).
int signal_rate(int q, const LatticeParams& lattice);

/// d[m][n], m in [-K+1, K-1], n in [0, N-1].
class SymbolGrid {
 public:
  SymbolGrid() = default;
  SymbolGrid(int K, int N);

  int K() const { return K_; }
  int N() const { return N_; }
  int m_min() const { return -K_ + 1; }
  int m_max() const { return K_ - 1; }

  cd& at(int m, int n) { return data_[index(m, n)]; }
  const cd& at(int m, int n) const { return data_[index(m, n)]; }
  std::span<const cd> values() const { return data_; }

 private:
  std::size_t index(int m, int n) const;
  int K_ = 0;
  int N_ = 0;
  std::vector<cd> data_;
};

struct BasebandSignal {
  int rate = 0;
  std::int64_t start = 0;  ///< grid index of samples[0]
  std::vector<cd> samples;

  std::int64_t end() const { return start + static_cast<std::int64_t>(samples.size()); }
  double energy() const;
};

/// g(t - mT - tau) exp(j 2 pi (nF + eps) t). The time shift is rounded to the
/// sample grid, so the output is an exact translate of the filter samples.
BasebandSignal modulated_shift(const PrototypeFilter& g, int m, int n, const LatticeParams& lattice,
                               double extra_time = 0.0, double extra_freq = 0.0);

/// <x, y> = sum x conj(y) / rate over the common support.
cd inner_product(const BasebandSignal& x, const BasebandSignal& y);

/// Adds a * x into acc, growing acc to cover x.
void accumulate(BasebandSignal& acc, const BasebandSignal& x, cd a = 1.0);

BasebandSignal synthesize(const SymbolGrid& grid, const PrototypeFilter& g_tx, const LatticeParams& lattice);

/// Correlates the signal with every analysis function of the lattice.
SymbolGrid analyze(const BasebandSignal& signal, const PrototypeFilter& g_rx, const LatticeParams& lattice);

/// <g_tx(t - dt) exp(j 2 pi df t), g_rx(t)>, with g_tx evaluated in closed form
/// at the shifted times and the sum taken over the g_rx grid.
cd ambiguity(const PrototypeFilter& g_tx, const PrototypeFilter& g_rx, double dt, double df);

}  // namespace pot
