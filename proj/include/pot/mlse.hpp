#pragma once

// Symbol-spaced Viterbi sequence estimation for a 7-tap ISI channel.
//
// Observation model for a block of B symbols d[0..B-1] (zero outside):
//   y[j] = sum_{i=0}^{6} taps[i] d[j + 3 - i] + noise,   j = -3 .. B+2,
// i.e. taps[3] is the cursor and the response is centred on it.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace pot {

inline constexpr int kMlseTaps = 7;
inline constexpr std::size_t kMlseMaxStates = 10'000'000;

class MlseEqualizer {
 public:
  /// Throws ConfigError when M^6 exceeds kMlseMaxStates and ParameterError for
  /// a tap count other than 7 or a traceback depth below 1.
  MlseEqualizer(std::span<const std::complex<double>> taps, std::span<const std::complex<double>> constellation,
                int traceback = 20);

  /// Hard decisions (constellation indices) for d[0..B-1] from B + 6
  /// observations y[-3 .. B+2].
  std::vector<int> equalize(std::span<const std::complex<double>> observations) const;

  std::size_t states() const { return states_; }

 private:
  std::vector<std::complex<double>> taps_;
  std::vector<std::complex<double>> points_;
  int traceback_;
  std::size_t m_;
  std::size_t states_;
  std::vector<double> hist_re_, hist_im_;  // ISI of the six older symbols with every digit valid
};

/// Convenience wrapper around MlseEqualizer.
std::vector<int> mlse_equalize(std::span<const std::complex<double>> observations,
                               std::span<const std::complex<double>> taps,
                               std::span<const std::complex<double>> constellation, int traceback = 20);

}  // namespace pot
