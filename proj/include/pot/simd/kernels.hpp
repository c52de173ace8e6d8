#pragma once

// Data-parallel inner loops shared by the waveform, interference and
// equalizer code. Every kernel has a scalar reference implementation; wider
// variants are chosen once at startup from the CPU feature flags and must
// agree with the reference to rounding (see tests/test_simd.cpp).

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace pot::simd {

using cd = std::complex<double>;

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

/// Best instruction set supported by both the build and the running CPU.
Isa detected_isa();

/// Instruction set currently used by the dispatched entry points.
Isa active_isa();

/// Overrides dispatch (tests use this to compare variants). Requesting an
/// unsupported ISA falls back to Scalar. Returns the ISA actually selected.
Isa set_active_isa(Isa isa);

/// Sum_k x[k] * conj(y[k]). Spans must have equal length.
cd dot_conj(std::span<const cd> x, std::span<const cd> y);

/// Sum_k |x[k]|^2.
double energy(std::span<const cd> x);

/// out[k] += a * x[k].
void axpy(cd a, std::span<const cd> x, std::span<cd> out);

/// Add-compare-select for one trellis step of an M-ary Viterbi detector whose
/// state holds the last L-1 symbols, newest in the lowest digit:
///   next = (prev * M + s) mod S,   prev = q + o * Q,   Q = S / M.
/// For every next state q*M+s it takes
///   min_o  metric_prev[q + o*Q] + |target[s] - hist[q + o*Q]|^2
/// and records the winning o in survivor[q*M+s].
/// hist_re/hist_im hold the ISI contribution of each predecessor state.
struct AcsStep {
  std::span<const double> metric_prev;  // S
  std::span<const double> hist_re;      // S
  std::span<const double> hist_im;      // S
  std::span<const cd> target;           // M
  std::span<double> metric_next;        // S
  std::span<std::uint8_t> survivor;     // S
};

void viterbi_acs(const AcsStep& step);

namespace scalar {
cd dot_conj(std::span<const cd> x, std::span<const cd> y);
double energy(std::span<const cd> x);
void axpy(cd a, std::span<const cd> x, std::span<cd> out);
void viterbi_acs(const AcsStep& step);
}  // namespace scalar

namespace avx2 {
cd dot_conj(std::span<const cd> x, std::span<const cd> y);
double energy(std::span<const cd> x);
void axpy(cd a, std::span<const cd> x, std::span<cd> out);
void viterbi_acs(const AcsStep& step);
}  // namespace avx2

}  // namespace pot::simd
