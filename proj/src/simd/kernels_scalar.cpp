#include "pot/simd/kernels.hpp"

#include <limits>

namespace pot::simd::scalar {

cd dot_conj(std::span<const cd> x, std::span<const cd> y) {
  double re = 0.0;
  double im = 0.0;
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double a = x[k].real(), b = x[k].imag();
    const double c = y[k].real(), d = y[k].imag();
    re += a * c + b * d;
    im += b * c - a * d;
  }
  return {re, im};
}

double energy(std::span<const cd> x) {
  double acc = 0.0;
  for (const cd& v : x) acc += v.real() * v.real() + v.imag() * v.imag();
  return acc;
}

void axpy(cd a, std::span<const cd> x, std::span<cd> out) {
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < n; ++k) out[k] += a * x[k];
}

void viterbi_acs(const AcsStep& step) {
  const std::size_t states = step.metric_prev.size();
  const std::size_t m = step.target.size();
  const std::size_t q_count = states / m;
  for (std::size_t s = 0; s < m; ++s) {
    const double tr = step.target[s].real();
    const double ti = step.target[s].imag();
    for (std::size_t q = 0; q < q_count; ++q) {
      double best = std::numeric_limits<double>::infinity();
      std::uint8_t best_o = 0;
      for (std::size_t o = 0; o < m; ++o) {
        const std::size_t p = q + o * q_count;
        const double er = tr - step.hist_re[p];
        const double ei = ti - step.hist_im[p];
        const double cand = step.metric_prev[p] + er * er + ei * ei;
        if (cand < best) {
          best = cand;
          best_o = static_cast<std::uint8_t>(o);
        }
      }
      step.metric_next[q * m + s] = best;
      step.survivor[q * m + s] = best_o;
    }
  }
}

}  // namespace pot::simd::scalar
