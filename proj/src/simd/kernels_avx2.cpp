// AVX2 variants. Built with -mavx2 -mfma -ffp-contract=off; only reached
// through the dispatcher after a CPU feature check.

#include "pot/simd/kernels.hpp"

#include <immintrin.h>

#include <limits>

namespace pot::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

cd dot_conj(std::span<const cd> x, std::span<const cd> y) {
  const std::size_t n = x.size();
  const auto* px = reinterpret_cast<const double*>(x.data());
  const auto* py = reinterpret_cast<const double*>(y.data());
  // lanes of acc_re hold a*c, b*d; lanes of acc_im hold a*d, b*c
  __m256d acc_re0 = _mm256_setzero_pd(), acc_re1 = _mm256_setzero_pd();
  __m256d acc_im0 = _mm256_setzero_pd(), acc_im1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d x0 = _mm256_loadu_pd(px + 2 * k);
    const __m256d y0 = _mm256_loadu_pd(py + 2 * k);
    const __m256d x1 = _mm256_loadu_pd(px + 2 * k + 4);
    const __m256d y1 = _mm256_loadu_pd(py + 2 * k + 4);
    acc_re0 = _mm256_fmadd_pd(x0, y0, acc_re0);
    acc_re1 = _mm256_fmadd_pd(x1, y1, acc_re1);
    acc_im0 = _mm256_fmadd_pd(x0, _mm256_permute_pd(y0, 0b0101), acc_im0);
    acc_im1 = _mm256_fmadd_pd(x1, _mm256_permute_pd(y1, 0b0101), acc_im1);
  }
  for (; k + 2 <= n; k += 2) {
    const __m256d x0 = _mm256_loadu_pd(px + 2 * k);
    const __m256d y0 = _mm256_loadu_pd(py + 2 * k);
    acc_re0 = _mm256_fmadd_pd(x0, y0, acc_re0);
    acc_im0 = _mm256_fmadd_pd(x0, _mm256_permute_pd(y0, 0b0101), acc_im0);
  }
  const __m256d acc_re = _mm256_add_pd(acc_re0, acc_re1);
  const __m256d acc_im = _mm256_add_pd(acc_im0, acc_im1);
  double re = hsum(acc_re);
  // im = sum(b*c) - sum(a*d): odd lanes minus even lanes
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc_im);
  double im = (lanes[1] + lanes[3]) - (lanes[0] + lanes[2]);
  for (; k < n; ++k) {
    const double a = x[k].real(), b = x[k].imag();
    const double c = y[k].real(), d = y[k].imag();
    re += a * c + b * d;
    im += b * c - a * d;
  }
  return {re, im};
}

double energy(std::span<const cd> x) {
  const std::size_t n = x.size();
  const auto* px = reinterpret_cast<const double*>(x.data());
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d a = _mm256_loadu_pd(px + 2 * k);
    const __m256d b = _mm256_loadu_pd(px + 2 * k + 4);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    acc1 = _mm256_fmadd_pd(b, b, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) acc += x[k].real() * x[k].real() + x[k].imag() * x[k].imag();
  return acc;
}

void axpy(cd a, std::span<const cd> x, std::span<cd> out) {
  const std::size_t n = x.size();
  const auto* px = reinterpret_cast<const double*>(x.data());
  auto* po = reinterpret_cast<double*>(out.data());
  const __m256d ar = _mm256_set1_pd(a.real());
  const __m256d ai = _mm256_set1_pd(a.imag());
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d v = _mm256_loadu_pd(px + 2 * k);
    const __m256d t1 = _mm256_mul_pd(v, ar);
    const __m256d t2 = _mm256_mul_pd(_mm256_permute_pd(v, 0b0101), ai);
    const __m256d o = _mm256_loadu_pd(po + 2 * k);
    _mm256_storeu_pd(po + 2 * k, _mm256_add_pd(o, _mm256_addsub_pd(t1, t2)));
  }
  for (; k < n; ++k) out[k] += a * x[k];
}

void viterbi_acs(const AcsStep& step) {
  const std::size_t states = step.metric_prev.size();
  const std::size_t m = step.target.size();
  const std::size_t q_count = states / m;
  const double* mp = step.metric_prev.data();
  const double* hr = step.hist_re.data();
  const double* hi = step.hist_im.data();
  alignas(32) double best_lanes[4];
  alignas(32) double o_lanes[4];
  for (std::size_t s = 0; s < m; ++s) {
    const double tr_s = step.target[s].real();
    const double ti_s = step.target[s].imag();
    const __m256d tr = _mm256_set1_pd(tr_s);
    const __m256d ti = _mm256_set1_pd(ti_s);
    std::size_t q = 0;
    for (; q + 4 <= q_count; q += 4) {
      __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
      __m256d best_o = _mm256_setzero_pd();
      for (std::size_t o = 0; o < m; ++o) {
        const std::size_t p = q + o * q_count;
        const __m256d er = _mm256_sub_pd(tr, _mm256_loadu_pd(hr + p));
        const __m256d ei = _mm256_sub_pd(ti, _mm256_loadu_pd(hi + p));
        // same association as the scalar reference: (mp + er^2) + ei^2
        const __m256d t = _mm256_add_pd(_mm256_loadu_pd(mp + p), _mm256_mul_pd(er, er));
        const __m256d cand = _mm256_add_pd(t, _mm256_mul_pd(ei, ei));
        const __m256d lt = _mm256_cmp_pd(cand, best, _CMP_LT_OQ);
        best = _mm256_blendv_pd(best, cand, lt);
        best_o = _mm256_blendv_pd(best_o, _mm256_set1_pd(static_cast<double>(o)), lt);
      }
      _mm256_store_pd(best_lanes, best);
      _mm256_store_pd(o_lanes, best_o);
      for (int l = 0; l < 4; ++l) {
        step.metric_next[(q + l) * m + s] = best_lanes[l];
        step.survivor[(q + l) * m + s] = static_cast<std::uint8_t>(o_lanes[l]);
      }
    }
    for (; q < q_count; ++q) {
      double best = std::numeric_limits<double>::infinity();
      std::uint8_t best_o = 0;
      for (std::size_t o = 0; o < m; ++o) {
        const std::size_t p = q + o * q_count;
        const double er = tr_s - hr[p];
        const double ei = ti_s - hi[p];
        const double cand = mp[p] + er * er + ei * ei;
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

}  // namespace pot::simd::avx2
