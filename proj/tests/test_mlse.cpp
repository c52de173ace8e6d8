#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "pot/errors.hpp"
#include "pot/mlse.hpp"
#include "pot/montecarlo.hpp"
#include "pot/simd/kernels.hpp"

using namespace pot;

namespace {

// y[j] = sum_i taps[i] d[j + 3 - i], j = -3 .. B+2
std::vector<cd> convolve(const std::vector<cd>& taps, const std::vector<cd>& d) {
  const int B = static_cast<int>(d.size());
  std::vector<cd> y(static_cast<std::size_t>(B + 6));
  for (int j = -3; j <= B + 2; ++j)
    for (int i = 0; i < 7; ++i) {
      const int p = j + 3 - i;
      if (p >= 0 && p < B) y[static_cast<std::size_t>(j + 3)] += taps[static_cast<std::size_t>(i)] * d[static_cast<std::size_t>(p)];
    }
  return y;
}

std::vector<cd> noisy(std::vector<cd> y, double n0, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(n0 / 2));
  for (auto& v : y) v += cd{g(rng), g(rng)};
  return y;
}

const std::vector<cd> kTaps{{0.05, 0.0}, {0.2, -0.1}, {0.5, 0.1}, {1.0, 0.0}, {0.4, 0.2}, {-0.15, 0.05}, {0.05, 0.0}};

// least-squares block equalizer: solve (H^H H) d = H^H y by Gaussian elimination
std::vector<cd> zf_block(const std::vector<cd>& taps, const std::vector<cd>& y, int B) {
  const int R = B + 6;
  std::vector<cd> H(static_cast<std::size_t>(R * B));
  for (int j = 0; j < R; ++j)
    for (int i = 0; i < 7; ++i) {
      const int p = j + 3 - i - 3;
      if (p >= 0 && p < B) H[static_cast<std::size_t>(j * B + p)] = taps[static_cast<std::size_t>(i)];
    }
  std::vector<cd> A(static_cast<std::size_t>(B * B)), rhs(static_cast<std::size_t>(B));
  for (int r = 0; r < B; ++r) {
    for (int c = 0; c < B; ++c)
      for (int j = 0; j < R; ++j)
        A[static_cast<std::size_t>(r * B + c)] += std::conj(H[static_cast<std::size_t>(j * B + r)]) * H[static_cast<std::size_t>(j * B + c)];
    for (int j = 0; j < R; ++j) rhs[static_cast<std::size_t>(r)] += std::conj(H[static_cast<std::size_t>(j * B + r)]) * y[static_cast<std::size_t>(j)];
  }
  for (int k = 0; k < B; ++k)
    for (int r = k + 1; r < B; ++r) {
      const cd f = A[static_cast<std::size_t>(r * B + k)] / A[static_cast<std::size_t>(k * B + k)];
      for (int c = k; c < B; ++c) A[static_cast<std::size_t>(r * B + c)] -= f * A[static_cast<std::size_t>(k * B + c)];
      rhs[static_cast<std::size_t>(r)] -= f * rhs[static_cast<std::size_t>(k)];
    }
  std::vector<cd> d(static_cast<std::size_t>(B));
  for (int k = B - 1; k >= 0; --k) {
    cd s = rhs[static_cast<std::size_t>(k)];
    for (int c = k + 1; c < B; ++c) s -= A[static_cast<std::size_t>(k * B + c)] * d[static_cast<std::size_t>(c)];
    d[static_cast<std::size_t>(k)] = s / A[static_cast<std::size_t>(k * B + k)];
  }
  return d;
}

}  // namespace

TEST_CASE("noise-free sequences are recovered exactly") {
  std::mt19937_64 rng(1);
  // 16-QAM needs 16^6 states, beyond the equalizer limit
  {
    const int M = 4;
    const QamConstellation c(M);
    std::uniform_int_distribution<int> pick(0, M - 1);
    std::vector<int> idx(40);
    std::vector<cd> d(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      idx[k] = pick(rng);
      d[k] = c.point(idx[k]);
    }
    CHECK(mlse_equalize(convolve(kTaps, d), kTaps, c.points()) == idx);
  }
}

TEST_CASE("Viterbi decisions equal exhaustive maximum likelihood") {
  const QamConstellation c(4);
  const int B = 5;
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> pick(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<cd> d(B);
    for (auto& x : d) x = c.point(pick(rng));
    const std::vector<cd> y = noisy(convolve(kTaps, d), 0.6, rng);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> arg;
    for (int code = 0; code < 1024; ++code) {
      std::vector<int> s(B);
      std::vector<cd> cand(B);
      for (int k = 0, v = code; k < B; ++k, v /= 4) {
        s[static_cast<std::size_t>(k)] = v % 4;
        cand[static_cast<std::size_t>(k)] = c.point(v % 4);
      }
      const std::vector<cd> model = convolve(kTaps, cand);
      double metric = 0.0;
      for (std::size_t j = 0; j < y.size(); ++j) metric += std::norm(y[j] - model[j]);
      if (metric < best) {
        best = metric;
        arg = s;
      }
    }
    CHECK(mlse_equalize(y, kTaps, c.points(), 20) == arg);
  }
}

TEST_CASE("MLSE beats a linear zero-forcing block equalizer on a 3-tap channel") {
  const std::vector<cd> taps{{0, 0}, {0, 0}, {0.6, 0.0}, {1.0, 0.0}, {0.6, 0.0}, {0, 0}, {0, 0}};
  const QamConstellation c(4);
  const MlseEqualizer eq(taps, c.points());
  const int B = 64;
  // Es = 1, Eb/N0 = 4 dB, bits per symbol 2
  const double n0 = 1.0 / (2 * std::pow(10.0, 0.4));
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> pick(0, 3);
  long err_mlse = 0, err_zf = 0, bits = 0;
  while (bits < 100000) {
    std::vector<int> idx(B);
    std::vector<cd> d(B);
    for (int k = 0; k < B; ++k) {
      idx[static_cast<std::size_t>(k)] = pick(rng);
      d[static_cast<std::size_t>(k)] = c.point(idx[static_cast<std::size_t>(k)]);
    }
    const std::vector<cd> y = noisy(convolve(taps, d), n0, rng);
    const std::vector<int> m = eq.equalize(y);
    const std::vector<cd> z = zf_block(taps, y, B);
    for (int k = 0; k < B; ++k) {
      err_mlse += c.bit_errors(m[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(k)]);
      err_zf += c.bit_errors(c.slice(z[static_cast<std::size_t>(k)]), idx[static_cast<std::size_t>(k)]);
    }
    bits += 2 * B;
  }
  MESSAGE("MLSE BER " << double(err_mlse) / bits << ", ZF BER " << double(err_zf) / bits);
  CHECK(err_mlse <= err_zf);
  CHECK(err_mlse > 0);
}

TEST_CASE("short traceback still decodes clean input") {
  const QamConstellation c(4);
  std::vector<cd> d(30);
  std::vector<int> idx(30);
  for (std::size_t k = 0; k < d.size(); ++k) {
    idx[k] = static_cast<int>((k * 7 + 1) % 4);
    d[k] = c.point(idx[k]);
  }
  CHECK(mlse_equalize(convolve(kTaps, d), kTaps, c.points(), 3) == idx);
}

TEST_CASE("scalar and vector kernels give the same decisions") {
  const QamConstellation c(4);
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> pick(0, 3);
  std::vector<cd> d(96);
  for (auto& x : d) x = c.point(pick(rng));
  const std::vector<cd> y = noisy(convolve(kTaps, d), 0.5, rng);
  const simd::Isa before = simd::active_isa();
  simd::set_active_isa(simd::Isa::Scalar);
  const auto ref = mlse_equalize(y, kTaps, c.points());
  simd::set_active_isa(simd::detected_isa());
  const auto vec = mlse_equalize(y, kTaps, c.points());
  simd::set_active_isa(before);
  CHECK(ref == vec);
}

TEST_CASE("argument errors") {
  const QamConstellation q4(4), q64(64);
  CHECK_THROWS_AS(MlseEqualizer(std::vector<cd>(5, 1.0), q4.points()), ParameterError);
  CHECK_THROWS_AS(MlseEqualizer(kTaps, q64.points()), ConfigError);
  CHECK_THROWS_AS(MlseEqualizer(kTaps, q4.points(), 0), ParameterError);
  const MlseEqualizer eq(kTaps, q4.points());
  CHECK(eq.states() == 4096);
  CHECK_THROWS_AS(eq.equalize(std::vector<cd>(6)), LengthError);
}
