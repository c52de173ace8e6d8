#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "pot/simd/kernels.hpp"

using namespace pot::simd;

namespace {

std::vector<cd> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<cd> v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

bool have_avx2() { return detected_isa() == Isa::Avx2; }

}  // namespace

TEST_CASE("dispatch honours overrides and reports names") {
  const Isa before = active_isa();
  CHECK(set_active_isa(Isa::Scalar) == Isa::Scalar);
  CHECK(active_isa() == Isa::Scalar);
  CHECK(isa_name(Isa::Scalar) == "scalar");
  set_active_isa(before);
}

TEST_CASE("vector kernels agree with the scalar reference") {
  if (!have_avx2()) {
    MESSAGE("AVX2 unavailable; only the scalar path is exercised");
    return;
  }
  std::mt19937_64 rng(11);
  for (std::size_t n : {0u, 1u, 2u, 3u, 5u, 8u, 17u, 64u, 1001u}) {
    const auto x = random_vector(n, rng), y = random_vector(n, rng);
    const cd ref = scalar::dot_conj(x, y), vec = avx2::dot_conj(x, y);
    const double scale = std::sqrt(scalar::energy(x) * scalar::energy(y)) + 1e-300;
    CHECK(std::abs(ref - vec) <= 1e-14 * scale * (1.0 + std::sqrt(static_cast<double>(n))));
    CHECK(avx2::energy(x) == doctest::Approx(scalar::energy(x)).epsilon(1e-14));

    auto out_ref = random_vector(n, rng);
    auto out_vec = out_ref;
    const cd a{0.3, -1.7};
    scalar::axpy(a, x, out_ref);
    avx2::axpy(a, x, out_vec);
    for (std::size_t k = 0; k < n; ++k) CHECK(out_ref[k] == out_vec[k]);
  }
}

TEST_CASE("add-compare-select variants produce identical metrics and survivors") {
  if (!have_avx2()) return;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (std::size_t m : {2u, 4u, 16u}) {
    const std::size_t states = m * m * m;
    std::vector<double> prev(states), hre(states), him(states);
    for (std::size_t s = 0; s < states; ++s) {
      prev[s] = s % 7 == 3 ? std::numeric_limits<double>::infinity() : u(rng);
      hre[s] = u(rng) - 5.0;
      him[s] = u(rng) - 5.0;
    }
    const auto target = random_vector(m, rng);
    std::vector<double> next_ref(states), next_vec(states);
    std::vector<std::uint8_t> sur_ref(states), sur_vec(states);
    scalar::viterbi_acs({prev, hre, him, target, next_ref, sur_ref});
    avx2::viterbi_acs({prev, hre, him, target, next_vec, sur_vec});
    CHECK(next_ref == next_vec);
    CHECK(sur_ref == sur_vec);
  }
}

TEST_CASE("scalar add-compare-select matches a direct evaluation") {
  const std::size_t m = 2, states = 8, q = states / m;
  std::vector<double> prev{0, 1, 2, 3, 4, 5, 6, 7}, hre(states, 0.0), him(states, 0.0);
  for (std::size_t s = 0; s < states; ++s) hre[s] = 0.1 * static_cast<double>(s);
  const std::vector<cd> target{{1.0, 0.0}, {-1.0, 0.0}};
  std::vector<double> next(states);
  std::vector<std::uint8_t> sur(states);
  scalar::viterbi_acs({prev, hre, him, target, next, sur});
  for (std::size_t qq = 0; qq < q; ++qq)
    for (std::size_t s = 0; s < m; ++s) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t o = 0; o < m; ++o) {
        const std::size_t p = qq + o * q;
        const double v = prev[p] + std::norm(target[s] - cd{hre[p], him[p]});
        if (v < best) {
          best = v;
          arg = o;
        }
      }
      CHECK(next[qq * m + s] == doctest::Approx(best));
      CHECK(sur[qq * m + s] == arg);
    }
}
