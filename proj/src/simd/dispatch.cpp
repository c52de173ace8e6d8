#include "pot/simd/kernels.hpp"

#include <atomic>
#include <cassert>

namespace pot::simd {

namespace {

bool cpu_has_avx2() {
#if defined(POT_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detected_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Avx2: return "avx2";
    case Isa::Scalar: break;
  }
  return "scalar";
}

Isa detected_isa() {
  static const Isa isa = cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
  return isa;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

Isa set_active_isa(Isa isa) {
  if (isa == Isa::Avx2 && detected_isa() != Isa::Avx2) isa = Isa::Scalar;
  active().store(isa, std::memory_order_relaxed);
  return isa;
}

cd dot_conj(std::span<const cd> x, std::span<const cd> y) {
  assert(x.size() == y.size());
#if defined(POT_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::dot_conj(x, y);
#endif
  return scalar::dot_conj(x, y);
}

double energy(std::span<const cd> x) {
#if defined(POT_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::energy(x);
#endif
  return scalar::energy(x);
}

void axpy(cd a, std::span<const cd> x, std::span<cd> out) {
  assert(x.size() == out.size());
#if defined(POT_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::axpy(a, x, out);
#endif
  scalar::axpy(a, x, out);
}

void viterbi_acs(const AcsStep& step) {
#if defined(POT_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::viterbi_acs(step);
#endif
  scalar::viterbi_acs(step);
}

#if !defined(POT_HAVE_AVX2)
// Keep the avx2 symbols linkable on builds without the AVX2 translation unit.
namespace avx2 {
cd dot_conj(std::span<const cd> x, std::span<const cd> y) { return scalar::dot_conj(x, y); }
double energy(std::span<const cd> x) { return scalar::energy(x); }
void axpy(cd a, std::span<const cd> x, std::span<cd> out) { scalar::axpy(a, x, out); }
void viterbi_acs(const AcsStep& step) { scalar::viterbi_acs(step); }
}  // namespace avx2
#endif

}  // namespace pot::simd
