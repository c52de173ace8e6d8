#include "pot/mlse.hpp"

#include <algorithm>
#include <limits>

#include "pot/errors.hpp"
#include "pot/simd/kernels.hpp"

namespace pot {

namespace {

using cd = std::complex<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();

// ISI of the six older symbols; digit i-1 of the state holds position k - i.
// Digits whose position lies outside [0, B) contribute nothing.
void fill_hist(std::span<const cd> taps, std::span<const cd> points, std::size_t m, std::size_t states, long k,
               long block, std::vector<double>& re, std::vector<double>& im) {
  re.assign(states, 0.0);
  im.assign(states, 0.0);
  for (std::size_t st = 0; st < states; ++st) {
    std::size_t rest = st;
    cd acc{};
    for (int i = 1; i < kMlseTaps; ++i) {
      const std::size_t digit = rest % m;
      rest /= m;
      const long pos = k - i;
      if (pos >= 0 && pos < block) acc += taps[static_cast<std::size_t>(i)] * points[digit];
    }
    re[st] = acc.real();
    im[st] = acc.imag();
  }
}

}  // namespace

MlseEqualizer::MlseEqualizer(std::span<const cd> taps, std::span<const cd> constellation, int traceback)
    : taps_(taps.begin(), taps.end()), points_(constellation.begin(), constellation.end()), traceback_(traceback) {
  if (taps_.size() != kMlseTaps) throw ParameterError("MLSE needs exactly 7 taps");
  if (traceback_ < 1) throw ParameterError("traceback depth must be at least 1");
  if (points_.size() < 2 || points_.size() > 255) throw ParameterError("constellation size out of range");
  m_ = points_.size();
  double s = 1.0;
  for (int i = 1; i < kMlseTaps; ++i) s *= static_cast<double>(m_);
  if (s > static_cast<double>(kMlseMaxStates))
    throw ConfigError("MLSE state space of " + std::to_string(static_cast<long long>(s)) + " exceeds the 1e7 limit");
  states_ = static_cast<std::size_t>(s);
  fill_hist(taps_, points_, m_, states_, kMlseTaps - 1, kMlseTaps, hist_re_, hist_im_);
}

std::vector<int> MlseEqualizer::equalize(std::span<const cd> observations) const {
  if (observations.size() < static_cast<std::size_t>(kMlseTaps))
    throw LengthError("MLSE needs at least 7 observations");
  const long block = static_cast<long>(observations.size()) - (kMlseTaps - 1);
  const long steps = block + kMlseTaps - 1;
  const std::size_t q_count = states_ / m_;

  std::vector<double> prev(states_, kInf), next(states_);
  prev[0] = 0.0;
  std::vector<std::uint8_t> survivors(static_cast<std::size_t>(steps) * states_);
  std::vector<cd> target(m_);
  std::vector<double> edge_re, edge_im;
  std::vector<int> out(static_cast<std::size_t>(block), -1);

  auto trace = [&](long from_step, std::size_t st, long to_step) {
    for (long k = from_step; k > to_step; --k) {
      const std::size_t o = survivors[static_cast<std::size_t>(k) * states_ + st];
      st = st / m_ + o * q_count;
    }
    return st;
  };

  for (long k = 0; k < steps; ++k) {
    const cd y = observations[static_cast<std::size_t>(k)];
    const bool tail = k >= block;
    for (std::size_t s = 0; s < m_; ++s) target[s] = tail ? y : y - taps_[0] * points_[s];
    const bool full = k >= kMlseTaps - 1 && k <= block;
    if (!full) fill_hist(taps_, points_, m_, states_, k, block, edge_re, edge_im);
    simd::AcsStep step{prev,
                       full ? std::span<const double>(hist_re_) : std::span<const double>(edge_re),
                       full ? std::span<const double>(hist_im_) : std::span<const double>(edge_im),
                       target,
                       next,
                       std::span<std::uint8_t>(survivors.data() + static_cast<std::size_t>(k) * states_, states_)};
    simd::viterbi_acs(step);
    if (tail)
      for (std::size_t st = 0; st < states_; ++st)
        if (st % m_ != 0) next[st] = kInf;
    std::swap(prev, next);

    const long decide = k - traceback_;
    if (decide >= 0 && decide < block) {
      const auto best = static_cast<std::size_t>(std::min_element(prev.begin(), prev.end()) - prev.begin());
      out[static_cast<std::size_t>(decide)] = static_cast<int>(trace(k, best, decide) % m_);
    }
  }
  // flush: the terminated trellis ends in state 0
  std::size_t st = 0;
  for (long k = steps - 1; k >= 0; --k) {
    if (k < block && out[static_cast<std::size_t>(k)] < 0) out[static_cast<std::size_t>(k)] = static_cast<int>(st % m_);
    const std::size_t o = survivors[static_cast<std::size_t>(k) * states_ + st];
    st = st / m_ + o * q_count;
  }
  return out;
}

std::vector<int> mlse_equalize(std::span<const cd> observations, std::span<const cd> taps,
                               std::span<const cd> constellation, int traceback) {
  return MlseEqualizer(taps, constellation, traceback).equalize(observations);
}

}  // namespace pot
