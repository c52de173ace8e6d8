#include "pot/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pot/simd/kernels.hpp"

namespace pot {

namespace {

constexpr double kPi = std::numbers::pi;

double rrc_formula(double alpha, double t) {
  const double x = 4.0 * alpha * t;
  return (std::sin(kPi * t * (1.0 - alpha)) + x * std::cos(kPi * t * (1.0 + alpha))) /
         (kPi * t * (1.0 - x * x));
}

double rrc_at_quarter(double alpha) {
  const double a = kPi / (4.0 * alpha);
  return alpha / std::numbers::sqrt2 *
         ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
}

double rrc(double alpha, double t) {
  if (std::abs(t) < 1e-9) return 1.0 - alpha + 4.0 * alpha / kPi;
  if (alpha == 0.0) return std::sin(kPi * t) / (kPi * t);
  const double t0 = 1.0 / (4.0 * alpha);
  const double d = std::abs(t) - t0;
  if (std::abs(d) < 1e-4) {
    // quadratic through the analytic limit and two well-conditioned points
    constexpr double h = 1e-3;
    const double f0 = rrc_at_quarter(alpha);
    const double fm = rrc_formula(alpha, t0 - h);
    const double fp = rrc_formula(alpha, t0 + h);
    return f0 + d * (fp - fm) / (2.0 * h) + d * d * (fp - 2.0 * f0 + fm) / (2.0 * h * h);
  }
  return rrc_formula(alpha, t);
}

double gaussian_half_width(double rho) {
  return std::sqrt(-std::log(kGaussianTruncation) / (kPi * rho));
}

// Index range of the rect pulse on [-1/2, 1/2).
std::int64_t rect_first(int rate) { return static_cast<std::int64_t>(std::ceil(-rate / 2.0)); }
std::int64_t rect_last(int rate) { return static_cast<std::int64_t>(std::ceil(rate / 2.0)) - 1; }

}  // namespace

void FilterSpec::validate() const {
  switch (kind) {
    case FilterKind::Rrc:
      if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("RRC roll-off must lie in [0, 1]");
      break;
    case FilterKind::Gaussian:
      if (!(rho > 0.0) || !std::isfinite(rho)) throw ParameterError("Gaussian rho must be positive");
      break;
    case FilterKind::Rect:
      break;
  }
}

std::string to_string(const FilterSpec& spec) {
  std::ostringstream os;
  switch (spec.kind) {
    case FilterKind::Rrc: os << "rrc(alpha=" << spec.alpha << ")"; break;
    case FilterKind::Gaussian: os << "gaussian(rho=" << spec.rho << ")"; break;
    case FilterKind::Rect: os << "rect"; break;
  }
  return os.str();
}

double raw_pulse(const FilterSpec& spec, double t) {
  switch (spec.kind) {
    case FilterKind::Rrc: return rrc(spec.alpha, t);
    case FilterKind::Gaussian: return std::pow(2.0 * spec.rho, 0.25) * std::exp(-kPi * spec.rho * t * t);
    case FilterKind::Rect: return (t >= -0.5 && t < 0.5) ? 1.0 : 0.0;
  }
  return 0.0;
}

PrototypeFilter PrototypeFilter::make(const FilterSpec& spec, int samples_per_t0, double span) {
  spec.validate();
  if (samples_per_t0 < kMinSamplesPerT0) throw ParameterError("oversampling must be at least 8 samples per T0");
  if (span < 0.0 || (span > 0.0 && span < 1.0)) throw ParameterError("filter span must be at least 1 T0");

  PrototypeFilter g;
  g.spec_ = spec;
  g.rate_ = samples_per_t0;
  std::int64_t first = 0, last = 0;
  switch (spec.kind) {
    case FilterKind::Rrc: {
      const double half = (span > 0.0 ? span : kRrcDefaultSpan) / 2.0;
      const auto h = static_cast<std::int64_t>(std::floor(half * g.rate_ + 1e-9));
      first = -h;
      last = h;
      g.span_ = 2.0 * half;
      break;
    }
    case FilterKind::Gaussian: {
      const double half = span > 0.0 ? span / 2.0 : gaussian_half_width(spec.rho);
      const auto h = static_cast<std::int64_t>(std::floor(half * g.rate_ + 1e-9));
      first = -h;
      last = h;
      g.span_ = 2.0 * half;
      break;
    }
    case FilterKind::Rect:
      first = rect_first(g.rate_);
      last = rect_last(g.rate_);
      g.span_ = 1.0;
      break;
  }
  g.first_ = first;
  g.samples_.resize(static_cast<std::size_t>(last - first + 1));
  for (std::int64_t i = first; i <= last; ++i) {
    g.samples_[static_cast<std::size_t>(i - first)] = raw_pulse(spec, static_cast<double>(i) / g.rate_);
  }
  const double e = simd::scalar::energy(g.samples_) / g.rate_;
  g.scale_ = 1.0 / std::sqrt(e);
  for (cd& v : g.samples_) v *= g.scale_;
  // one refinement pass so the discrete energy is 1 to the last bit or two
  const double e2 = simd::scalar::energy(g.samples_) / g.rate_;
  const double fix = 1.0 / std::sqrt(e2);
  for (cd& v : g.samples_) v *= fix;
  g.scale_ *= fix;
  return g;
}

double PrototypeFilter::value(double t) const {
  double u = t * rate_;
  const double r = std::round(u);
  if (std::abs(u - r) < 1e-9) u = r;
  if (spec_.kind == FilterKind::Rect) return (u >= -0.5 * rate_ && u < 0.5 * rate_) ? scale_ : 0.0;
  if (u < static_cast<double>(first_) - 1e-9 || u > static_cast<double>(last_index()) + 1e-9) return 0.0;
  return scale_ * raw_pulse(spec_, u / rate_);
}

double PrototypeFilter::energy() const { return simd::energy(samples_) / rate_; }

void LatticeParams::validate() const {
  if (!(F > 0.0) || !(T > 0.0) || !std::isfinite(F) || !std::isfinite(T))
    throw ParameterError("lattice spacings must be positive");
  if (N < 1 || K < 1) throw ParameterError("lattice needs N >= 1 and K >= 1");
}

int signal_rate(int q, const LatticeParams& lattice) {
  lattice.validate();
  if (q < kMinSamplesPerT0) throw ParameterError("oversampling must be at least 8 samples per T0");
  const double occupied = std::ceil(lattice.N * lattice.F - 1e-9);
  return q * static_cast<int>(std::max(1.0, occupied));
}

SymbolGrid::SymbolGrid(int K, int N) : K_(K), N_(N) {
  if (K < 1 || N < 1) throw ParameterError("symbol grid needs K >= 1 and N >= 1");
  data_.assign(static_cast<std::size_t>(2 * K - 1) * static_cast<std::size_t>(N), cd{});
}

std::size_t SymbolGrid::index(int m, int n) const {
  if (m < m_min() || m > m_max() || n < 0 || n >= N_) throw ParameterError("symbol index outside grid");
  return static_cast<std::size_t>(m - m_min()) * static_cast<std::size_t>(N_) + static_cast<std::size_t>(n);
}

double BasebandSignal::energy() const { return rate > 0 ? simd::energy(samples) / rate : 0.0; }

BasebandSignal modulated_shift(const PrototypeFilter& g, int m, int n, const LatticeParams& lattice,
                               double extra_time, double extra_freq) {
  lattice.validate();
  const auto shift = static_cast<std::int64_t>(std::llround((m * lattice.T + extra_time) * g.rate()));
  const double f = n * lattice.F + extra_freq;
  BasebandSignal out;
  out.rate = g.rate();
  out.start = g.first_index() + shift;
  const auto src = g.samples();
  out.samples.resize(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double t = static_cast<double>(out.start + static_cast<std::int64_t>(i)) / out.rate;
    out.samples[i] = src[i] * std::polar(1.0, 2.0 * kPi * f * t);
  }
  return out;
}

cd inner_product(const BasebandSignal& x, const BasebandSignal& y) {
  if (x.rate != y.rate) throw ParameterError("inner product of signals on different grids");
  const std::int64_t lo = std::max(x.start, y.start);
  const std::int64_t hi = std::min(x.end(), y.end());
  if (hi <= lo) return {};
  const auto len = static_cast<std::size_t>(hi - lo);
  const std::span<const cd> xs(x.samples.data() + (lo - x.start), len);
  const std::span<const cd> ys(y.samples.data() + (lo - y.start), len);
  return simd::dot_conj(xs, ys) / static_cast<double>(x.rate);
}

void accumulate(BasebandSignal& acc, const BasebandSignal& x, cd a) {
  if (x.samples.empty()) return;
  if (acc.samples.empty()) {
    acc.rate = x.rate;
    acc.start = x.start;
    acc.samples.assign(x.samples.size(), cd{});
  }
  if (acc.rate != x.rate) throw ParameterError("accumulating signals on different grids");
  if (x.start < acc.start || x.end() > acc.end()) {
    const std::int64_t lo = std::min(acc.start, x.start);
    const std::int64_t hi = std::max(acc.end(), x.end());
    std::vector<cd> grown(static_cast<std::size_t>(hi - lo), cd{});
    std::copy(acc.samples.begin(), acc.samples.end(), grown.begin() + (acc.start - lo));
    acc.samples = std::move(grown);
    acc.start = lo;
  }
  std::span<cd> dst(acc.samples.data() + (x.start - acc.start), x.samples.size());
  simd::axpy(a, x.samples, dst);
}

namespace {

void check_grid(const SymbolGrid& grid, const LatticeParams& lattice) {
  if (grid.K() != lattice.K || grid.N() != lattice.N)
    throw ParameterError("symbol grid dimensions do not match the lattice");
}

}  // namespace

BasebandSignal synthesize(const SymbolGrid& grid, const PrototypeFilter& g_tx, const LatticeParams& lattice) {
  lattice.validate();
  check_grid(grid, lattice);
  BasebandSignal out;
  out.rate = g_tx.rate();
  const auto first_shift = std::llround(grid.m_min() * lattice.T * out.rate);
  const auto last_shift = std::llround(grid.m_max() * lattice.T * out.rate);
  out.start = g_tx.first_index() + first_shift;
  out.samples.assign(static_cast<std::size_t>(g_tx.last_index() + last_shift + 1 - out.start), cd{});
  for (int m = grid.m_min(); m <= grid.m_max(); ++m) {
    for (int n = 0; n < grid.N(); ++n) {
      const cd d = grid.at(m, n);
      if (d == cd{}) continue;
      accumulate(out, modulated_shift(g_tx, m, n, lattice), d);
    }
  }
  return out;
}

SymbolGrid analyze(const BasebandSignal& signal, const PrototypeFilter& g_rx, const LatticeParams& lattice) {
  lattice.validate();
  if (signal.rate != g_rx.rate()) throw ParameterError("signal and analysis filter use different grids");
  SymbolGrid out(lattice.K, lattice.N);
  const auto first_shift = std::llround(out.m_min() * lattice.T * signal.rate);
  const auto last_shift = std::llround(out.m_max() * lattice.T * signal.rate);
  const std::int64_t need_lo = g_rx.first_index() + first_shift;
  const std::int64_t need_hi = g_rx.last_index() + last_shift + 1;
  if (signal.start > need_lo || signal.end() < need_hi)
    throw LengthError("signal does not cover the analysis window");
  for (int m = out.m_min(); m <= out.m_max(); ++m) {
    for (int n = 0; n < lattice.N; ++n) {
      out.at(m, n) = inner_product(signal, modulated_shift(g_rx, m, n, lattice));
    }
  }
  return out;
}

cd ambiguity(const PrototypeFilter& g_tx, const PrototypeFilter& g_rx, double dt, double df) {
  if (g_tx.rate() != g_rx.rate()) throw ParameterError("filters on different sampling grids");
  const int rate = g_rx.rate();
  // rx grid indices whose shifted tx argument can be inside the tx support
  const double lo_t = (static_cast<double>(g_tx.first_index()) - 1.0) / rate + dt;
  const double hi_t = (static_cast<double>(g_tx.last_index()) + 1.0) / rate + dt;
  const std::int64_t lo = std::max(g_rx.first_index(), static_cast<std::int64_t>(std::floor(lo_t * rate)));
  const std::int64_t hi = std::min(g_rx.last_index(), static_cast<std::int64_t>(std::ceil(hi_t * rate)));
  if (hi < lo) return {};
  const auto rx = g_rx.samples();
  double re = 0.0, im = 0.0;
  for (std::int64_t k = lo; k <= hi; ++k) {
    const double t = static_cast<double>(k) / rate;
    const double a = g_tx.value(t - dt);
    if (a == 0.0) continue;
    const cd v = a * std::polar(1.0, 2.0 * kPi * df * t) * std::conj(rx[static_cast<std::size_t>(k - g_rx.first_index())]);
    re += v.real();
    im += v.imag();
  }
  return cd{re, im} / static_cast<double>(rate);
}

}  // namespace pot
