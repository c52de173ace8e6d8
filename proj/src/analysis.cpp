#include "pot/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>

#include "pot/parallel.hpp"

namespace pot {

namespace {

constexpr double kPi = std::numbers::pi;

// exp(-u^2) falls below 1e-27 here, far under any tolerance we request
constexpr double kLemmaUpper = 8.0;

}  // namespace

ModQam ModQam::make(int M) {
  switch (M) {
    case 4: return {4, {0.5}, {0}};
    case 16: return {16, {3.0 / 8, 2.0 / 8, -1.0 / 8}, {0, 1, 2}};
    case 64: return {64, {7.0 / 24, 6.0 / 24, -1.0 / 24, 1.0 / 24, -1.0 / 24}, {0, 1, 2, 4, 6}};
    default: break;
  }
  throw ParameterError("unsupported constellation size " + std::to_string(M) + " (expected 4, 16 or 64)");
}

int ModQam::bits_per_symbol() const { return static_cast<int>(std::lround(std::log2(M))); }

double ModQam::snr_scale() const { return (M - 1.0) / (3.0 * bits_per_symbol()); }

double qam_snr(const ModQam& mod, double ebn0_linear) { return ebn0_linear / mod.snr_scale(); }

double qam_awgn_ber(const ModQam& mod, double snr_linear) {
  if (!(snr_linear >= 0.0)) throw ParameterError("SNR must be nonnegative");
  double s = 0.0;
  for (std::size_t k = 0; k < mod.w.size(); ++k) s += mod.w[k] * std::erfc((2 * mod.i[k] + 1) * std::sqrt(snr_linear / 2));
  return std::clamp(s, 0.0, 0.5);
}

Transform Transform::none() {
  return {[](double) { return 1.0; }, [](double) { return 0.0; }};
}

double lemma1_rhs(const Transform& mgf, double a, double b, const QuadOptions& options) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw ParameterError("erfc-mixture coefficients must be nonnegative");
  auto f = [&](double u) {
    const double u2 = u * u;
    const double keep = std::exp(-b * u2);
    return std::exp(-u2) * (-std::expm1(-b * u2) + keep * mgf.one_minus(a * u2));
  };
  const QuadResult r = integrate(f, 0.0, kLemmaUpper, options, "erfc-mixture integral");
  return std::clamp(2.0 / std::sqrt(kPi) * r.value, 0.0, 1.0);
}

double lemma1_rhs(const std::function<double(double)>& mgf, double a, double b, const QuadOptions& options) {
  return lemma1_rhs(Transform{mgf, {}}, a, b, options);
}

void NetworkModel::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("aggressor intensity must be positive");
  if (!(D > 0.0)) throw ParameterError("victim link distance must be positive");
  if (!(d_min >= D)) throw ParameterError("aggressors must be at least as far as the victim link (d_min >= D)");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ParameterError("compensation beta must lie in [0, 1]");
  if (!(n > 0.0)) throw ParameterError("path-loss slope must be positive");
  if (!(noise_power >= 0.0)) throw ParameterError("noise power must be nonnegative");
}

double power_ratio(double D, double r_own, double d_k, const NetworkModel& net) {
  if (!(D > 0.0) || !(r_own > 0.0) || !(d_k > 0.0)) throw ParameterError("distances must be positive");
  if (std::isinf(d_k)) return 0.0;
  const double e = net.n / 10.0;
  return std::pow(D, e - net.beta * e) * std::pow(r_own, net.beta * e) * std::pow(d_k, -e);
}

double pathloss_db(double d_m, double fc_mhz) {
  if (!(d_m > 0.0) || !(fc_mhz > 0.0)) throw ParameterError("distance and carrier frequency must be positive");
  return 11.8 + 45.0 * std::log10(fc_mhz) + 40.0 * std::log10(d_m / 1000.0);
}

PathlossConstants pathloss_constants(double fc_mhz) {
  return {pathloss_db(1.0, fc_mhz), 40.0};
}

void CfoPmf::validate() const {
  if (eps_levels.empty() || eps_levels.size() != probs.size())
    throw ParameterError("CFO levels and probabilities must be nonempty and of equal length");
  double s = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw ParameterError("CFO probabilities must be nonnegative");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-12) throw ParameterError("CFO probabilities must sum to 1");
}

std::vector<double> psi_profile(const GainTable& table, std::size_t eps_index, double flat_tol) {
  const double mu = table.tau_mean(eps_index);
  if (table.tau_stddev(eps_index) <= flat_tol * mu) return {mu};
  std::vector<double> col(table.tau.size());
  for (std::size_t i = 0; i < col.size(); ++i) col[i] = table.at(i, eps_index);
  return col;
}

double laplace_single(double z, double c, double psi_bar) {
  if (!(z >= 0.0)) throw ParameterError("Laplace argument must be nonnegative");
  return 1.0 / (1.0 + z * c * psi_bar);
}

double laplace_single(double z, double c, std::span<const double> psi_tau) {
  if (psi_tau.empty()) throw ParameterError("empty tau profile");
  double s = 0.0;
  for (double p : psi_tau) s += laplace_single(z, c, p);
  return s / static_cast<double>(psi_tau.size());
}

Transform single_aggressor_transform(double c, std::vector<double> psi_tau) {
  if (psi_tau.empty()) throw ParameterError("empty tau profile");
  if (!(c >= 0.0)) throw ParameterError("aggressor power ratio must be nonnegative");
  auto shared = std::make_shared<const std::vector<double>>(std::move(psi_tau));
  Transform t;
  t.value = [c, shared](double z) { return laplace_single(z, c, *shared); };
  t.complement = [c, shared](double z) {
    double s = 0.0;
    for (double p : *shared) s += z * c * p / (1.0 + z * c * p);
    return s / static_cast<double>(shared->size());
  };
  return t;
}

double sir_to_ratio(double sir_db) { return std::pow(10.0, -sir_db / 10.0); }

namespace {

void check_levels(const std::vector<InterferenceLevel>& levels) {
  if (levels.empty()) throw ParameterError("no CFO levels");
  double s = 0.0;
  for (const auto& l : levels) {
    if (l.psi.empty() || !(l.prob >= 0.0)) throw ParameterError("invalid CFO level");
    for (double p : l.psi)
      if (!(p >= 0.0)) throw ParameterError("interference gain must be nonnegative");
    s += l.prob;
  }
  if (std::abs(s - 1.0) > 1e-12) throw ParameterError("CFO probabilities must sum to 1");
}

double mean_psi(const std::vector<InterferenceLevel>& levels) {
  double s = 0.0;
  for (const auto& l : levels)
    s += l.prob * std::accumulate(l.psi.begin(), l.psi.end(), 0.0) / static_cast<double>(l.psi.size());
  return s;
}

// E_s[Y s^q / (1 + Y s^q)] for s ~ Exp(1)
double power_controlled_term(double y, double q, const QuadOptions& options) {
  if (y == 0.0) return 0.0;
  if (q == 0.0) return y / (1.0 + y);
  if (y < 1e-12) return y * std::tgamma(1.0 + q);
  auto f = [y, q](double s) {
    const double x = y * std::pow(s, q);
    return std::exp(-s) * x / (1.0 + x);
  };
  QuadOptions inner = options;
  inner.rel_tol = std::min(options.rel_tol * 1e-2, 1e-12);
  // the exponential factor is below 1e-26 past s = 60
  return integrate(f, 0.0, 60.0, inner, "own-link distance integral").value;
}

}  // namespace

double ppp_exponent(double z, const NetworkModel& net, const std::vector<InterferenceLevel>& levels,
                    const QuadOptions& options) {
  net.validate();
  check_levels(levels);
  if (!(z >= 0.0)) throw ParameterError("Laplace argument must be nonnegative");
  const double p = net.n / 10.0 - 2.0;
  if (!(p > 0.0)) throw ParameterError("PPP interference diverges for path-loss slope n <= 20");
  if (z == 0.0) return 0.0;
  const double q = net.beta * net.n / 20.0;
  const double lp = net.lambda * kPi;
  const double scale = z * std::pow(net.D, (net.n - net.beta * net.n) / 10.0) * std::pow(lp, -q);
  const double jac0 = net.d_min * net.d_min / p;
  auto inner = [&](double x0) {
    double s = 0.0;
    for (const auto& l : levels) {
      double t = 0.0;
      for (double psi : l.psi) t += power_controlled_term(x0 * psi, q, options);
      s += l.prob * t / static_cast<double>(l.psi.size());
    }
    return s;
  };
  // w = (d_min / v)^p maps [d_min, inf) onto (0, 1]
  auto f = [&](double w) {
    if (w <= 1e-300)
      return scale * std::pow(net.d_min, -net.n / 10.0) * std::tgamma(1.0 + q) * mean_psi(levels) * jac0;
    const double v = net.d_min * std::pow(w, -1.0 / p);
    const double x0 = scale * std::pow(v, -net.n / 10.0);
    return inner(x0) * jac0 * std::pow(w, -2.0 / p - 1.0);
  };
  return integrate(f, 0.0, 1.0, options, "PPP radial integral").value;
}

double laplace_multi(double z, const NetworkModel& net, const std::vector<InterferenceLevel>& levels,
                     const QuadOptions& options) {
  const double e = ppp_exponent(z, net, levels, options);
  return std::exp(-2.0 * kPi * net.lambda * e);
}

double laplace_multi(double z, const NetworkModel& net, const CfoPmf& cfo, const std::function<double(double)>& psi_of_eps,
                     const QuadOptions& options) {
  cfo.validate();
  std::vector<InterferenceLevel> levels;
  for (std::size_t j = 0; j < cfo.eps_levels.size(); ++j) levels.push_back({cfo.probs[j], {psi_of_eps(cfo.eps_levels[j])}});
  return laplace_multi(z, net, levels, options);
}

Transform ppp_transform(const NetworkModel& net, std::vector<InterferenceLevel> levels, const QuadOptions& options) {
  net.validate();
  check_levels(levels);
  auto shared = std::make_shared<const std::vector<InterferenceLevel>>(std::move(levels));
  Transform t;
  t.value = [net, shared, options](double z) { return laplace_multi(z, net, *shared, options); };
  t.complement = [net, shared, options](double z) {
    return -std::expm1(-2.0 * kPi * net.lambda * ppp_exponent(z, net, *shared, options));
  };
  return t;
}

double avg_ber(double ebn0_linear, const ModQam& mod, const Transform& laplace, const QuadOptions& options) {
  if (!(ebn0_linear > 0.0)) throw ParameterError("Eb/N0 must be positive");
  double s = 0.0;
  for (std::size_t k = 0; k < mod.w.size(); ++k) {
    const double a = 2.0 / ((2 * mod.i[k] + 1.0) * (2 * mod.i[k] + 1.0));
    const double b = std::isinf(ebn0_linear) ? 0.0 : a * mod.snr_scale() / ebn0_linear;
    s += mod.w[k] * lemma1_rhs(laplace, a * (mod.M - 1) / 3.0, b, options);
  }
  return std::clamp(s, 0.0, 0.5);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

BerCurve analytic_curve(const std::vector<double>& ebn0_db, const ModQam& mod, const Transform& laplace,
                        const QuadOptions& options) {
  BerCurve c;
  c.ebn0_db = ebn0_db;
  c.ber.resize(ebn0_db.size());
  parallel_for(ebn0_db.size(), [&](std::size_t k) { c.ber[k] = avg_ber(db_to_linear(ebn0_db[k]), mod, laplace, options); });
  return c;
}

}  // namespace pot
