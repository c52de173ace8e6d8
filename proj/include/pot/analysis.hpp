#pragma once

// Average BER of square QAM over Rayleigh fading with interference described
// by its Laplace transform, plus path loss and fractional power control.
//
// Interference powers are expressed relative to the victim's received symbol
// energy (Es = 1), so a noise density N0 corresponds to Eb/N0 = 1 / (N0 log2 M).

#include <functional>
#include <span>
#include <vector>

#include "pot/interference.hpp"
#include "pot/quadrature.hpp"

namespace pot {

struct ModQam {
  int M = 4;
  std::vector<double> w;
  std::vector<int> i;

  static ModQam make(int M);
  int bits_per_symbol() const;
  /// (M - 1) / (3 log2 M): Es / Eb scaling of the erfc argument.
  double snr_scale() const;
};

/// Symbol SNR entering the erfc expansion: 3 log2(M) ebn0 / (M - 1).
double qam_snr(const ModQam& mod, double ebn0_linear);

/// sum_i w_i erfc((2i + 1) sqrt(snr / 2)), clamped to [0, 1/2].
double qam_awgn_ber(const ModQam& mod, double snr_linear);

/// Moment generating function E[exp(-z y)] of a nonnegative variable. The
/// complement 1 - value(z) is carried separately so small interference does not
/// cancel against 1; when empty it is computed as 1 - value(z).
struct Transform {
  std::function<double(double)> value;
  std::function<double(double)> complement;

  double operator()(double z) const { return value(z); }
  double one_minus(double z) const { return complement ? complement(z) : 1.0 - value(z); }

  static Transform none();  ///< y = 0
};

/// 1 - (1 / sqrt(pi)) int_0^inf exp(-z (1 + b)) z^(-1/2) L_y(a z) dz.
/// Evaluated after z = u^2 in the cancellation-free form
/// (2 / sqrt(pi)) int_0^inf exp(-u^2) [1 - exp(-b u^2) L_y(a u^2)] du.
double lemma1_rhs(const Transform& mgf, double a, double b, const QuadOptions& options = {});
double lemma1_rhs(const std::function<double(double)>& mgf, double a, double b, const QuadOptions& options = {});

struct NetworkModel {
  double lambda = 1.0 / (3.14159265358979323846 * 50.0 * 50.0);  ///< aggressors per m^2
  double d_min = 25.0;                                             ///< m
  double D = 10.0;                                                 ///< victim link distance, m
  double K0 = 51.3;                                                ///< dB at 1 m
  double n = 40.0;                                                 ///< dB per decade
  double beta = 0.0;                                               ///< compensation in [0, 1]
  double noise_power = 0.0;  ///< linear per-subcarrier noise; informational, BER sweeps use Eb/N0

  void validate() const;
};

/// D^((n - beta n) / 10) r^(beta n / 10) d^(-n / 10): aggressor received power
/// relative to the victim's under fractional power control.
double power_ratio(double D, double r_own, double d_k, const NetworkModel& net);

/// 11.8 + 45 log10(fc) + 40 log10(d / 1000), fc in MHz, d in m.
double pathloss_db(double d_m, double fc_mhz);

struct PathlossConstants {
  double K0 = 0.0;
  double n = 0.0;
};

/// L = K0 + n log10(d) with d in metres.
PathlossConstants pathloss_constants(double fc_mhz);

struct CfoPmf {
  std::vector<double> eps_levels;  ///< in F0
  std::vector<double> probs;

  void validate() const;
};

/// One CFO level: its probability and the gain Psi at equally weighted tau
/// nodes (a single entry when Psi is treated as constant in tau).
struct InterferenceLevel {
  double prob = 1.0;
  std::vector<double> psi;
};

/// Psi(tau) for one eps column: {tau mean} when the column is flat (stddev
/// below `flat_tol` times the mean), otherwise the whole tau column.
std::vector<double> psi_profile(const GainTable& table, std::size_t eps_index, double flat_tol = 0.01);

/// 1 / (1 + z c psi_bar).
double laplace_single(double z, double c, double psi_bar);

/// tau-average of 1 / (1 + z c psi(tau)) over equally weighted nodes.
double laplace_single(double z, double c, std::span<const double> psi_tau);

Transform single_aggressor_transform(double c, std::vector<double> psi_tau);

/// Single-aggressor power ratio for a target SIR in dB: 10^(-SIR / 10).
double sir_to_ratio(double sir_db);

/// PGFL of the PPP with Rayleigh aggressor links, CFO levels and own-link
/// distances r with density 2 pi lambda r exp(-lambda pi r^2).
double laplace_multi(double z, const NetworkModel& net, const std::vector<InterferenceLevel>& levels,
                     const QuadOptions& options = {});

/// Same, with one constant Psi per CFO level.
double laplace_multi(double z, const NetworkModel& net, const CfoPmf& cfo, const std::function<double(double)>& psi_of_eps,
                     const QuadOptions& options = {});

/// exponent int_{d_min}^inf (1 - E[...]) v dv of the PGFL (without the -2 pi lambda factor).
double ppp_exponent(double z, const NetworkModel& net, const std::vector<InterferenceLevel>& levels,
                    const QuadOptions& options = {});

Transform ppp_transform(const NetworkModel& net, std::vector<InterferenceLevel> levels, const QuadOptions& options = {});

/// sum_i w_i lemma1_rhs(L_I, a_i (M - 1) / 3, a_i snr_scale / ebn0), a_i = 2 / (2i + 1)^2.
/// For 4-QAM the interference argument reduces to 2z / (2i + 1)^2.
double avg_ber(double ebn0_linear, const ModQam& mod, const Transform& laplace, const QuadOptions& options = {});

struct BerCurve {
  std::vector<double> ebn0_db;
  std::vector<double> ber;
  std::vector<double> ci_halfwidth;  ///< empty for analytic curves
  std::vector<double> bits;          ///< empty for analytic curves

  std::size_t size() const { return ebn0_db.size(); }
};

double db_to_linear(double db);

BerCurve analytic_curve(const std::vector<double>& ebn0_db, const ModQam& mod, const Transform& laplace,
                        const QuadOptions& options = {});

}  // namespace pot
