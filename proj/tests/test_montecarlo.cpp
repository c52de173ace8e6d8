#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <set>

#include "pot/montecarlo.hpp"

using namespace pot;
using std::numbers::pi;

namespace {

double combined_z(const TrialResult& a, const TrialResult& b) {
  return std::abs(a.ber - b.ber) / std::hypot(a.sigma, b.sigma);
}

double max_path_difference(const TrialConfig& c, int bursts, std::uint64_t seed) {
  const LinkSimulator s(c);
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < bursts; ++k) {
    const BurstRealization b = s.draw(rng);
    const auto p = s.observe(b, ObservationPath::Projection);
    const auto w = s.observe(b, ObservationPath::Waveform);
    REQUIRE(p.size() == w.size());
    for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(p[i] - w[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("QAM constellations") {
  for (int M : {4, 16, 64}) {
    const QamConstellation c(M, 2.0);
    double e = 0.0;
    for (const cd& p : c.points()) e += std::norm(p);
    CHECK(e / M == doctest::Approx(2.0));
    double dmin = INFINITY;
    for (int a = 0; a < M; ++a) {
      CHECK(c.slice(c.point(a)) == a);
      CHECK(c.bit_errors(a, a) == 0);
      for (int b = 0; b < M; ++b)
        if (a != b) dmin = std::min(dmin, std::abs(c.point(a) - c.point(b)));
    }
    // Gray mapping: nearest neighbours differ in one bit
    for (int a = 0; a < M; ++a)
      for (int b = 0; b < M; ++b)
        if (std::abs(std::abs(c.point(a) - c.point(b)) - dmin) < 1e-12) CHECK(c.bit_errors(a, b) == 1);
  }
  CHECK_THROWS_AS(QamConstellation(8), ParameterError);
}

TEST_CASE("chunk seeds are deterministic and distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t k = 0; k < 1000; ++k) seen.insert(chunk_seed(42, k));
  CHECK(seen.size() == 1000);
  CHECK(chunk_seed(42, 7) == chunk_seed(42, 7));
  CHECK(chunk_seed(42, 7) != chunk_seed(43, 7));
}

TEST_CASE("PPP deployments") {
  const NetworkModel net;
  CHECK(ppp_r_max(net) == doctest::Approx(25.0 * std::sqrt(1000.0)));
  NetworkModel flat = net;
  flat.n = 20.0;
  CHECK_THROWS_AS(ppp_r_max(flat), ParameterError);

  const CfoPmf cfo{{0.0, 0.6}, {0.25, 0.75}};
  std::mt19937_64 rng(1);
  const double r_max = 200.0;
  double count = 0.0, r_sum = 0.0, r_n = 0.0, high = 0.0;
  const int draws = 4000;
  for (int k = 0; k < draws; ++k) {
    const Deployment d = sample_ppp(net, cfo, 1.0, 64, r_max, rng);
    count += static_cast<double>(d.aggressors.size());
    for (const Aggressor& a : d.aggressors) {
      CHECK((a.d >= net.d_min && a.d <= r_max));
      CHECK(a.tau_index < 64);
      CHECK(a.tau == doctest::Approx(a.tau_index / 64.0));
      r_sum += a.r_own;
      r_n += 1.0;
      high += a.eps_index == 1 ? 1.0 : 0.0;
    }
  }
  const double mean = net.lambda * pi * (r_max * r_max - net.d_min * net.d_min);
  CHECK(count / draws == doctest::Approx(mean).epsilon(0.02));
  CHECK(r_sum / r_n == doctest::Approx(0.5 / std::sqrt(net.lambda)).epsilon(0.02));
  CHECK(high / r_n == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("power-delay profiles and channels") {
  const PowerDelayProfile p = PowerDelayProfile::exp4();
  double s = 0.0;
  for (double x : p.powers) s += x;
  CHECK(s == doctest::Approx(1.0));
  CHECK(p.delays[3] == doctest::Approx(3.0 / 16));
  CHECK(p.powers[1] / p.powers[0] == doctest::Approx(std::exp(-1.0)));
  CHECK_THROWS_AS((PowerDelayProfile{{0.5}, {0.0}}.validate()), ParameterError);

  std::mt19937_64 rng(2);
  std::vector<double> power(4, 0.0);
  const int n = 40000;
  for (int k = 0; k < n; ++k) {
    const ChannelRealization c = sample_channel(p, rng);
    for (std::size_t l = 0; l < 4; ++l) power[l] += std::norm(c.taps[l]) / n;
  }
  for (std::size_t l = 0; l < 4; ++l) CHECK(power[l] == doctest::Approx(p.powers[l]).epsilon(0.05));

  const ChannelRealization c{{cd{1.0}, cd{0.5}}, {0.0, 0.25}};
  CHECK(std::abs(c.response(1.0) - cd{1.0, -0.5}) < 1e-12);

  const std::vector<cd> est{cd{2.0, 2.0}, cd{1.0}}, gains{cd{0.0, 2.0}, cd{0.0}};
  const auto z = zf_equalize(est, gains);
  CHECK(std::abs(z[0] - cd{1.0, -1.0}) < 1e-12);
  CHECK(std::isfinite(z[1].real()));
}

TEST_CASE("trial configuration checks") {
  TrialConfig c;
  c.bits_target = 5000;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = TrialConfig{};
  c.pdp = PowerDelayProfile{{0.5, 0.5}, {0.0, 0.01}};
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = TrialConfig{};
  c.q = 4;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = TrialConfig{};
  c.scheme = Scheme::NofdmMlse;
  c.modulation = 64;
  CHECK_THROWS_AS(LinkSimulator{c}, ConfigError);
}

TEST_CASE("projection and waveform observations agree") {
  TrialConfig c;
  c.filter = FilterSpec::gaussian(1.0);
  c.lattice = {1.2, 1.0, 8, 1};
  c.scenario = ScenarioKind::Single;
  c.cfo = {{0.0, 0.6}, {0.5, 0.5}};
  c.n_tau = 8;  // 168 samples per T0, so every tau node is a sample instant
  c.prune = 0.0;
  c.pdp = PowerDelayProfile{{0.6, 0.4}, {0.0, 0.25}};
  c.window.n_half = 4;
  SUBCASE("FMT, single aggressor, two-tap channel") { CHECK(max_path_difference(c, 4, 1) < 1e-11); }
  SUBCASE("NOFDM, single aggressor") {
    c.scheme = Scheme::NofdmMlse;
    c.mlse_block = 8;
    CHECK(max_path_difference(c, 3, 2) < 1e-11);
  }
  SUBCASE("FMT, PPP in a small disc") {
    c.scenario = ScenarioKind::Ppp;
    c.pdp = PowerDelayProfile::flat();
    c.r_max = 60.0;
    CHECK(max_path_difference(c, 3, 3) < 1e-11);
  }
  SUBCASE("RRC FMT") {
    c.filter = FilterSpec::rrc(0.2);
    c.pdp = PowerDelayProfile::flat();
    c.window.n_half = 2;
    CHECK(max_path_difference(c, 1, 4) < 1e-10);
  }
}

TEST_CASE("receive noise has the filter correlation") {
  TrialConfig c;
  c.scheme = Scheme::NofdmMlse;
  c.filter = FilterSpec::gaussian(0.5);
  c.lattice = {1.0, 1.0, 16, 1};
  c.mlse_block = 8;
  c.ebn0_db = 0.0;
  const LinkSimulator s(c);
  const double n0 = 0.5;  // Es / (bits per symbol * Eb/N0)
  std::mt19937_64 rng(8);
  cd c0{}, c1{};
  const int n = 40000;
  for (int k = 0; k < n; ++k) {
    const auto z = s.noise(rng);
    c0 += z[3] * std::conj(z[3]) / double(n);
    c1 += z[3] * std::conj(z[4]) / double(n);
  }
  CHECK(c0.real() == doctest::Approx(n0).epsilon(0.03));
  CHECK(c1.real() == doctest::Approx(n0 * std::exp(-pi * 0.5 / 2)).epsilon(0.05));
  CHECK(s.mlse_tap_energy_capture() > 0.999);
}

TEST_CASE("interference-free links reproduce the AWGN and Rayleigh results") {
  TrialConfig c;
  c.fading = false;
  c.ebn0_db = 4.0;
  c.seed = 3;
  const TrialResult awgn = run_trial(c);
  const double g = db_to_linear(4.0);
  CHECK(std::abs(awgn.ber - 0.5 * std::erfc(std::sqrt(g))) <= 3 * awgn.sigma);

  c.fading = true;
  c.ebn0_db = 10.0;
  const TrialResult ray = run_trial(c);
  const double r = db_to_linear(10.0);
  CHECK(std::abs(ray.ber - 0.5 * (1 - std::sqrt(r / (1 + r)))) <= 3 * ray.sigma);
  CHECK(ray.ci_halfwidth == doctest::Approx(1.96 * ray.sigma));
  CHECK(ray.bits >= c.bits_target);
}

TEST_CASE("results are reproducible for any worker count") {
  TrialConfig c;
  c.scenario = ScenarioKind::Single;
  c.ebn0_db = 15.0;
  c.bits_target = 20000;
  c.seed = 77;
  setenv("POT_SIM_THREADS", "1", 1);
  const TrialResult a = run_trial(c);
  setenv("POT_SIM_THREADS", "3", 1);
  const TrialResult b = run_trial(c);
  unsetenv("POT_SIM_THREADS");
  CHECK(a.errors == b.errors);
  CHECK(a.bits == b.bits);
  c.seed = 78;
  CHECK(run_trial(c).errors != a.errors);
}

TEST_CASE("widening the victim burst or doubling N leaves BER unchanged") {
  TrialConfig c;
  c.scenario = ScenarioKind::Single;
  c.ebn0_db = 20.0;
  c.bits_target = 60000;
  const TrialResult base = run_trial(c);
  TrialConfig wide = c;
  wide.burst_k = 80;
  wide.seed = 2;
  CHECK(combined_z(base, run_trial(wide)) <= 3.0);
  TrialConfig doubled = c;
  doubled.lattice.N = 32;
  doubled.seed = 3;
  CHECK(combined_z(base, run_trial(doubled)) <= 3.0);
}

TEST_CASE("few errors raise a warning") {
  TrialConfig c;
  c.fading = false;
  c.ebn0_db = 14.0;
  c.bits_target = 10000;
  const TrialResult r = run_trial(c);
  CHECK(r.errors < 10);
  CHECK(r.warning);
  CHECK_FALSE(r.note.empty());
}

TEST_CASE("MGF Monte Carlo agrees with the PGFL quadrature") {
  NetworkModel net;
  const double z = 1.0, psi = 0.8;
  const auto [mean, se] = mgf_monte_carlo(z, net, psi, 200000, 5);
  CHECK(std::abs(mean - laplace_multi(z, net, {{1.0, {psi}}})) <= 4 * se + 2e-4);
  CHECK(se > 0.0);
}

TEST_CASE("constellation-valued aggressor symbols run") {
  TrialConfig c;
  c.scenario = ScenarioKind::Single;
  c.aggressor_symbols = AggressorSymbols::Constellation;
  c.ebn0_db = 20.0;
  c.bits_target = 20000;
  const TrialResult r = run_trial(c);
  CHECK((r.ber > 0.1 && r.ber < 0.25));
}
