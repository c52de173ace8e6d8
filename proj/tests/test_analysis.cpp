#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pot/analysis.hpp"
#include "pot/montecarlo.hpp"
#include "pot/quadrature.hpp"

using namespace pot;
using std::numbers::pi;

namespace {

// E_y[1 - (1 + b + a y)^(-1/2)] for y ~ Exp(mu)
double lemma_exponential(double a, double b, double mu) {
  const double k = a * mu, c = 1.0 + b;
  return 1.0 - std::sqrt(pi / k) * std::exp(c / k) * std::erfc(std::sqrt(c / k));
}

}  // namespace

TEST_CASE("quadrature") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, pi).value == doctest::Approx(2.0).epsilon(1e-12));
  const QuadResult r = integrate([](double x) { return std::exp(-x * x); }, 0.0, 8.0);
  CHECK(r.value == doctest::Approx(std::sqrt(pi) / 2).epsilon(1e-12));
  CHECK(r.l1 == doctest::Approx(r.value));
  QuadOptions tight;
  tight.rel_tol = 1e-14;
  tight.max_depth = 1;
  CHECK_THROWS_AS(integrate([](double x) { return 1.0 / std::sqrt(std::abs(x - 0.3)); }, 0.0, 1.0, tight), NumericalError);
}

TEST_CASE("AWGN QAM formulas") {
  const ModQam q4 = ModQam::make(4);
  CHECK(q4.bits_per_symbol() == 2);
  for (double eb : {0.5, 1.0, 4.0}) CHECK(qam_awgn_ber(q4, qam_snr(q4, eb)) == doctest::Approx(0.5 * std::erfc(std::sqrt(eb))));
  CHECK_THROWS_AS(ModQam::make(8), ParameterError);

  // Gray-coded constellations by simulation
  for (int M : {16, 64}) {
    const ModQam mod = ModQam::make(M);
    const QamConstellation c(M);
    const double eb = db_to_linear(8.0);
    const double n0 = 1.0 / (mod.bits_per_symbol() * eb);
    std::mt19937_64 rng(static_cast<std::uint64_t>(M));
    std::uniform_int_distribution<int> pick(0, M - 1);
    std::normal_distribution<double> g(0.0, std::sqrt(n0 / 2));
    const int symbols = 200000;
    long errors = 0;
    for (int k = 0; k < symbols; ++k) {
      const int s = pick(rng);
      errors += c.bit_errors(c.slice(c.point(s) + cd{g(rng), g(rng)}), s);
    }
    const double bits = static_cast<double>(symbols) * mod.bits_per_symbol();
    const double p = qam_awgn_ber(mod, qam_snr(mod, eb));
    CHECK(std::abs(errors / bits - p) <= 4.0 * std::sqrt(p * (1 - p) / bits) + 1e-12);
  }
}

TEST_CASE("erfc-mixture reduction") {
  const auto one = [](double) { return 1.0; };
  CHECK(lemma1_rhs(one, 0.0, 0.0) == doctest::Approx(0.0));
  CHECK(lemma1_rhs(one, 0.0, 1.0) == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)).epsilon(1e-10));
  // y = 1 exactly: L_y(s) = exp(-s)
  CHECK(lemma1_rhs([](double s) { return std::exp(-s); }, 1.0, 0.0) == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)).epsilon(1e-10));
  for (auto [a, b, mu] : {std::tuple{0.5, 0.0, 1.0}, {2.0, 0.3, 0.7}, {0.1, 1.5, 4.0}}) {
    const double v = lemma1_rhs([mu = mu](double s) { return 1.0 / (1.0 + mu * s); }, a, b);
    CHECK(v == doctest::Approx(lemma_exponential(a, b, mu)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(lemma1_rhs(one, -1.0, 0.0), ParameterError);
}

TEST_CASE("average BER") {
  const ModQam q4 = ModQam::make(4);
  for (double db : {0.0, 7.0, 30.0}) {
    const double g = db_to_linear(db);
    CHECK(avg_ber(g, q4, Transform::none()) == doctest::Approx(0.5 * (1 - std::sqrt(g / (1 + g)))).epsilon(1e-9));
  }
  CHECK(avg_ber(1.0, q4, Transform::none()) == doctest::Approx(0.14645).epsilon(1e-4));
  CHECK(avg_ber(INFINITY, q4, Transform::none()) == doctest::Approx(0.0));

  const Transform t = single_aggressor_transform(1.0, {0.8});
  double prev = 1.0;
  for (double db = 0; db <= 40; db += 5) {
    const double v = avg_ber(db_to_linear(db), q4, t);
    CHECK(v <= prev);
    CHECK((v >= 0.0 && v <= 0.5));
    prev = v;
  }
  const double floor = avg_ber(INFINITY, q4, t);
  CHECK(floor > 0.1);
  // one aggressor at unit power and psi: closed form with b = 0
  CHECK(floor == doctest::Approx(0.5 * lemma_exponential(2.0, 0.0, 0.8)).epsilon(1e-9));

  QuadOptions half;
  half.rel_tol = QuadOptions{}.rel_tol / 2;
  for (int M : {4, 16, 64}) {
    const ModQam mod = ModQam::make(M);
    CHECK(std::abs(avg_ber(10.0, mod, t) - avg_ber(10.0, mod, t, half)) < 1e-5);
  }
}

TEST_CASE("single-aggressor transforms") {
  const Transform t = single_aggressor_transform(0.5, {0.2, 0.9, 1.4});
  CHECK(t.value(0.0) == 1.0);
  double prev = 1.0;
  for (double z = 0.0; z < 50; z += 2.5) {
    const double v = t.value(z);
    CHECK(v <= prev);
    CHECK(v > 0.0);
    CHECK(v + t.complement(z) == doctest::Approx(1.0));
    prev = v;
  }
  CHECK(laplace_single(2.0, 0.5, 1.0) == doctest::Approx(0.5));
  CHECK(sir_to_ratio(10.0) == doctest::Approx(0.1));
  CHECK(sir_to_ratio(0.0) == 1.0);
}

TEST_CASE("path loss and power control") {
  const PathlossConstants c = pathloss_constants(3500);
  CHECK(c.K0 == doctest::Approx(11.8 + 45 * std::log10(3500.0) - 120.0));
  CHECK(c.n == 40.0);
  NetworkModel net;
  CHECK(power_ratio(10, 30, 50, net) == doctest::Approx(std::pow(10.0 / 50, 4)));
  net.beta = 1.0;
  CHECK(power_ratio(10, 30, 50, net) == doctest::Approx(std::pow(30.0 / 50, 4)));
  net.beta = 0.5;
  CHECK(power_ratio(10, 30, 50, net) == doctest::Approx(std::pow(10.0, 2) * std::pow(30.0, 2) / std::pow(50.0, 4)));
  NetworkModel bad;
  bad.d_min = 5.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = NetworkModel{};
  bad.beta = 1.5;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("PPP exponent without power control has a closed form") {
  NetworkModel net;
  for (double z : {0.1, 1.0, 30.0})
    for (double psi : {0.05, 0.8}) {
      const double c = z * std::pow(net.D, 4) * psi;
      const double oracle = std::sqrt(c) / 2 * (pi / 2 - std::atan(net.d_min * net.d_min / std::sqrt(c)));
      CHECK(ppp_exponent(z, net, {{1.0, {psi}}}) == doctest::Approx(oracle).epsilon(1e-9));
    }
  CHECK(laplace_multi(1.0, net, {{1.0, {1.0}}}) == doctest::Approx(0.99367).epsilon(1e-5));
  CHECK(laplace_multi(0.0, net, {{1.0, {1.0}}}) == 1.0);
}

TEST_CASE("PPP exponent with power control matches a brute-force grid") {
  NetworkModel net;
  net.beta = 1.0;
  const double z = 0.7, psi = 0.6;
  const double lp = net.lambda * pi;
  // midpoint rule in log v and in s
  double total = 0.0;
  const int nv = 4000, ns = 4000;
  const double lv0 = std::log(net.d_min), lv1 = std::log(1e6);
  for (int i = 0; i < nv; ++i) {
    const double v = std::exp(lv0 + (i + 0.5) * (lv1 - lv0) / nv);
    double inner = 0.0;
    for (int j = 0; j < ns; ++j) {
      const double s = (j + 0.5) * 40.0 / ns;
      const double r = std::sqrt(s / lp);
      const double x = z * psi * std::pow(r / v, 4);
      inner += std::exp(-s) * x / (1 + x) * 40.0 / ns;
    }
    total += inner * v * v * (lv1 - lv0) / nv;
  }
  CHECK(ppp_exponent(z, net, {{1.0, {psi}}}) == doctest::Approx(total).epsilon(2e-4));
  CHECK(laplace_multi(1.0, net, {{1.0, {1.0}}}) == doctest::Approx(0.25716).epsilon(1e-4));
}

TEST_CASE("CFO mixtures and tau profiles") {
  NetworkModel net;
  const double a = laplace_multi(1.0, net, {{0.5, {0.2}}, {0.5, {1.0}}});
  const double b = laplace_multi(1.0, net, CfoPmf{{0.0, 0.6}, {0.5, 0.5}}, [](double e) { return e == 0.0 ? 0.2 : 1.0; });
  CHECK(a == doctest::Approx(b));
  CHECK_THROWS_AS(laplace_multi(1.0, net, {{0.7, {0.2}}}), ParameterError);
  CHECK_THROWS_AS((CfoPmf{{0.0}, {0.5}}.validate()), ParameterError);

  GainTable t;
  t.tau = {0.0, 0.25, 0.5, 0.75};
  t.eps = {0.0, 0.6};
  t.psi = {1.0, 0.8, 0.9, 0.8, 1.0, 0.8, 0.9, 0.8};
  t.psi_self = 0.0;
  CHECK(psi_profile(t, 1).size() == 1);
  CHECK(psi_profile(t, 1)[0] == doctest::Approx(0.8));
  CHECK(psi_profile(t, 0).size() == 4);
}
