#include <doctest.h>

#include <cmath>

#include "pot/scenario.hpp"

using namespace pot;

TEST_CASE("scenario parsing") {
  const Scenario s = Scenario::from_string("# comment\nscheme = fmt\n\n  alpha=0.3   # trailing\nebn0_db = 0, 10 ,20\n");
  CHECK(s.text("scheme", "") == "fmt");
  CHECK(s.number("alpha", 0.0) == 0.3);
  CHECK(s.list("ebn0_db").value() == std::vector<double>{0.0, 10.0, 20.0});
  CHECK_FALSE(s.list("eps_list").has_value());
  CHECK(s.integer("N", 16) == 16);
  CHECK(s.entries().size() == 3);

  CHECK_THROWS_AS(Scenario::from_string("colour = red\n"), ConfigError);
  CHECK_THROWS_AS(Scenario::from_string("alpha = 0.2\nalpha = 0.3\n"), ConfigError);
  CHECK_THROWS_AS(Scenario::from_string("alpha 0.2\n"), ConfigError);
  CHECK_THROWS_AS(Scenario::from_string("eps_list =\n").list("eps_list"), ConfigError);
  CHECK_THROWS_AS(Scenario::from_string("eps_list = 0,,1\n").list("eps_list"), ConfigError);
  CHECK_THROWS_AS(Scenario::from_string("N = 1.5\n").integer("N", 1), ConfigError);
  CHECK_THROWS_AS(Scenario::from_string("alpha = abc\n").number("alpha", 0), ConfigError);
  CHECK_THROWS_AS(Scenario::from_string("noise = maybe\n").flag("noise", true), ConfigError);
  CHECK_THROWS_AS(Scenario::load("/nonexistent/scenario.txt"), ConfigError);

  Scenario t = s;
  t.set("seed", "9");
  t.set("alpha", "0.4");
  CHECK(t.integer("seed", 1) == 9);
  CHECK(t.number("alpha", 0) == 0.4);
}

TEST_CASE("builders apply defaults") {
  const Scenario empty = Scenario::from_string("");
  const LatticeParams l = lattice_from(empty);
  CHECK(l.F == doctest::Approx(1.2));
  CHECK(l.N == 16);
  CHECK(lattice_from(Scenario::from_string("scheme = nofdm\nfilter = gaussian\n")).F == 1.0);

  const TrialConfig c = trial_config_from(Scenario::from_string("F = 1.5\nscenario = single\n"));
  CHECK(c.scheme == Scheme::FmtZf);
  CHECK(c.scenario == ScenarioKind::Single);
  REQUIRE(c.cfo.eps_levels.size() == 1);
  CHECK(c.cfo.eps_levels[0] == doctest::Approx(0.75));

  const GainTableRequest g = gain_request_from(Scenario::from_string("F = 2\n"));
  CHECK(g.eps == std::vector<double>{0.0, 1.0});
  CHECK_THROWS_AS(ebn0_grid_from(empty), ConfigError);
  CHECK_THROWS_AS(tradeoff_config_from(empty), ConfigError);
  CHECK_THROWS_AS(tradeoff_config_from(Scenario::from_string("axis = beta\naxis_values = 1\n")), ConfigError);
  CHECK_THROWS_AS(trial_config_from(Scenario::from_string("scheme = ofdm\n")), ConfigError);
  CHECK_THROWS_AS(trial_config_from(Scenario::from_string("eps_frac = 0, 0.5\neps_probs = 1\n")), ConfigError);
}

TEST_CASE("analytic pipeline") {
  TrialConfig c = trial_config_from(Scenario::from_string("scenario = none\n"));
  const BerCurve none = analytic_ber(c, {0.0, 10.0});
  for (std::size_t k = 0; k < 2; ++k) {
    const double g = db_to_linear(none.ebn0_db[k]);
    CHECK(none.ber[k] == doctest::Approx(0.5 * (1 - std::sqrt(g / (1 + g)))).epsilon(1e-8));
  }

  c.scenario = ScenarioKind::Single;
  c.n_tau = 16;
  const GainTable t = gain_table_for(c);
  CHECK(t.tau.size() == 16);
  const BerCurve a = analytic_ber(c, {10.0, 30.0}, t);
  CHECK(a.ber[1] < a.ber[0]);
  CHECK(a.ber[1] > 0.1);  // SIR 0 dB leaves a floor

  // a table missing the configured CFO level is rejected
  GainTable wrong = t;
  for (double& e : wrong.eps) e += 0.05;
  CHECK_THROWS_AS(interference_transform(c, wrong), ConfigError);

  c.scheme = Scheme::NofdmMlse;
  CHECK_THROWS_AS(analytic_ber(c, {10.0}), ConfigError);
}
