#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pot/io.hpp"

using namespace pot;

TEST_CASE("agreement statistic") {
  CHECK(agreement(0.1, 0.12, 0.01) == doctest::Approx(2.0));
  CHECK(agreement(0.1, 0.1, 0.0) == 0.0);
  CHECK(std::isinf(agreement(0.1, 0.2, 0.0)));
}

TEST_CASE("BER CSV layout") {
  const std::vector<double> grid{0.0, 10.0};
  const BerCurve an{grid, {0.1, 0.01}, {}, {}};
  const BerCurve mc{grid, {0.11, 0.012}, {0.002, 0.001}, {1e5, 2e5}};

  std::ostringstream both;
  write_ber_csv(both, grid, an, mc, {0.005, 0.001});
  std::istringstream in(both.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# schema: pot.ber_curve.v1");
  std::getline(in, line);
  CHECK(line == "ebn0_db,ber_analytic,ber_mc,ci_halfwidth,bits,agreement");
  auto fields = [](const std::string& row) {
    std::vector<std::string> out;
    std::stringstream ss(row);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(f);
    return out;
  };
  std::getline(in, line);
  auto f = fields(line);
  REQUIRE(f.size() == 6);
  CHECK(std::stod(f[1]) == 0.1);
  CHECK(std::stod(f[3]) == 0.002);
  CHECK(f[4] == "100000");
  std::getline(in, line);
  f = fields(line);
  CHECK(std::stod(f[5]) == doctest::Approx(2.0));

  std::ostringstream only;
  write_ber_csv(only, grid, an, std::nullopt);
  CHECK(only.str().find("\n10,0.01,,,,\n") != std::string::npos);
}

TEST_CASE("trade-off CSV carries the axis") {
  TradeoffCurve c;
  c.axis = TradeoffAxis::GaussianRho;
  c.rows.push_back({0.5, 1.0, 1.4, 0.9, 0.2});
  std::ostringstream os;
  write_tradeoff_csv(os, c);
  const std::string s = os.str();
  CHECK(s.rfind("# schema: pot.tradeoff.v1\n# axis=rho\n", 0) == 0);
  CHECK(s.find("parameter,spectral_efficiency,psi_other_full,psi_other_partial,psi_self\n0.5,1,") != std::string::npos);
}

TEST_CASE("manifests round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "pot_io_test";
  std::filesystem::create_directories(dir);
  RunManifest m;
  m.command = "ber --mode both";
  m.scenario_path = "s.txt";
  m.scenario = {{"scheme", "fmt"}, {"ebn0_db", "0, 10"}};
  m.output_path = (dir / "out.csv").string();
  m.seed = 18446744073709551615ull;
  m.tool_version = tool_version();
  m.wall_seconds = 1.5;
  m.warnings = {"few errors"};
  write_manifest(m);
  const RunManifest r = read_manifest(m.output_path + ".manifest");
  CHECK(r.command == m.command);
  CHECK(r.scenario == m.scenario);
  CHECK(r.seed == m.seed);
  CHECK(r.warnings == m.warnings);
  CHECK(r.wall_seconds == 1.5);
  CHECK(manifest_json(m).find("\"schema\": \"pot.manifest.v1\"") != std::string::npos);

  std::ofstream(dir / "bad.manifest") << "{ not json";
  CHECK_THROWS_AS(read_manifest((dir / "bad.manifest").string()), ConfigError);
  CHECK_THROWS_AS(read_manifest((dir / "missing.manifest").string()), ConfigError);
  std::filesystem::remove_all(dir);
}
