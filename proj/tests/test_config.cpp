#include <gtest/gtest.h>

#include <sstream>

#include "test_support.hpp"

using namespace relaysel;

namespace {

const char* kMinimal = R"(
[grid]
nx = 3
ny = 3
spacing_m = 10
origin_m = 0, 0

[nodes]
ap_m = 0, 10
dest_m = 20, 20
mobility_role = mobile_relay
)";

std::string with_extra(const std::string& extra) { return std::string(kMinimal) + extra; }

}  // namespace

TEST(Config, MinimalFileUsesDefaults) {
  const auto c = parse_scenario(kMinimal);
  EXPECT_EQ(c.grid.nx, 3u);
  EXPECT_EQ(c.grid.size(), 9u);
  EXPECT_EQ(c.updates.queue_size, 2u);
  EXPECT_DOUBLE_EQ(c.updates.tau_hz, 0.2);
  EXPECT_EQ(c.radio.rate_table.size(), 8u);
  EXPECT_EQ(c.grid.mobility_role, MobilityRole::MobileRelay);
}

TEST(Config, FractionsAndComments) {
  const auto c = parse_scenario(with_extra("[updates]\ntau_hz = 1/25  # slow\nmu_hz = 4 ; inline\n"));
  EXPECT_DOUBLE_EQ(c.updates.tau_hz, 0.04);
  EXPECT_DOUBLE_EQ(c.updates.mu_hz, 4.0);
}

TEST(Config, ErrorsNameFieldAndLine) {
  try {
    parse_scenario(with_extra("[updates]\ntau_hz = fast\n"), {}, "s.ini");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "updates.tau_hz");
    EXPECT_EQ(e.line(), 13u);
    EXPECT_EQ(e.file(), "s.ini");
  }
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_scenario(with_extra("[bogus]\n")), ParseError);
  EXPECT_THROW(parse_scenario(with_extra("[updates]\nwhat = 1\n")), ParseError);
  EXPECT_THROW(parse_scenario(with_extra("[updates]\np_loss = 1\n")), ParseError);
  EXPECT_THROW(parse_scenario(with_extra("[updates]\ntau_hz = 1\ntau_hz = 2\n")), ParseError);
  EXPECT_THROW(parse_scenario(with_extra("[walls]\nedges = 1-9\n")), ParseError);
  EXPECT_THROW(parse_scenario(with_extra("[simulation]\nwarmup_s = 100\nduration_s = 50\n")), ParseError);
  EXPECT_THROW(parse_scenario("[grid]\nnx = 3\n"), ParseError);
}

TEST(Config, MissingMandatoryField) {
  try {
    parse_scenario("[grid]\nnx = 3\nny = 3\nspacing_m = 1\n[nodes]\nap_m = 0,0\nmobility_role = mobile_relay\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "nodes.dest_m");
  }
}

TEST(Config, RoundTripShippedScenarios) {
  for (const char* name : {"scenario_a.ini", "scenario_b.ini", "scenario_a_5x5.ini", "toy_3x3.ini", "indoor147.ini"}) {
    SCOPED_TRACE(name);
    const auto c = load_scenario(testsupport::scenario_path(name));
    const auto again = parse_scenario(serialize_scenario(c), c.base_dir);
    EXPECT_EQ(again, c);
  }
}

TEST(ConfigProperty, RoundTripRandomConfigs) {
  testsupport::Gen gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    ScenarioConfig c;
    c.name = "random" + std::to_string(trial);
    c.grid = gen.grid(6);
    c.speed_mps = gen.uniform(0.1, 10.0);
    c.updates.tau_hz = gen.uniform(0.01, 5.0);
    c.updates.mu_hz = gen.uniform(0.5, 100.0);
    c.updates.p_loss = gen.uniform(0.0, 0.9);
    c.updates.queue_size = gen.index(1, 4);
    c.error.sigma_m = gen.uniform(0.0, 10.0);
    c.error.bias = {gen.uniform(-2, 2), gen.uniform(-2, 2)};
    c.radio.tx_power_dbm = gen.uniform(-10.0, 20.0);
    c.radio.secondary = gen.coin() ? SecondaryRate::Same : SecondaryRate::NextLower;
    c.sim.seed = gen.index(0, 1000000);
    c.sim.periodic_updates = gen.coin();
    if (gen.coin()) c.heuristic_rect = Rect{c.grid.lower_corner(), c.grid.upper_corner()};
    const auto back = parse_scenario(serialize_scenario(c));
    ASSERT_EQ(back, c) << serialize_scenario(c);
  }
}

TEST(Config, ThroughputMapRoundTrip) {
  testsupport::Gen gen(8);
  GridScenario g;
  g.nx = 4;
  g.ny = 2;
  const auto t = gen.tables(g.size(), 2);
  std::stringstream ss;
  write_throughput_map(ss, g, t);
  const auto back = read_throughput_map(ss, g);
  ASSERT_EQ(back.relay_count(), 2u);
  EXPECT_LT((back.t_direct - t.t_direct).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((back.t_relay[1] - t.t_relay[1]).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Config, ThroughputMapErrors) {
  GridScenario g;
  g.nx = 2;
  g.ny = 1;
  auto read = [&](const std::string& text) {
    std::istringstream in(text);
    return read_throughput_map(in, g);
  };
  const std::string header = "m,x_m,y_m,t_direct_mbps,t_relay1_mbps\n";
  EXPECT_NO_THROW(read(header + "1,0,0,1,2\n2,1,0,1,2\n"));
  EXPECT_THROW(read(header + "1,0,0,1,2\n"), ParseError);
  EXPECT_THROW(read(header + "1,0,0,1,2\n1,0,0,1,2\n"), ParseError);
  EXPECT_THROW(read(header + "1,0,0,1,-2\n2,1,0,1,2\n"), ParseError);
  EXPECT_THROW(read("m,x,y,t\n"), ParseError);
}
