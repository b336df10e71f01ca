#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "v2xcoex/scenario.hpp"

using namespace v2x;

namespace {

ScenarioConfig small_config() {
  ScenarioConfig c;
  c.speed_kmh = 45;
  c.v2i = 6;
  c.v2v_pairs = 5;
  c.vanet = 7;
  return c;
}

bool same(const Scenario& a, const Scenario& b) { return to_json(a) == to_json(b); }

}  // namespace

TEST(SafeGap, SixtyKmh) { EXPECT_NEAR(safe_gap_m(kmh_to_ms(60.0)), 41.6667, 1e-4); }

TEST(RoadGrid, DefaultLanes) {
  RoadGrid g;
  const auto lanes = g.lanes();
  ASSERT_EQ(lanes.size(), 8u);
  for (const auto& l : lanes) {
    EXPECT_DOUBLE_EQ(l.length, 1000.0);
    EXPECT_DOUBLE_EQ(l.direction.norm(), 1.0);
  }
  // Wraps after one lane length.
  EXPECT_NEAR(distance(lanes[0].point_at(1250.0), lanes[0].point_at(250.0)), 0.0, 1e-9);
}

TEST(Generate, SingleVehicle) {
  ScenarioConfig c;
  c.v2i = 1;
  c.v2v_pairs = 0;
  c.vanet = 0;
  const auto sc = generate_urban(c, 3);
  ASSERT_EQ(sc.vehicles.size(), 1u);
  EXPECT_EQ(sc.vehicles[0].role, Role::kV2I);
  EXPECT_NO_THROW(sc.validate());
}

TEST(Generate, DeterministicPerSeed) {
  const auto c = small_config();
  EXPECT_TRUE(same(generate_urban(c, 42), generate_urban(c, 42)));
  EXPECT_FALSE(same(generate_urban(c, 42), generate_urban(c, 43)));
}

TEST(Generate, RoleCountsAndPairing) {
  auto c = small_config();
  c.vanet = 60;
  c.pairing_range_m = 150;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto sc = generate_urban(c, seed);
    EXPECT_NO_THROW(sc.validate());
    ASSERT_TRUE(sc.warnings.empty()) << sc.warnings.front();
    EXPECT_EQ(sc.count(Role::kV2I), c.v2i);
    EXPECT_EQ(sc.count(Role::kV2VTransmitter), c.v2v_pairs);
    EXPECT_EQ(sc.count(Role::kV2VReceiver), c.v2v_pairs);
    EXPECT_EQ(sc.count(Role::kVanet), c.vanet);
    for (const auto& v : sc.vehicles) {
      if (v.role != Role::kV2VTransmitter) continue;
      const auto& rx = sc.vehicle(*v.peer);
      EXPECT_LE(distance(sc.position(v, 0), sc.position(rx, 0)), c.pairing_range_m);
    }
  }
}

TEST(Generate, WarnsWhenPairsRunShort) {
  auto c = small_config();
  c.vanet = 0;
  c.pairing_range_m = 1.0;
  const auto sc = generate_urban(c, 4);
  ASSERT_EQ(sc.warnings.size(), 1u);
  EXPECT_LT(sc.count(Role::kV2VTransmitter), c.v2v_pairs);
  EXPECT_NO_THROW(sc.validate());
}

TEST(Generate, SameLaneGapsRespectSafeSpacing) {
  auto c = small_config();
  c.speed_kmh = 60;
  c.vanet = 60;
  const double gap = safe_gap_m(kmh_to_ms(c.speed_kmh));
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto sc = generate_urban(c, seed);
    std::map<int, std::vector<double>> by_lane;
    for (const auto& v : sc.vehicles) by_lane[v.lane].push_back(v.offset_m);
    for (auto& [lane, offs] : by_lane) {
      if (offs.size() < 2) continue;
      std::sort(offs.begin(), offs.end());
      const double len = sc.grid.lane_length();
      for (size_t i = 0; i < offs.size(); ++i) {
        const double next = i + 1 < offs.size() ? offs[i + 1] : offs[0] + len;
        EXPECT_GE(next - offs[i], gap - 1e-9) << "lane " << lane;
      }
    }
  }
}

TEST(Generate, InfeasibleDensityNamesLane) {
  auto c = small_config();
  c.speed_kmh = 60;
  c.vanet = 400;
  try {
    generate_urban(c, 1);
    FAIL() << "expected GenerationError";
  } catch (const GenerationError& e) {
    EXPECT_NE(std::string(e.what()).find("lane"), std::string::npos);
  }
}

TEST(Generate, RejectsSpeedOutsideRange) {
  auto c = small_config();
  c.speed_kmh = 80;
  EXPECT_THROW(generate_urban(c, 1), std::invalid_argument);
}

TEST(CountsFromDensity, CapacityScaling) {
  RoadGrid g;
  const auto slow = counts_from_density(g, 15, 0.075, 0.3, 0.4);
  const auto fast = counts_from_density(g, 60, 0.075, 0.3, 0.4);
  EXPECT_GT(slow.v2i + 2 * slow.v2v_pairs + slow.vanet, fast.v2i + 2 * fast.v2v_pairs + fast.vanet);
  // 60 km/h: floor(1000 / 41.67) = 24 per lane, 192 in total, 7.5% -> 14.
  EXPECT_EQ(fast.v2i + 2 * fast.v2v_pairs + fast.vanet, 14);
}

namespace {

Scenario one_mover(double speed_ms) {
  Scenario sc;
  sc.spectrum.subframes = 20;
  Vehicle v;
  v.id = 0;
  v.lane = 0;
  v.offset_m = 100.0;
  v.speed_ms = speed_ms;
  sc.vehicles.push_back(v);
  return sc;
}

}  // namespace

TEST(Advance, Kinematics) {
  const auto sc = one_mover(10.0);
  const auto p1 = advance(sc, 1);
  EXPECT_EQ(p1[0], sc.position(sc.vehicles[0], 0.0));
  EXPECT_NEAR(distance(advance(sc, 11)[0], p1[0]), 0.1, 1e-9);
  const auto still = one_mover(0.0);
  EXPECT_EQ(advance(still, 15)[0], advance(still, 1)[0]);
  EXPECT_THROW(advance(sc, 0), std::out_of_range);
  EXPECT_THROW(advance(sc, 21), std::out_of_range);
}

TEST(Shifted, MatchesAdvance) {
  const auto sc = one_mover(10.0);
  const auto moved = shifted(sc, 5 * sc.spectrum.subframe_s);
  EXPECT_NEAR(distance(advance(moved, 1)[0], advance(sc, 6)[0]), 0.0, 1e-9);
}

TEST(Json, RoundTrip) {
  const auto sc = generate_urban(small_config(), 9);
  const auto back = scenario_from_json(to_json(sc));
  EXPECT_TRUE(same(sc, back));
  EXPECT_EQ(back.cellular_users(), sc.cellular_users());
}

TEST(Json, RejectsBrokenPeers) {
  auto doc = to_json(generate_urban(small_config(), 9));
  for (auto& v : doc["vehicles"]) {
    if (v["role"] == "v2v_tx") {
      v["peer"] = nullptr;
      break;
    }
  }
  EXPECT_THROW(scenario_from_json(doc), std::invalid_argument);
  EXPECT_THROW(scenario_from_json(nlohmann::json::object()), std::invalid_argument);
}

TEST(Roles, StringRoundTrip) {
  for (Role r : {Role::kV2I, Role::kV2VTransmitter, Role::kV2VReceiver, Role::kVanet}) {
    EXPECT_EQ(role_from_string(to_string(r)), r);
  }
  EXPECT_THROW(role_from_string("bus"), std::invalid_argument);
}
