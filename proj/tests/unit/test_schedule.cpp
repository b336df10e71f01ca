#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "v2xcoex/schedule.hpp"

using namespace v2x;
using oracle::make_fixture;
using std::numbers::pi;

namespace {

const Role kI = Role::kV2I;
const Role kV = Role::kV2VTransmitter;

int count_kind(const std::vector<Violation>& vs, Violation::Kind k) {
  int n = 0;
  for (const auto& v : vs) n += v.kind == k;
  return n;
}

}  // namespace

TEST(Allocation, AssignRelease) {
  Allocation a(2, 2, 1, 2);
  EXPECT_EQ(a.cells(), 6);
  a.assign(1, {2, 1});
  a.assign(0, {2, 1});
  a.assign(1, {0, 1});
  EXPECT_TRUE(a.assigned(1, {2, 1}));
  EXPECT_EQ(a.members({2, 1}), (std::vector<int>{0, 1}));
  EXPECT_EQ(a.holdings(1), (std::vector<Resource>{{0, 1}, {2, 1}}));
  EXPECT_TRUE(a.has_unlicensed_in(1, 1));
  EXPECT_TRUE(a.has_dedicated_in(1, 1));
  EXPECT_FALSE(a.has_dedicated_in(0, 1));
  EXPECT_EQ(a.assignment_count(), 3);
  EXPECT_EQ(a.band(2), Band::kUnlicensed);
  a.release(1, {2, 1});
  EXPECT_FALSE(a.assigned(1, {2, 1}));
  EXPECT_EQ(a.assignment_count(), 2);
}

TEST(Constraints, EmptyIsFeasible) {
  auto f = make_fixture({kI, kV}, 2, 2, 2, 2, 2);
  EXPECT_TRUE(check_constraints(make_allocation(f.sc), f.sc).empty());
}

TEST(Constraints, TwoV2IOnOneCell) {
  auto f = make_fixture({kI, kI}, 1, 0, 1, 1, 3);
  auto a = make_allocation(f.sc);
  a.assign(0, {0, 0});
  a.assign(1, {0, 0});
  const auto v = check_constraints(a, f.sc);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::kV2IExclusive);
}

TEST(Constraints, UserQuota) {
  auto f = make_fixture({kV}, 2, 0, 2, 3, 3);
  auto a = make_allocation(f.sc);
  a.assign(0, {0, 0});
  a.assign(0, {1, 0});
  a.assign(0, {0, 1});
  EXPECT_TRUE(check_constraints(a, f.sc).empty());
  f.sc.spectrum.max_resources_per_vehicle = 2;
  const auto v = check_constraints(a, f.sc);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::kUserQuota);
}

TEST(Constraints, ResourceQuotaAndAnchor) {
  auto f = make_fixture({kV, kV, kV}, 1, 1, 2, 2, 2);
  auto a = make_allocation(f.sc);
  for (int u = 0; u < 3; ++u) a.assign(u, {0, 0});
  a.assign(0, {1, 1});  // unlicensed in t=1 with no dedicated cell there
  const auto v = check_constraints(a, f.sc);
  EXPECT_EQ(count_kind(v, Violation::Kind::kResourceQuota), 1);
  EXPECT_EQ(count_kind(v, Violation::Kind::kDedicatedAnchor), 1);
  EXPECT_EQ(v.size(), 2u);
}

TEST(Constraints, ShapeMismatchThrows) {
  auto f = make_fixture({kV}, 2, 0, 2, 3, 3);
  EXPECT_THROW(check_constraints(Allocation(1, 3, 0, 2), f.sc), std::invalid_argument);
}

TEST(ActiveCount, Fixtures) {
  auto f = make_fixture({kV, kV}, 1, 0, 1, 2, 2);
  const std::vector<int> none, both{0, 1};
  EXPECT_EQ(cell_active_count(none, 0, f.cs), 0);
  EXPECT_EQ(cell_active_count(both, 0, f.cs), 2);
  // Transmitter 1 drowns receiver 0: 10 / (1 + 20) < 1.
  f.gain(0, 1, 0, 20.0);
  EXPECT_EQ(cell_active_count(both, 0, f.cs), 1);
}

TEST(Interference, DedicatedOnlyIsFree) {
  auto f = make_fixture({kV}, 1, 1, 2, 2, 2);
  auto a = make_allocation(f.sc);
  a.assign(0, {0, 0});
  a.assign(0, {0, 1});
  EXPECT_EQ(total_interference(a, f.cs), 0.0);
  EXPECT_EQ(penalty_term(0, a, 0, f.cs), 0.0);
}

TEST(Interference, SingleUserDisk) {
  auto f = make_fixture({kV}, 1, 1, 2, 2, 2);
  auto a = make_allocation(f.sc);
  a.assign(0, {0, 0});
  a.assign(0, {1, 0});
  EXPECT_DOUBLE_EQ(total_interference(a, f.cs), pi);
  EXPECT_DOUBLE_EQ(penalty_term(0, a, 0, f.cs), pi);
  f.sc.spectrum.max_resources_per_vehicle = 4;
  a.assign(0, {0, 1});
  a.assign(0, {1, 1});
  EXPECT_DOUBLE_EQ(total_interference(a, f.cs), 2 * pi);
}

TEST(Interference, TwoUsersPrefixOrder) {
  auto f = make_fixture({kV, kV}, 1, 2, 1, 2, 2);
  f.place(0, 0, {0, 0});
  f.place(0, 1, {1, 0});
  auto a = make_allocation(f.sc);
  for (int u = 0; u < 2; ++u) a.assign(u, {0, 0});
  a.assign(0, {1, 0});
  a.assign(1, {2, 0});
  // User 0 pays its full disk, user 1 only the part outside user 0's disk.
  EXPECT_DOUBLE_EQ(penalty_term(0, a, 0, f.cs), pi);
  EXPECT_NEAR(penalty_term(1, a, 0, f.cs), pi - 1.2283696986087567, 1e-12);
  EXPECT_NEAR(total_interference(a, f.cs), 2 * pi - 1.2283696986087567, 1e-12);
  EXPECT_EQ(unlicensed_occupants(a.subframe(0), a.dedicated()), (std::vector<int>{0, 1}));
}

TEST(Objective, Basics) {
  auto f = make_fixture({kV, kV}, 1, 1, 1, 2, 2);
  auto a = make_allocation(f.sc);
  EXPECT_EQ(objective(a, f.cs, 0.3).value, 0.0);
  a.assign(0, {0, 0});
  a.assign(0, {1, 0});
  a.assign(1, {0, 0});
  const auto zero = objective(a, f.cs, 0.0);
  EXPECT_EQ(zero.value, static_cast<double>(zero.active_count));
  EXPECT_EQ(zero.active_count, 3);
  const auto pen = objective(a, f.cs, 0.1);
  EXPECT_NEAR(pen.value, 3 - 0.1 * pi, 1e-12);
  EXPECT_THROW(objective(a, f.cs, -1.0), std::domain_error);
  const auto s = active_split(a, f.cs);
  EXPECT_EQ(s.v2v_dedicated, 2);
  EXPECT_EQ(s.v2v_unlicensed, 1);
  EXPECT_EQ(s.unlicensed_assignments, 1);
  EXPECT_EQ(s.total(), 3);
}

TEST(Objective, MatchesReferenceOnRandomAllocations) {
  std::mt19937_64 rng(17);
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const Scenario sc = oracle::tiny_scenario(2, 2, 2, 2, 3, 3, 3, seed);
    const ChannelState cs = make_channel_state(sc, seed);
    for (int trial = 0; trial < 20; ++trial) {
      auto a = make_allocation(sc);
      std::bernoulli_distribution pick(0.3);
      for (int u = 0; u < a.users(); ++u) {
        for (int t = 0; t < a.subframes(); ++t) {
          for (int k = 0; k < a.subchannels(); ++k) {
            if (pick(rng)) a.assign(u, {k, t});
          }
        }
      }
      for (double lambda : {0.0, 1e-5, 0.0026}) {
        const auto got = objective(a, cs, lambda);
        const auto ref = oracle::reference_objective(a, cs, lambda);
        EXPECT_EQ(got.active_count, ref.active);
        EXPECT_NEAR(got.interference_area, ref.interference, 1e-6 * std::max(1.0, ref.interference));
        EXPECT_NEAR(got.value, ref.value, 1e-6 * std::max(1.0, std::abs(ref.value)));
      }
    }
  }
}

TEST(Objective, ThreeVehicleTwoResourceBruteForce) {
  // Two V2I users and one V2V pair (three scheduled users, 4 vehicles); the
  // brute force scores with the library objective, so compare its optimum with
  // the reference score of the optimum allocation.
  const Scenario sc = oracle::tiny_scenario(2, 1, 1, 1, 1, 2, 3, 5);
  const ChannelState cs = make_channel_state(sc, 5);
  ASSERT_EQ(cs.users(), 3);
  const auto bf = oracle::brute_force_optimum(sc, cs, 1e-5);
  EXPECT_GT(bf.feasible, 1);
  EXPECT_NEAR(oracle::reference_objective(bf.best, cs, 1e-5).value, bf.best_value, 1e-6);
}

TEST(ChannelState, ShapeAndReceivers) {
  const Scenario sc = oracle::tiny_scenario(2, 1, 1, 1, 3, 2, 2, 8);
  const ChannelState a = make_channel_state(sc, 8);
  const ChannelState b = make_channel_state(sc, 8);
  const ChannelState unit = make_channel_state(sc, 8, Fading::kUnit);
  EXPECT_EQ(a.users(), 3);
  EXPECT_EQ(a.position.size(), 3u);
  for (int t = 0; t < 3; ++t) {
    for (int u = 0; u < 3; ++u) {
      for (int o = 0; o < 3; ++o) {
        EXPECT_EQ(a.gains.gain(t, u, o), b.gains.gain(t, u, o));
        EXPECT_GT(unit.gains.gain(t, u, o), 0.0);
      }
    }
  }
  // Radii use the mean fading gain, hence the Table 1 value for everyone.
  for (double r : a.radius) EXPECT_NEAR(r, 164.6897865482869, 1e-9);
}

TEST(AllocationCsv, OneBasedRows) {
  auto f = make_fixture({kV, kV}, 1, 1, 2, 2, 2);
  auto a = make_allocation(f.sc);
  a.assign(1, {1, 1});
  a.assign(0, {0, 0});
  std::ostringstream out;
  write_allocation_csv(out, a, f.cs);
  EXPECT_EQ(out.str(), "vehicle_id,k,t\n0,1,1\n1,2,2\n");
}
