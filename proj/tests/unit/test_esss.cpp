#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "v2xcoex/baselines.hpp"
#include "v2xcoex/esss.hpp"

using namespace v2x;

namespace {

ChannelOccupancy levels(std::vector<double> lv) {
  ChannelOccupancy o;
  o.level_w = std::move(lv);
  o.busy.assign(o.level_w.size(), false);
  return o;
}

}  // namespace

TEST(Select, LeastInterferedWhenAllBusy) {
  const auto sel = sense_and_select(levels({3e-3, 1e-3, 2e-3}), 0.5e-3);
  EXPECT_EQ(sel.channel, 1);
  EXPECT_FALSE(sel.idle);
}

TEST(Select, FirstIdleChannel) {
  const auto sel = sense_and_select(levels({3e-3, 0.2e-3, 0.1e-3}), 0.5e-3);
  EXPECT_EQ(sel.channel, 1);
  EXPECT_TRUE(sel.idle);
  EXPECT_THROW(sense_and_select(levels({}), 1.0), std::invalid_argument);
}

TEST(Switch, StaysWhileIdle) {
  EXPECT_EQ(maybe_switch(2, levels({0.1, 0.1, 0.4}), 0.5), 2);
}

TEST(Switch, MovesToStrictlyQuieterChannel) {
  EXPECT_EQ(maybe_switch(0, levels({3.0, 1.0, 2.0}), 0.5), 1);
  EXPECT_EQ(maybe_switch(0, levels({1.0, 1.0, 2.0}), 0.5), 0);
  EXPECT_THROW(maybe_switch(3, levels({1.0}), 0.5), std::out_of_range);
}

TEST(Plan, IdleAndBusySplits) {
  DutyCycleConfig cfg;
  cfg.adaptive_sps_cycles = 4;
  const auto idle = plan_duty_cycle(true, cfg);
  EXPECT_EQ(idle.v2x_sps_cycles, 4);
  EXPECT_EQ(idle.vanet_sps_cycles, 0);
  EXPECT_DOUBLE_EQ(idle.cycle_length, 1e-3 + 40e-3);
  const auto busy = plan_duty_cycle(false, cfg);
  EXPECT_EQ(busy.v2x_sps_cycles, 2);
  EXPECT_EQ(busy.vanet_sps_cycles, 2);
  EXPECT_DOUBLE_EQ(busy.v2x_period, busy.vanet_period);
  EXPECT_DOUBLE_EQ(busy.cycle_length, idle.cycle_length);
  cfg.adaptive_sps_cycles = 3;
  EXPECT_THROW(plan_duty_cycle(true, cfg), std::invalid_argument);
}

TEST(Occupancy, LevelsSitOnTheRightSideOfTheThreshold) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto o = sample_occupancy(4, 0.5, 2.0, rng);
    for (size_t c = 0; c < o.busy.size(); ++c) {
      if (o.busy[c]) EXPECT_GE(o.level_w[c], 2.0);
      else EXPECT_LT(o.level_w[c], 2.0);
    }
  }
  EXPECT_THROW(sample_occupancy(0, 0.5, 1.0, rng), std::invalid_argument);
  EXPECT_THROW(sample_occupancy(2, 1.5, 1.0, rng), std::invalid_argument);
}

TEST(Coexistence, NeverBusyUsesWholeAdaptivePeriod) {
  const auto sc = oracle::tiny_scenario(1, 2, 2, 1, 2, 2, 2, 11);
  CoexistenceConfig cfg;
  cfg.p_busy = 0.0;
  const auto r = run_coexistence(sc, 0.0, 5, 11, cfg);
  ASSERT_EQ(r.cycles.size(), 5u);
  for (const auto& c : r.cycles) {
    EXPECT_TRUE(c.idle);
    EXPECT_EQ(c.selected_channel, 0);
    EXPECT_EQ(c.vanet_sps_cycles, 0);
  }
  EXPECT_TRUE(collision_free(r.timeline));
}

TEST(Coexistence, AlwaysBusySplitsAndStaysCollisionFree) {
  const auto sc = oracle::tiny_scenario(1, 2, 2, 1, 2, 2, 2, 12);
  CoexistenceConfig cfg;
  cfg.p_busy = 1.0;
  const auto r = run_coexistence(sc, 0.0, 6, 12, cfg);
  for (const auto& c : r.cycles) {
    EXPECT_FALSE(c.idle);
    EXPECT_EQ(c.v2x_sps_cycles, c.vanet_sps_cycles);
  }
  EXPECT_TRUE(collision_free(r.timeline));
  for (const auto& s : r.timeline) {
    if (s.vanet) EXPECT_FALSE(s.v2x_unlicensed);
  }
}

TEST(Coexistence, SingleIdleCycleMatchesDirectRuns) {
  const auto sc = oracle::tiny_scenario(2, 2, 2, 1, 2, 2, 2, 21);
  CoexistenceConfig cfg;
  cfg.p_busy = 0.0;
  const auto r = run_coexistence(sc, 0.0, 1, 21, cfg);
  long expected = 0;
  for (int sps = 0; sps < cfg.duty.adaptive_sps_cycles; ++sps) {
    const double start = cfg.duty.sensing_s + sps * sc.spectrum.sps_cycle_s();
    const Scenario here = shifted(sc, start);
    const auto seed = sps_cycle_seed(21, 0, sps);
    const auto cs = make_channel_state(here, seed);
    expected += objective(run_dvrma(here, cs, 0.0, seed).matching, cs, 0.0).active_count;
  }
  EXPECT_EQ(r.cycles[0].active_count, expected);
}

TEST(Coexistence, Deterministic) {
  const auto sc = oracle::tiny_scenario(1, 2, 2, 1, 2, 2, 2, 4);
  const CoexistenceConfig cfg;
  const auto a = run_coexistence(sc, 0.0, 4, 4, cfg);
  const auto b = run_coexistence(sc, 0.0, 4, 4, cfg);
  ASSERT_EQ(a.cycles.size(), b.cycles.size());
  for (size_t i = 0; i < a.cycles.size(); ++i) {
    EXPECT_EQ(a.cycles[i].selected_channel, b.cycles[i].selected_channel);
    EXPECT_EQ(a.cycles[i].active_count, b.cycles[i].active_count);
  }
  EXPECT_THROW(run_coexistence(sc, 0.0, 0, 4, cfg), std::invalid_argument);
}

TEST(CollisionFree, DetectsOverlap) {
  std::vector<SlotRecord> tl{{0.0, 1.0, true, false, 0}, {0.5, 1.5, false, true, 0}};
  EXPECT_FALSE(collision_free(tl));
  tl[1].channel = 1;
  EXPECT_TRUE(collision_free(tl));
  tl[1] = {1.0, 2.0, false, true, 0};
  EXPECT_TRUE(collision_free(tl));
}

TEST(CycleCsv, Format) {
  std::ostringstream out;
  write_cycle_csv(out, {{0, 2, true, 7, 0.5, 2, 0}});
  EXPECT_EQ(out.str(), "cycle_index,selected_channel,idle_flag,active_count,interference_area\n0,2,1,7,0.5\n");
}
