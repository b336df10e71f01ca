#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "v2xcoex/matching.hpp"
#include "v2xcoex/rng.hpp"
#include "v2xcoex/scenario.hpp"

namespace v2x {

struct DutyCycleConfig {
  double sensing_s = 1e-3;      // one LTE subframe
  int adaptive_sps_cycles = 2;  // adaptive period, in SPS cycles; even
  double sps_cycle_s = 10e-3;   // T * T_s

  void validate() const;
};

struct DutyCycle {
  double sensing_period = 0.0;
  double v2x_period = 0.0;
  double vanet_period = 0.0;
  double cycle_length = 0.0;
  int v2x_sps_cycles = 0;
  int vanet_sps_cycles = 0;
};

// Sensed state of the unlicensed channels for one duty cycle.
struct ChannelOccupancy {
  std::vector<bool> busy;
  std::vector<double> level_w;
  double p_busy = 0.0;
};

struct ChannelSelection {
  int channel = 0;
  bool idle = false;
};

// Lowest-index idle channel, else the least-interfered one (not idle).
ChannelSelection sense_and_select(const ChannelOccupancy& occupancy, double sensing_threshold_w);

// Leaves `current` unless it is at or above the threshold and another channel
// measures strictly lower, in which case the least-interfered channel wins.
int maybe_switch(int current, const ChannelOccupancy& occupancy, double sensing_threshold_w);

// Idle: the V2X period takes the whole adaptive period. Busy: V2X and VANET
// split it equally.
DutyCycle plan_duty_cycle(bool idle, const DutyCycleConfig& config);

// Independent Bernoulli(p_busy) VANET activity per channel. Busy channels
// measure above the threshold, idle ones below it.
ChannelOccupancy sample_occupancy(int channels, double p_busy, double sensing_threshold_w, Rng& rng);

struct CoexistenceConfig {
  int channels = 3;
  double p_busy = 0.5;
  double sensing_threshold_w = 0.0;  // <= 0 selects P^r
  DutyCycleConfig duty;
  DvrmaOptions dvrma;
};

// Airtime interval of the simulated timeline.
struct SlotRecord {
  double start_s = 0.0;
  double end_s = 0.0;
  bool v2x_unlicensed = false;  // a V2X user transmits on the unlicensed channel
  bool vanet = false;           // interval belongs to a VANET period
  int channel = -1;
};

struct CycleMetrics {
  int cycle_index = 0;
  int selected_channel = 0;
  bool idle = false;
  long active_count = 0;
  double interference_area = 0.0;
  int v2x_sps_cycles = 0;
  int vanet_sps_cycles = 0;
};

struct CoexistenceResult {
  std::vector<CycleMetrics> cycles;
  std::vector<SlotRecord> timeline;
};

// Seed of the SPS cycle `sps` inside duty cycle `cycle`.
std::uint64_t sps_cycle_seed(std::uint64_t seed, int cycle, int sps);

// Runs n_cycles duty cycles. V2X-period SPS cycles are scheduled by DV-RMA on
// the dedicated band plus the selected unlicensed channel; VANET-period SPS
// cycles use the dedicated band only. Each SPS cycle sees the vehicles moved
// to its start time.
CoexistenceResult run_coexistence(const Scenario& scenario, double lambda, int n_cycles, std::uint64_t seed,
                                  const CoexistenceConfig& config);

// True when no V2X unlicensed interval overlaps a VANET interval.
bool collision_free(const std::vector<SlotRecord>& timeline);

void write_cycle_csv(std::ostream& out, const std::vector<CycleMetrics>& cycles);

}  // namespace v2x
