#include "v2xcoex/esss.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "v2xcoex/baselines.hpp"

namespace v2x {

void DutyCycleConfig::validate() const {
  if (!(sensing_s > 0) || !(sps_cycle_s > 0)) throw std::invalid_argument("duty cycle: durations must be positive");
  if (adaptive_sps_cycles < 2 || adaptive_sps_cycles % 2 != 0) {
    throw std::invalid_argument("duty cycle: adaptive period must be a positive even number of SPS cycles");
  }
}

ChannelSelection sense_and_select(const ChannelOccupancy& occupancy, double sensing_threshold_w) {
  const auto& lv = occupancy.level_w;
  if (lv.empty()) throw std::invalid_argument("sense_and_select: no unlicensed channel");
  for (size_t c = 0; c < lv.size(); ++c) {
    if (lv[c] < sensing_threshold_w) return {static_cast<int>(c), true};
  }
  const auto it = std::min_element(lv.begin(), lv.end());
  return {static_cast<int>(it - lv.begin()), false};
}

int maybe_switch(int current, const ChannelOccupancy& occupancy, double sensing_threshold_w) {
  const auto& lv = occupancy.level_w;
  if (current < 0 || current >= static_cast<int>(lv.size())) throw std::out_of_range("maybe_switch: bad channel");
  const double here = lv[static_cast<size_t>(current)];
  if (here < sensing_threshold_w) return current;
  const auto it = std::min_element(lv.begin(), lv.end());
  return *it < here ? static_cast<int>(it - lv.begin()) : current;
}

DutyCycle plan_duty_cycle(bool idle, const DutyCycleConfig& config) {
  config.validate();
  DutyCycle d;
  d.sensing_period = config.sensing_s;
  d.v2x_sps_cycles = idle ? config.adaptive_sps_cycles : config.adaptive_sps_cycles / 2;
  d.vanet_sps_cycles = config.adaptive_sps_cycles - d.v2x_sps_cycles;
  d.v2x_period = d.v2x_sps_cycles * config.sps_cycle_s;
  d.vanet_period = d.vanet_sps_cycles * config.sps_cycle_s;
  d.cycle_length = d.sensing_period + d.v2x_period + d.vanet_period;
  return d;
}

ChannelOccupancy sample_occupancy(int channels, double p_busy, double sensing_threshold_w, Rng& rng) {
  if (channels < 1) throw std::invalid_argument("sample_occupancy: need at least one channel");
  if (!(p_busy >= 0.0 && p_busy <= 1.0)) throw std::invalid_argument("sample_occupancy: p_busy outside [0,1]");
  ChannelOccupancy occ;
  occ.p_busy = p_busy;
  std::bernoulli_distribution busy(p_busy);
  std::uniform_real_distribution<double> quiet(0.01, 0.99);
  std::exponential_distribution<double> loud(1.0);
  for (int c = 0; c < channels; ++c) {
    const bool b = busy(rng);
    occ.busy.push_back(b);
    occ.level_w.push_back(b ? sensing_threshold_w * (1.0 + loud(rng)) : sensing_threshold_w * quiet(rng));
  }
  return occ;
}

std::uint64_t sps_cycle_seed(std::uint64_t seed, int cycle, int sps) {
  return splitmix64(seed ^ splitmix64((static_cast<std::uint64_t>(cycle) << 20) ^ static_cast<std::uint64_t>(sps)));
}

CoexistenceResult run_coexistence(const Scenario& scenario, double lambda, int n_cycles, std::uint64_t seed,
                                  const CoexistenceConfig& config) {
  if (n_cycles < 1) throw std::invalid_argument("run_coexistence: n_cycles must be >= 1");
  DutyCycleConfig duty = config.duty;
  duty.sps_cycle_s = scenario.spectrum.sps_cycle_s();
  duty.validate();
  const double threshold = config.sensing_threshold_w > 0 ? config.sensing_threshold_w : scenario.phy.rx_threshold_w;

  Rng rng(derive_seed(seed, Stream::kOccupancy));
  CoexistenceResult out;
  // Every duty cycle has the same length whether idle or busy; slot times are
  // computed from indices so they do not drift.
  const double cycle_len = duty.sensing_s + duty.adaptive_sps_cycles * duty.sps_cycle_s;
  int channel = -1;
  for (int cycle = 0; cycle < n_cycles; ++cycle) {
    const auto occ = sample_occupancy(config.channels, config.p_busy, threshold, rng);
    channel = channel < 0 ? sense_and_select(occ, threshold).channel : maybe_switch(channel, occ, threshold);
    const bool idle = occ.level_w[static_cast<size_t>(channel)] < threshold;
    const DutyCycle plan = plan_duty_cycle(idle, duty);

    CycleMetrics m;
    m.cycle_index = cycle;
    m.selected_channel = channel;
    m.idle = idle;
    m.v2x_sps_cycles = plan.v2x_sps_cycles;
    m.vanet_sps_cycles = plan.vanet_sps_cycles;

    const double cycle_start = cycle * cycle_len;
    out.timeline.push_back({cycle_start, cycle_start + plan.sensing_period, false, false, channel});
    const int total_sps = plan.v2x_sps_cycles + plan.vanet_sps_cycles;
    for (int sps = 0; sps < total_sps; ++sps) {
      const bool vanet_period = sps >= plan.v2x_sps_cycles;
      const double start = cycle * cycle_len + duty.sensing_s + sps * duty.sps_cycle_s;
      const Scenario here = shifted(scenario, start);
      const std::uint64_t s = sps_cycle_seed(seed, cycle, sps);
      const Scenario view = vanet_period ? dedicated_view(here) : here;
      const ChannelState cs = make_channel_state(view, s);
      const DvrmaResult run = run_dvrma(view, cs, lambda, s, config.dvrma);
      const auto obj = objective(run.matching, cs, lambda);
      m.active_count += obj.active_count;
      m.interference_area += obj.interference_area;
      bool unlicensed_tx = false;
      for (int u = 0; u < run.matching.users() && !unlicensed_tx; ++u) {
        for (const auto& r : run.matching.holdings(u)) unlicensed_tx |= run.matching.unlicensed(r.k);
      }
      out.timeline.push_back({start, start + duty.sps_cycle_s, unlicensed_tx, vanet_period, channel});
    }
    out.cycles.push_back(m);
  }
  return out;
}

bool collision_free(const std::vector<SlotRecord>& timeline) {
  for (const auto& a : timeline) {
    if (!a.v2x_unlicensed) continue;
    for (const auto& b : timeline) {
      if (!b.vanet || b.channel != a.channel) continue;
      if (a.start_s < b.end_s && b.start_s < a.end_s) return false;
    }
  }
  return true;
}

void write_cycle_csv(std::ostream& out, const std::vector<CycleMetrics>& cycles) {
  out << "cycle_index,selected_channel,idle_flag,active_count,interference_area\n";
  char buf[64];
  for (const auto& c : cycles) {
    std::snprintf(buf, sizeof buf, "%.9g", c.interference_area);
    out << c.cycle_index << ',' << c.selected_channel << ',' << (c.idle ? 1 : 0) << ',' << c.active_count << ','
        << buf << '\n';
  }
}

}  // namespace v2x
