#pragma once

#include <cstdint>
#include <vector>

#include "v2xcoex/harness.hpp"
#include "v2xcoex/scenario.hpp"
#include "v2xcoex/schedule.hpp"

namespace v2x::oracle {

// Lens area of two disks by midpoint quadrature of the vertical chord overlap
// across the lens' x-extent.
double lens_area_quadrature(double r1, double r2, double d, int samples = 200000);

// SINR recomputed straight from the gain table.
double reference_sinr(int user, const std::vector<int>& members, int t, const ChannelState& cs);

struct ReferenceScore {
  long active = 0;
  double interference = 0.0;
  double value = 0.0;
};

// Objective recomputed from the definitions: active assignments, and per
// subframe the unlicensed occupants in ascending index order, each charged its
// disk minus its largest overlap with a lower-index occupant.
ReferenceScore reference_objective(const Allocation& alloc, const ChannelState& cs, double lambda);

struct BruteForce {
  double best_value = 0.0;
  Allocation best;
  long feasible = 0;
};

// Exhaustive search over every allocation that passes check_constraints.
BruteForce brute_force_optimum(const Scenario& scenario, const ChannelState& cs, double lambda);

// Small urban scenario with the given roles; vehicles stay within a short
// grid so that links interact.
Scenario tiny_scenario(int v2i, int v2v_pairs, int dedicated, int unlicensed, int subframes, int s, int q,
                       std::uint64_t seed, double speed_kmh = 30.0);

// Resource-scarce desk-scale configuration shared by the trend checks.
ExperimentConfig desk_config();

}  // namespace v2x::oracle
