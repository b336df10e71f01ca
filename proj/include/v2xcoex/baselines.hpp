#pragma once

#include <cstdint>
#include <vector>

#include "v2xcoex/matching.hpp"
#include "v2xcoex/scenario.hpp"
#include "v2xcoex/schedule.hpp"

namespace v2x {

struct GreedyStep {
  int user = 0;
  Resource chosen;
  double sinr = 0.0;
  long compared = 0;  // admissible cells examined for this pick
};

struct GreedyResult {
  Allocation matching;
  std::vector<GreedyStep> steps;
  std::vector<long> comparisons;  // per user
};

// Users take turns in id order; each repeatedly claims the admissible
// unsaturated cell with the highest SINR under the partial allocation (ties
// by (k, t)) until it holds S cells or nothing admissible remains.
GreedyResult run_greedy(const Scenario& scenario, const ChannelState& cs);
GreedyResult run_greedy(const Scenario& scenario, std::uint64_t seed);

// The scenario with its unlicensed band removed.
Scenario dedicated_view(const Scenario& scenario);

// DV-RMA on the dedicated band only. The returned matching is shaped for the
// dedicated view.
DvrmaResult run_dedicated_only(const Scenario& scenario, double lambda, std::uint64_t seed,
                               const DvrmaOptions& options = {});

}  // namespace v2x
