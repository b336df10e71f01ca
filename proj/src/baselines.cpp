#include "v2xcoex/baselines.hpp"

#include <algorithm>

namespace v2x {

GreedyResult run_greedy(const Scenario& scenario, const ChannelState& cs) {
  GreedyResult out;
  out.matching = make_allocation(scenario);
  auto& alloc = out.matching;
  const auto& sp = scenario.spectrum;
  out.comparisons.assign(static_cast<size_t>(alloc.users()), 0);

  std::vector<int> joined;
  for (int u = 0; u < alloc.users(); ++u) {
    const bool v2i = cs.is_v2i[static_cast<size_t>(u)];
    while (static_cast<int>(alloc.holdings(u).size()) < sp.max_resources_per_vehicle) {
      GreedyStep step{u, {-1, -1}, -1.0, 0};
      for (int k = 0; k < alloc.subchannels(); ++k) {
        for (int t = 0; t < alloc.subframes(); ++t) {
          const Resource r{k, t};
          if (alloc.assigned(u, r)) continue;
          const auto& m = alloc.members(r);
          if (static_cast<int>(m.size()) >= sp.max_vehicles_per_resource) continue;
          if (v2i && std::any_of(m.begin(), m.end(), [&](int o) { return cs.is_v2i[static_cast<size_t>(o)]; })) continue;
          if (alloc.unlicensed(k) && !alloc.has_dedicated_in(u, t)) continue;
          ++step.compared;
          joined = m;
          joined.insert(std::lower_bound(joined.begin(), joined.end(), u), u);
          const double s = sinr(u, joined, t, cs.gains, cs.phy);
          if (s > step.sinr) {
            step.sinr = s;
            step.chosen = r;
          }
        }
      }
      if (step.chosen.k < 0) break;
      alloc.assign(u, step.chosen);
      out.comparisons[static_cast<size_t>(u)] += step.compared;
      out.steps.push_back(step);
    }
  }
  return out;
}

GreedyResult run_greedy(const Scenario& scenario, std::uint64_t seed) {
  return run_greedy(scenario, make_channel_state(scenario, seed));
}

Scenario dedicated_view(const Scenario& scenario) {
  Scenario view = scenario;
  view.spectrum.unlicensed = 0;
  return view;
}

DvrmaResult run_dedicated_only(const Scenario& scenario, double lambda, std::uint64_t seed,
                               const DvrmaOptions& options) {
  return run_dvrma(dedicated_view(scenario), lambda, seed, options);
}

}  // namespace v2x
