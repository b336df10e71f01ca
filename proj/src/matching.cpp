#include "v2xcoex/matching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "v2xcoex/rng.hpp"

namespace v2x {
namespace {

using Cells = std::vector<std::vector<int>>;

Cells copy_subframe(const Allocation& alloc, int t) {
  const auto span = alloc.subframe(t);
  return Cells(span.begin(), span.end());
}

void add_member(Cells& cells, int k, int user) {
  auto& m = cells[static_cast<size_t>(k)];
  m.insert(std::lower_bound(m.begin(), m.end(), user), user);
}

bool holds_dedicated(const Cells& cells, int dedicated, int user) {
  for (int k = 0; k < dedicated; ++k) {
    const auto& m = cells[static_cast<size_t>(k)];
    if (std::binary_search(m.begin(), m.end(), user)) return true;
  }
  return false;
}

// Removes the user from cell k; losing its last dedicated cell of the
// subframe also drops its unlicensed cells there.
void remove_member(Cells& cells, int dedicated, int k, int user) {
  auto& m = cells[static_cast<size_t>(k)];
  m.erase(std::remove(m.begin(), m.end(), user), m.end());
  if (k < dedicated && !holds_dedicated(cells, dedicated, user)) {
    for (size_t j = static_cast<size_t>(dedicated); j < cells.size(); ++j) {
      auto& u = cells[j];
      u.erase(std::remove(u.begin(), u.end(), user), u.end());
    }
  }
}

double value_of(const Cells& cells, const Allocation& alloc, int t, const MatchingContext& ctx) {
  return subframe_value(cells, alloc.dedicated(), t, ctx.channel, ctx.lambda);
}

bool joined_active(int user, Resource r, const Allocation& alloc, const ChannelState& cs, double* rate_out) {
  std::vector<int> joined = alloc.members(r);
  joined.insert(std::lower_bound(joined.begin(), joined.end(), user), user);
  const double s = sinr(user, joined, r.t, cs.gains, cs.phy);
  if (rate_out) *rate_out = rate(s);
  return active_indicator(s, cs.phy.sinr_threshold);
}

void release_with_cascade(Allocation& alloc, int user, Resource r) {
  alloc.release(user, r);
  if (alloc.unlicensed(r.k) || alloc.has_dedicated_in(user, r.t)) return;
  const auto held = alloc.holdings(user);
  for (const auto& h : held) {
    if (h.t == r.t && alloc.unlicensed(h.k)) alloc.release(user, h);
  }
}

void check_cell(const Allocation& alloc, Resource r, const MatchingContext& ctx) {
  const auto& m = alloc.members(r);
  const int v2i = static_cast<int>(std::count_if(m.begin(), m.end(), [&](int u) {
    return ctx.channel.is_v2i[static_cast<size_t>(u)];
  }));
  if (static_cast<int>(m.size()) > ctx.scenario.spectrum.max_vehicles_per_resource || v2i > 1) {
    throw std::logic_error("matching: quota corrupted on a resource");
  }
}

}  // namespace

void IncompatibleList::record(int user, Resource r, std::vector<int> key) {
  if (entries_[{user, r}].insert(std::move(key)).second) ++size_;
}

bool IncompatibleList::contains(int user, Resource r, const std::vector<int>& key) const {
  auto it = entries_.find({user, r});
  return it != entries_.end() && it->second.count(key) > 0;
}

std::vector<int> incompatible_key(Resource r, const Allocation& alloc, IncompatibleKey kind) {
  if (kind == IncompatibleKey::kMatchedSet) return alloc.members(r);
  std::vector<int> key;
  for (const auto& m : alloc.subframe(r.t)) {
    key.insert(key.end(), m.begin(), m.end());
    key.push_back(-1);
  }
  return key;
}

bool proposal_admissible(int user, Resource r, const Allocation& alloc, const Spectrum& spectrum) {
  if (alloc.assigned(user, r)) return false;
  if (static_cast<int>(alloc.holdings(user).size()) >= spectrum.max_resources_per_vehicle) return false;
  return !alloc.unlicensed(r.k) || alloc.has_dedicated_in(user, r.t);
}

std::vector<Resource> build_preferences(int user, const MatchingState& state, const MatchingContext& ctx) {
  const auto& alloc = state.matching;
  std::vector<std::pair<double, Resource>> ranked;
  for (int t = 0; t < alloc.subframes(); ++t) {
    for (int k = 0; k < alloc.subchannels(); ++k) {
      const Resource r{k, t};
      if (alloc.assigned(user, r)) continue;
      if (alloc.unlicensed(k) && !alloc.has_dedicated_in(user, t)) continue;
      double rt = 0.0;
      if (!joined_active(user, r, alloc, ctx.channel, &rt)) continue;
      if (state.incompatible.contains(user, r, incompatible_key(r, alloc, ctx.options.memo_key))) continue;
      ranked.emplace_back(rt, r);
    }
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<Resource> out;
  out.reserve(ranked.size());
  for (const auto& [rt, r] : ranked) out.push_back(r);
  return out;
}

bool is_blocking_pair(int user, Resource r, const Allocation& alloc, const MatchingContext& ctx,
                      const IncompatibleList* memo) {
  if (!proposal_admissible(user, r, alloc, ctx.scenario.spectrum)) return false;
  if (!joined_active(user, r, alloc, ctx.channel, nullptr)) return false;
  if (memo && memo->contains(user, r, incompatible_key(r, alloc, ctx.options.memo_key))) return false;

  const auto& cs = ctx.channel;
  const int quota = ctx.scenario.spectrum.max_vehicles_per_resource;
  std::vector<int> grown = alloc.members(r);
  grown.insert(std::lower_bound(grown.begin(), grown.end(), user), user);
  auto feasible = [&](const std::vector<int>& set) {
    const auto v2i = std::count_if(set.begin(), set.end(), [&](int u) { return cs.is_v2i[static_cast<size_t>(u)]; });
    return static_cast<int>(set.size()) <= quota && v2i <= 1;
  };

  const Cells base = copy_subframe(alloc, r.t);
  const double current = value_of(base, alloc, r.t, ctx);
  if (feasible(grown)) {
    Cells alt = base;
    add_member(alt, r.k, user);
    return value_of(alt, alloc, r.t, ctx) > current;
  }
  for (int dropped : alloc.members(r)) {
    std::vector<int> candidate = grown;
    candidate.erase(std::find(candidate.begin(), candidate.end(), dropped));
    if (!feasible(candidate)) continue;
    Cells alt = base;
    remove_member(alt, alloc.dedicated(), r.k, dropped);
    add_member(alt, r.k, user);
    if (value_of(alt, alloc, r.t, ctx) > current) return true;
  }
  return false;
}

Decision resource_decide(Resource r, int proposer, const Allocation& alloc, const MatchingContext& ctx) {
  const auto& members = alloc.members(r);
  if (std::binary_search(members.begin(), members.end(), proposer)) {
    throw std::logic_error("resource_decide: proposer already matched to the resource");
  }
  const auto& is_v2i = ctx.channel.is_v2i;
  const Cells base = copy_subframe(alloc, r.t);
  const double current = value_of(base, alloc, r.t, ctx);

  auto value_with_swap = [&](int dropped) {
    Cells alt = base;
    remove_member(alt, alloc.dedicated(), r.k, dropped);
    add_member(alt, r.k, proposer);
    return value_of(alt, alloc, r.t, ctx);
  };

  if (is_v2i[static_cast<size_t>(proposer)]) {
    auto it = std::find_if(members.begin(), members.end(), [&](int u) { return is_v2i[static_cast<size_t>(u)]; });
    if (it != members.end()) {
      return value_with_swap(*it) > current ? Decision{Decision::Kind::kEvict, *it} : Decision{};
    }
  }
  if (static_cast<int>(members.size()) < ctx.scenario.spectrum.max_vehicles_per_resource) {
    Cells alt = base;
    add_member(alt, r.k, proposer);
    return value_of(alt, alloc, r.t, ctx) > current ? Decision{Decision::Kind::kAccept, -1} : Decision{};
  }
  // Saturated: dropping the proposer leaves `current`; an incumbent goes only
  // if dropping it does strictly better.
  double best = current;
  int victim = -1;
  for (int m : members) {
    const double v = value_with_swap(m);
    if (v > best) {
      best = v;
      victim = m;
    }
  }
  return victim < 0 ? Decision{} : Decision{Decision::Kind::kEvict, victim};
}

void apply_decision(Resource r, int proposer, const Decision& d, MatchingState& state,
                    const MatchingContext& ctx) {
  auto& alloc = state.matching;
  const auto key_kind = ctx.options.memo_key;
  switch (d.kind) {
    case Decision::Kind::kAccept:
      alloc.assign(proposer, r);
      break;
    case Decision::Kind::kReject:
      state.incompatible.record(proposer, r, incompatible_key(r, alloc, key_kind));
      break;
    case Decision::Kind::kEvict:
      release_with_cascade(alloc, d.victim, r);
      alloc.assign(proposer, r);
      state.incompatible.record(d.victim, r, incompatible_key(r, alloc, key_kind));
      break;
  }
  check_cell(alloc, r, ctx);
}

ProcessStats run_matching_process(MatchingState& state, const MatchingContext& ctx) {
  auto& alloc = state.matching;
  const auto& spectrum = ctx.scenario.spectrum;
  const int users = alloc.users();
  std::vector<size_t> cursor(static_cast<size_t>(users), 0);
  ProcessStats stats;

  for (;;) {
    std::vector<std::pair<Resource, int>> proposals;
    for (int u = 0; u < users; ++u) {
      if (static_cast<int>(alloc.holdings(u).size()) >= spectrum.max_resources_per_vehicle) continue;
      const auto& prefs = state.preferences[static_cast<size_t>(u)];
      auto& c = cursor[static_cast<size_t>(u)];
      while (c < prefs.size()) {
        const Resource r = prefs[c++];
        if (!proposal_admissible(u, r, alloc, spectrum)) continue;
        if (state.incompatible.contains(u, r, incompatible_key(r, alloc, ctx.options.memo_key))) continue;
        proposals.emplace_back(r, u);
        break;
      }
    }
    if (stats.rounds == 0) stats.first_round_proposals = static_cast<long>(proposals.size());
    ++stats.rounds;
    ++state.round_index;
    if (proposals.empty()) break;
    stats.proposals += static_cast<long>(proposals.size());
    state.proposal_count += static_cast<long>(proposals.size());

    std::sort(proposals.begin(), proposals.end());
    for (const auto& [r, u] : proposals) {
      // Earlier decisions this round may have taken the proposer's anchor.
      if (!proposal_admissible(u, r, alloc, spectrum)) continue;
      apply_decision(r, u, resource_decide(r, u, alloc, ctx), state, ctx);
    }
  }
  return stats;
}

Allocation random_initial_matching(const Scenario& scenario, const ChannelState& cs, std::uint64_t seed) {
  Allocation alloc = make_allocation(scenario);
  Rng rng(derive_seed(seed, Stream::kInit));
  const int quota = scenario.spectrum.max_vehicles_per_resource;
  for (int u = 0; u < alloc.users(); ++u) {
    std::vector<Resource> empty, open;
    for (int t = 0; t < alloc.subframes(); ++t) {
      for (int k = 0; k < alloc.dedicated(); ++k) {
        const auto& m = alloc.members({k, t});
        if (static_cast<int>(m.size()) >= quota) continue;
        if (cs.is_v2i[static_cast<size_t>(u)] &&
            std::any_of(m.begin(), m.end(), [&](int o) { return cs.is_v2i[static_cast<size_t>(o)]; })) {
          continue;
        }
        (m.empty() ? empty : open).push_back({k, t});
      }
    }
    const auto& pool = empty.empty() ? open : empty;
    if (pool.empty()) continue;
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    alloc.assign(u, pool[pick(rng)]);
  }
  return alloc;
}

DvrmaResult run_dvrma(const Scenario& scenario, const ChannelState& cs, double lambda, std::uint64_t seed,
                      const DvrmaOptions& options) {
  if (!(lambda >= 0.0)) throw std::domain_error("run_dvrma: lambda must be non-negative");
  const MatchingContext ctx{scenario, cs, lambda, options};
  MatchingState state;
  state.matching = random_initial_matching(scenario, cs, seed);
  state.preferences.resize(static_cast<size_t>(state.matching.users()));

  DvrmaResult result;
  for (;;) {
    if (state.process_index >= options.max_processes) {
      throw std::logic_error("run_dvrma: process limit reached without convergence");
    }
    for (int u = 0; u < state.matching.users(); ++u) {
      state.preferences[static_cast<size_t>(u)] = build_preferences(u, state, ctx);
    }
    const ProcessStats stats = run_matching_process(state, ctx);
    ++state.process_index;
    result.rounds += stats.rounds;
    result.max_process_proposals = std::max(result.max_process_proposals, stats.proposals);
    const auto obj = objective(state.matching, cs, lambda);
    result.trace.push_back({state.process_index, stats.proposals, obj.active_count, obj.value});
    if (stats.first_round_proposals == 0) break;
  }
  result.proposals = state.proposal_count;
  result.processes = state.process_index;
  result.incompatible_entries = state.incompatible.size();
  result.matching = std::move(state.matching);
  return result;
}

DvrmaResult run_dvrma(const Scenario& scenario, double lambda, std::uint64_t seed, const DvrmaOptions& options) {
  const ChannelState cs = make_channel_state(scenario, seed);
  return run_dvrma(scenario, cs, lambda, seed, options);
}

StabilityReport is_pairwise_stable(const Allocation& alloc, const MatchingContext& ctx) {
  for (int u = 0; u < alloc.users(); ++u) {
    if (static_cast<int>(alloc.holdings(u).size()) >= ctx.scenario.spectrum.max_resources_per_vehicle) continue;
    for (int t = 0; t < alloc.subframes(); ++t) {
      for (int k = 0; k < alloc.subchannels(); ++k) {
        if (alloc.assigned(u, {k, t})) continue;
        if (is_blocking_pair(u, {k, t}, alloc, ctx)) return {false, std::make_pair(u, Resource{k, t})};
      }
    }
  }
  return {};
}

long double proposal_bound(int users, int max_resources, int subchannels, int subframes) {
  long double sum = 0.0L;
  long double binom = 1.0L;  // C(users-1, s)
  for (int s = 1; s <= max_resources; ++s) {
    binom = binom * static_cast<long double>(users - s) / static_cast<long double>(s);
    if (binom <= 0.0L) break;
    sum += binom;
  }
  return static_cast<long double>(subframes) * subchannels * sum +
         static_cast<long double>(users) * max_resources;
}

long double asymptotic_proposal_bound(int users, int max_resources, int subchannels, int subframes) {
  return static_cast<long double>(subframes) * subchannels *
         std::pow(static_cast<long double>(users), static_cast<long double>(max_resources + 1));
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "process_index,proposals,active_count,objective_value\n";
  char buf[64];
  for (const auto& row : trace) {
    std::snprintf(buf, sizeof buf, "%.9g", row.objective_value);
    out << row.process_index << ',' << row.proposals << ',' << row.active_count << ',' << buf << '\n';
  }
}

}  // namespace v2x
