#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "v2xcoex/scenario.hpp"
#include "v2xcoex/schedule.hpp"

namespace v2x {

// What a rejection is memoised against. kMatchedSet stores only the
// resource's member set. kSubframeState stores every cell of the resource's
// subframe, which is everything the resource's decision depends on.
enum class IncompatibleKey { kSubframeState, kMatchedSet };

struct DvrmaOptions {
  IncompatibleKey memo_key = IncompatibleKey::kMatchedSet;
  long max_processes = 1'000'000;
};

// Per (user, resource): the states under which the resource turned the user
// away.
class IncompatibleList {
 public:
  void record(int user, Resource r, std::vector<int> key);
  bool contains(int user, Resource r, const std::vector<int>& key) const;
  size_t size() const { return size_; }

 private:
  std::map<std::pair<int, Resource>, std::set<std::vector<int>>> entries_;
  size_t size_ = 0;
};

struct MatchingContext {
  const Scenario& scenario;
  const ChannelState& channel;
  double lambda = 0.0;
  DvrmaOptions options;
};

struct MatchingState {
  Allocation matching;
  std::vector<std::vector<Resource>> preferences;  // per user, best first
  IncompatibleList incompatible;
  long proposal_count = 0;
  long round_index = 0;
  int process_index = 0;
};

struct Decision {
  enum class Kind { kAccept, kReject, kEvict };
  Kind kind = Kind::kReject;
  int victim = -1;  // set for kEvict

  bool operator==(const Decision&) const = default;
};

std::vector<int> incompatible_key(Resource r, const Allocation& alloc, IncompatibleKey kind);

// Whether `user` may propose to `r` right now: it does not hold r, holds
// fewer than S cells, and for an unlicensed r already holds a dedicated cell
// in r's subframe.
bool proposal_admissible(int user, Resource r, const Allocation& alloc, const Spectrum& spectrum);

/// Resources the user would be active on if it joined them under the current
/// matching, best rate first (ties by (k, t)). Drops cells already held,
/// cells failing the dedicated-anchor rule, cells below the SINR threshold and
/// cells whose current state is in the user's incompatible list.
std::vector<Resource> build_preferences(int user, const MatchingState& state, const MatchingContext& ctx);

/// Blocking-pair test. Condition (1) is the preference-list membership above
/// (incompatible lists are only consulted when `memo` is given); (2) compares
/// the resource's value U - lambda*C before and after it takes the user,
/// dropping one incumbent when the grown set would break the V2I or Q limit;
/// (3) requires the user to have room for another cell.
bool is_blocking_pair(int user, Resource r, const Allocation& alloc, const MatchingContext& ctx,
                      const IncompatibleList* memo = nullptr);

/// Resource-side response to a proposal. A V2I proposer meeting a V2I
/// incumbent keeps whichever of the two yields the higher value; otherwise an
/// unsaturated resource accepts iff the value strictly rises, and a saturated
/// one drops the member of Ψ(W) ∪ {proposer} whose removal leaves the highest
/// value (the proposer on ties). Throws std::logic_error if the proposer is
/// already matched to r.
Decision resource_decide(Resource r, int proposer, const Allocation& alloc, const MatchingContext& ctx);

// Applies a decision, records incompatible entries for the rejected or
// evicted user, and releases an evicted user's unlicensed cells in that
// subframe if it lost its last dedicated cell there.
void apply_decision(Resource r, int proposer, const Decision& d, MatchingState& state,
                    const MatchingContext& ctx);

struct ProcessStats {
  long proposals = 0;
  long first_round_proposals = 0;
  long rounds = 0;
};

// One static matching process over the state's current preference lists.
ProcessStats run_matching_process(MatchingState& state, const MatchingContext& ctx);

// One random dedicated cell per user, preferring empty cells.
Allocation random_initial_matching(const Scenario& scenario, const ChannelState& cs, std::uint64_t seed);

struct TraceRow {
  int process_index = 0;
  long proposals = 0;
  long active_count = 0;
  double objective_value = 0.0;
};

struct DvrmaResult {
  Allocation matching;
  std::vector<TraceRow> trace;
  long proposals = 0;
  int processes = 0;
  long rounds = 0;
  long max_process_proposals = 0;
  size_t incompatible_entries = 0;
};

DvrmaResult run_dvrma(const Scenario& scenario, const ChannelState& cs, double lambda, std::uint64_t seed,
                      const DvrmaOptions& options = {});
DvrmaResult run_dvrma(const Scenario& scenario, double lambda, std::uint64_t seed,
                      const DvrmaOptions& options = {});

struct StabilityReport {
  bool stable = true;
  std::optional<std::pair<int, Resource>> witness;  // (user, resource)
};

StabilityReport is_pairwise_stable(const Allocation& alloc, const MatchingContext& ctx);

// T (K+K_u) * sum_{s=1..S} C(U-1, s) + U*S, with U scheduled users.
long double proposal_bound(int users, int max_resources, int subchannels, int subframes);
// T (K+K_u) U^(S+1).
long double asymptotic_proposal_bound(int users, int max_resources, int subchannels, int subframes);

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

}  // namespace v2x
