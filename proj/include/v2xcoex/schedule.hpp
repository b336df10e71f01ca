#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "v2xcoex/channel.hpp"
#include "v2xcoex/geometry.hpp"
#include "v2xcoex/scenario.hpp"

namespace v2x {

enum class Band { kDedicated, kUnlicensed };

// One (subchannel, subframe) cell, both 0-based. Subchannels >= K are
// unlicensed. Ordered lexicographically by (k, t).
struct Resource {
  int k = 0;
  int t = 0;
  auto operator<=>(const Resource&) const = default;
};

// Binary assignment tensor over (user, subchannel, subframe). Users are the
// scenario's cellular users in ascending vehicle-id order; `user` below
// always means that index, not the vehicle id.
class Allocation {
 public:
  Allocation() = default;
  Allocation(int users, int dedicated, int unlicensed, int subframes);

  int users() const { return users_; }
  int dedicated() const { return dedicated_; }
  int unlicensed() const { return unlicensed_; }
  int subchannels() const { return dedicated_ + unlicensed_; }
  int subframes() const { return subframes_; }
  int cells() const { return subchannels() * subframes_; }

  Band band(int k) const { return k >= dedicated_ ? Band::kUnlicensed : Band::kDedicated; }
  bool unlicensed(int k) const { return k >= dedicated_; }

  bool assigned(int user, Resource r) const;
  void assign(int user, Resource r);
  void release(int user, Resource r);

  // Users on the cell, ascending.
  const std::vector<int>& members(Resource r) const { return cells_[index(r)]; }
  // All cells of subframe t, indexed by subchannel.
  std::span<const std::vector<int>> subframe(int t) const {
    return {cells_.data() + static_cast<size_t>(t) * subchannels(), static_cast<size_t>(subchannels())};
  }
  // Cells held by the user, ascending.
  const std::vector<Resource>& holdings(int user) const { return holdings_[static_cast<size_t>(user)]; }

  bool has_dedicated_in(int user, int t) const;
  bool has_unlicensed_in(int user, int t) const;
  long assignment_count() const;

  bool operator==(const Allocation&) const = default;

 private:
  size_t index(Resource r) const {
    return static_cast<size_t>(r.t) * static_cast<size_t>(subchannels()) + static_cast<size_t>(r.k);
  }
  int users_ = 0;
  int dedicated_ = 0;
  int unlicensed_ = 0;
  int subframes_ = 0;
  std::vector<std::vector<int>> cells_;
  std::vector<std::vector<Resource>> holdings_;
};

// Empty allocation sized for the scenario.
Allocation make_allocation(const Scenario& scenario);

// Everything link-level a scheduler needs for one SPS cycle.
struct ChannelState {
  PhyParams phy;
  LinkGainTable gains;
  std::vector<double> radius;               // interference radius per user
  std::vector<std::vector<Vec2>> position;  // [t][user] transmitter position
  std::vector<int> vehicle_ids;             // user -> vehicle id
  std::vector<bool> is_v2i;

  int users() const { return static_cast<int>(vehicle_ids.size()); }
};

enum class Fading { kRayleigh, kUnit };

// Link gains with one unit-mean exponential draw per directed link per
// subframe (or all draws 1 with Fading::kUnit). Radii use the mean fading
// gain, so they do not depend on the seed.
ChannelState make_channel_state(const Scenario& scenario, std::uint64_t seed,
                                Fading fading = Fading::kRayleigh);

struct Violation {
  enum class Kind { kV2IExclusive, kUserQuota, kResourceQuota, kDedicatedAnchor };
  Kind kind;
  int user = -1;  // -1 when the violation concerns a cell
  Resource resource;
  int count = 0;
  std::string message;
};

const char* to_string(Violation::Kind kind);

// Checks the four constraint families. The dedicated-anchor rule applies to
// each subframe in which the user holds any cell. Throws std::invalid_argument
// when the allocation's shape does not match the scenario.
std::vector<Violation> check_constraints(const Allocation& alloc, const Scenario& scenario);

// --- scoring -------------------------------------------------------------

// Number of users on the cell whose SINR meets the threshold.
int cell_active_count(std::span<const int> members, int t, const ChannelState& cs);

int resource_utility(Resource r, const Allocation& alloc, const ChannelState& cs);

// Users holding any unlicensed cell in the subframe, ascending.
std::vector<int> unlicensed_occupants(std::span<const std::vector<int>> cells_t, int dedicated);

// Additional interference area of `user` in subframe t: 0 without an
// unlicensed cell there, otherwise measured against the unlicensed occupants
// of lower user index.
double penalty_term(int user, const Allocation& alloc, int t, const ChannelState& cs);

// Sum of penalty terms over one subframe's cells.
double subframe_interference(std::span<const std::vector<int>> cells_t, int dedicated, int t,
                             const ChannelState& cs);

double total_interference(const Allocation& alloc, const ChannelState& cs);

// Sum over cells of the subframe's active counts minus lambda times its
// interference. Summing over subframes gives the objective value.
double subframe_value(std::span<const std::vector<int>> cells_t, int dedicated, int t,
                      const ChannelState& cs, double lambda);

struct ObjectiveBreakdown {
  long active_count = 0;
  double interference_area = 0.0;
  double lambda = 0.0;
  double value = 0.0;
};

// Throws std::domain_error for negative lambda.
ObjectiveBreakdown objective(const Allocation& alloc, const ChannelState& cs, double lambda);

// Active assignments split by user role and band.
struct ActiveSplit {
  long v2i_dedicated = 0;
  long v2i_unlicensed = 0;
  long v2v_dedicated = 0;
  long v2v_unlicensed = 0;
  long unlicensed_assignments = 0;  // active or not

  long total() const { return v2i_dedicated + v2i_unlicensed + v2v_dedicated + v2v_unlicensed; }
};

ActiveSplit active_split(const Allocation& alloc, const ChannelState& cs);

// vehicle_id,k,t rows with 1-based k and t.
void write_allocation_csv(std::ostream& out, const Allocation& alloc, const ChannelState& cs);

}  // namespace v2x
