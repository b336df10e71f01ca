#include "v2xcoex/schedule.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "v2xcoex/rng.hpp"

namespace v2x {

Allocation::Allocation(int users, int dedicated, int unlicensed, int subframes)
    : users_(users),
      dedicated_(dedicated),
      unlicensed_(unlicensed),
      subframes_(subframes),
      cells_(static_cast<size_t>((dedicated + unlicensed) * subframes)),
      holdings_(static_cast<size_t>(users)) {}

bool Allocation::assigned(int user, Resource r) const {
  const auto& h = holdings_[static_cast<size_t>(user)];
  return std::binary_search(h.begin(), h.end(), r);
}

void Allocation::assign(int user, Resource r) {
  auto& m = cells_[index(r)];
  auto it = std::lower_bound(m.begin(), m.end(), user);
  if (it != m.end() && *it == user) return;
  m.insert(it, user);
  auto& h = holdings_[static_cast<size_t>(user)];
  h.insert(std::lower_bound(h.begin(), h.end(), r), r);
}

void Allocation::release(int user, Resource r) {
  auto& m = cells_[index(r)];
  auto it = std::lower_bound(m.begin(), m.end(), user);
  if (it == m.end() || *it != user) return;
  m.erase(it);
  auto& h = holdings_[static_cast<size_t>(user)];
  h.erase(std::lower_bound(h.begin(), h.end(), r));
}

bool Allocation::has_dedicated_in(int user, int t) const {
  for (const auto& r : holdings(user)) {
    if (r.t == t && !unlicensed(r.k)) return true;
  }
  return false;
}

bool Allocation::has_unlicensed_in(int user, int t) const {
  for (const auto& r : holdings(user)) {
    if (r.t == t && unlicensed(r.k)) return true;
  }
  return false;
}

long Allocation::assignment_count() const {
  long n = 0;
  for (const auto& h : holdings_) n += static_cast<long>(h.size());
  return n;
}

Allocation make_allocation(const Scenario& scenario) {
  return Allocation(static_cast<int>(scenario.cellular_users().size()), scenario.spectrum.dedicated,
                    scenario.spectrum.unlicensed, scenario.spectrum.subframes);
}

ChannelState make_channel_state(const Scenario& scenario, std::uint64_t seed, Fading fading) {
  ChannelState cs;
  cs.phy = scenario.phy;
  cs.vehicle_ids = scenario.cellular_users();
  const int users = cs.users();
  const int subframes = scenario.spectrum.subframes;

  std::vector<bool> is_v2v(static_cast<size_t>(users));
  for (int u = 0; u < users; ++u) {
    is_v2v[static_cast<size_t>(u)] = scenario.vehicle(cs.vehicle_ids[static_cast<size_t>(u)]).role == Role::kV2VTransmitter;
    cs.is_v2i.push_back(!is_v2v[static_cast<size_t>(u)]);
  }
  cs.gains = LinkGainTable(subframes, is_v2v);

  const double mean_radius = users > 0
      ? interference_radius(cs.phy.tx_power_w, cs.phy.gain_factor, 1.0, cs.phy.rx_threshold_w, cs.phy.alpha)
      : 0.0;
  cs.radius.assign(static_cast<size_t>(users), mean_radius);

  // Receiver position and velocity per user: the BS (static) or the peer.
  std::vector<Vec2> rx_velocity(static_cast<size_t>(users));
  std::vector<Vec2> tx_velocity(static_cast<size_t>(users));
  for (int u = 0; u < users; ++u) {
    const auto& v = scenario.vehicle(cs.vehicle_ids[static_cast<size_t>(u)]);
    tx_velocity[static_cast<size_t>(u)] = scenario.velocity(v);
    rx_velocity[static_cast<size_t>(u)] = v.peer ? scenario.velocity(scenario.vehicle(*v.peer)) : Vec2{};
  }

  Rng rng(derive_seed(seed, Stream::kFading));
  std::exponential_distribution<double> expo(1.0);
  // Reference distance of the path-loss model; closer links are clamped to it.
  constexpr double kMinDistance = 1.0;

  cs.position.resize(static_cast<size_t>(subframes));
  for (int t = 0; t < subframes; ++t) {
    const auto snapshot = advance(scenario, t + 1);
    auto& pos = cs.position[static_cast<size_t>(t)];
    std::vector<Vec2> rx_pos(static_cast<size_t>(users));
    for (int u = 0; u < users; ++u) {
      const auto& v = scenario.vehicle(cs.vehicle_ids[static_cast<size_t>(u)]);
      pos.push_back(snapshot[static_cast<size_t>(v.id)]);
      rx_pos[static_cast<size_t>(u)] = v.peer ? snapshot[static_cast<size_t>(*v.peer)] : scenario.bs_position;
    }
    for (int tx = 0; tx < users; ++tx) {
      for (int owner = 0; owner < users; ++owner) {
        const double draw = fading == Fading::kRayleigh ? expo(rng) : 1.0;
        const Vec2 rel_v = rx_velocity[static_cast<size_t>(owner)] - tx_velocity[static_cast<size_t>(tx)];
        Vec2 disp = rx_pos[static_cast<size_t>(owner)] - pos[static_cast<size_t>(tx)];
        const Vec2 predicted = disp + rel_v * cs.phy.waiting_interval_s;
        if (predicted.norm() < kMinDistance) {
          // Keep the direction when there is one; the gain only needs the length.
          disp = Vec2{kMinDistance, 0.0} - rel_v * cs.phy.waiting_interval_s;
        }
        cs.gains.set(t, tx, owner, channel_gain(disp, rel_v, cs.phy.waiting_interval_s, draw, cs.phy).value);
      }
    }
  }
  return cs;
}

const char* to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::kV2IExclusive: return "v2i_exclusive";
    case Violation::Kind::kUserQuota: return "user_quota";
    case Violation::Kind::kResourceQuota: return "resource_quota";
    case Violation::Kind::kDedicatedAnchor: return "dedicated_anchor";
  }
  return "?";
}

std::vector<Violation> check_constraints(const Allocation& alloc, const Scenario& scenario) {
  const auto users = scenario.cellular_users();
  const auto& sp = scenario.spectrum;
  if (alloc.users() != static_cast<int>(users.size()) || alloc.dedicated() != sp.dedicated ||
      alloc.unlicensed() != sp.unlicensed || alloc.subframes() != sp.subframes) {
    throw std::invalid_argument("check_constraints: allocation shape does not match the scenario");
  }
  std::vector<Violation> out;
  auto fmt = [](const char* what, int a, int b, int c) {
    char buf[128];
    std::snprintf(buf, sizeof buf, what, a, b, c);
    return std::string(buf);
  };
  for (int t = 0; t < alloc.subframes(); ++t) {
    for (int k = 0; k < alloc.subchannels(); ++k) {
      const auto& m = alloc.members({k, t});
      const int v2i = static_cast<int>(std::count_if(m.begin(), m.end(), [&](int u) {
        return scenario.vehicle(users[static_cast<size_t>(u)]).role == Role::kV2I;
      }));
      if (v2i > 1) {
        out.push_back({Violation::Kind::kV2IExclusive, -1, {k, t}, v2i,
                       fmt("cell (k=%d,t=%d) holds %d V2I users", k + 1, t + 1, v2i)});
      }
      if (static_cast<int>(m.size()) > sp.max_vehicles_per_resource) {
        out.push_back({Violation::Kind::kResourceQuota, -1, {k, t}, static_cast<int>(m.size()),
                       fmt("cell (k=%d,t=%d) holds %d users", k + 1, t + 1, static_cast<int>(m.size()))});
      }
    }
  }
  for (int u = 0; u < alloc.users(); ++u) {
    const int held = static_cast<int>(alloc.holdings(u).size());
    if (held > sp.max_resources_per_vehicle) {
      out.push_back({Violation::Kind::kUserQuota, u, {}, held,
                     fmt("vehicle %d holds %d cells (quota %d)", users[static_cast<size_t>(u)], held,
                         sp.max_resources_per_vehicle)});
    }
    for (int t = 0; t < alloc.subframes(); ++t) {
      if (alloc.has_unlicensed_in(u, t) && !alloc.has_dedicated_in(u, t)) {
        out.push_back({Violation::Kind::kDedicatedAnchor, u, {-1, t}, 0,
                       fmt("vehicle %d uses subframe %d without a dedicated cell", users[static_cast<size_t>(u)],
                           t + 1, 0)});
      }
    }
  }
  return out;
}

int cell_active_count(std::span<const int> members, int t, const ChannelState& cs) {
  int n = 0;
  for (int u : members) {
    if (active_indicator(sinr(u, members, t, cs.gains, cs.phy), cs.phy.sinr_threshold)) ++n;
  }
  return n;
}

int resource_utility(Resource r, const Allocation& alloc, const ChannelState& cs) {
  return cell_active_count(alloc.members(r), r.t, cs);
}

std::vector<int> unlicensed_occupants(std::span<const std::vector<int>> cells_t, int dedicated) {
  std::vector<int> occ;
  for (size_t k = static_cast<size_t>(dedicated); k < cells_t.size(); ++k) {
    occ.insert(occ.end(), cells_t[k].begin(), cells_t[k].end());
  }
  std::sort(occ.begin(), occ.end());
  occ.erase(std::unique(occ.begin(), occ.end()), occ.end());
  return occ;
}

namespace {

InterferenceDisk disk_of(int user, int t, const ChannelState& cs) {
  return {user, cs.position[static_cast<size_t>(t)][static_cast<size_t>(user)], cs.radius[static_cast<size_t>(user)]};
}

}  // namespace

double penalty_term(int user, const Allocation& alloc, int t, const ChannelState& cs) {
  if (!alloc.has_unlicensed_in(user, t)) return 0.0;
  std::vector<InterferenceDisk> prior;
  for (int u : unlicensed_occupants(alloc.subframe(t), alloc.dedicated())) {
    if (u >= user) break;
    prior.push_back(disk_of(u, t, cs));
  }
  return additional_area(disk_of(user, t, cs), prior);
}

double subframe_interference(std::span<const std::vector<int>> cells_t, int dedicated, int t,
                             const ChannelState& cs) {
  const auto occ = unlicensed_occupants(cells_t, dedicated);
  std::vector<InterferenceDisk> prior;
  prior.reserve(occ.size());
  double total = 0.0;
  for (int u : occ) {
    const auto disk = disk_of(u, t, cs);
    total += additional_area(disk, prior);
    prior.push_back(disk);
  }
  return total;
}

double total_interference(const Allocation& alloc, const ChannelState& cs) {
  double total = 0.0;
  for (int t = 0; t < alloc.subframes(); ++t) {
    total += subframe_interference(alloc.subframe(t), alloc.dedicated(), t, cs);
  }
  return total;
}

double subframe_value(std::span<const std::vector<int>> cells_t, int dedicated, int t,
                      const ChannelState& cs, double lambda) {
  long active = 0;
  for (const auto& m : cells_t) active += cell_active_count(m, t, cs);
  const double penalty = lambda > 0.0 ? lambda * subframe_interference(cells_t, dedicated, t, cs) : 0.0;
  return static_cast<double>(active) - penalty;
}

ObjectiveBreakdown objective(const Allocation& alloc, const ChannelState& cs, double lambda) {
  if (!(lambda >= 0.0)) throw std::domain_error("objective: lambda must be non-negative");
  ObjectiveBreakdown b;
  b.lambda = lambda;
  for (int t = 0; t < alloc.subframes(); ++t) {
    for (int k = 0; k < alloc.subchannels(); ++k) b.active_count += resource_utility({k, t}, alloc, cs);
  }
  b.interference_area = total_interference(alloc, cs);
  b.value = static_cast<double>(b.active_count) - lambda * b.interference_area;
  return b;
}

ActiveSplit active_split(const Allocation& alloc, const ChannelState& cs) {
  ActiveSplit s;
  for (int t = 0; t < alloc.subframes(); ++t) {
    for (int k = 0; k < alloc.subchannels(); ++k) {
      const auto& m = alloc.members({k, t});
      const bool unl = alloc.unlicensed(k);
      if (unl) s.unlicensed_assignments += static_cast<long>(m.size());
      for (int u : m) {
        if (!active_indicator(sinr(u, m, t, cs.gains, cs.phy), cs.phy.sinr_threshold)) continue;
        const bool v2i = cs.is_v2i[static_cast<size_t>(u)];
        (v2i ? (unl ? s.v2i_unlicensed : s.v2i_dedicated) : (unl ? s.v2v_unlicensed : s.v2v_dedicated))++;
      }
    }
  }
  return s;
}

void write_allocation_csv(std::ostream& out, const Allocation& alloc, const ChannelState& cs) {
  out << "vehicle_id,k,t\n";
  for (int u = 0; u < alloc.users(); ++u) {
    for (const auto& r : alloc.holdings(u)) {
      out << cs.vehicle_ids[static_cast<size_t>(u)] << ',' << r.k + 1 << ',' << r.t + 1 << '\n';
    }
  }
}

}  // namespace v2x
