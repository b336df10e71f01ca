#pragma once

#include <vector>

#include "v2xcoex/scenario.hpp"
#include "v2xcoex/schedule.hpp"

namespace v2x::oracle {

struct Fixture {
  Scenario sc;
  ChannelState cs;

  void gain(int t, int tx, int owner, double g) { cs.gains.set(t, tx, owner, g); }
  void place(int t, int user, Vec2 p) { cs.position[static_cast<size_t>(t)][static_cast<size_t>(user)] = p; }
};

// Hand-built instance: one scheduled user per role entry (kV2I or
// kV2VTransmitter), unit transmit power and noise, gamma_th = 1, every own
// link gain 10 (SINR 10 when alone), all cross gains 0, users 1 km apart.
inline Fixture make_fixture(const std::vector<Role>& roles, int dedicated, int unlicensed, int subframes, int s,
                            int q, double radius = 1.0) {
  Fixture f;
  f.sc.spectrum.dedicated = dedicated;
  f.sc.spectrum.unlicensed = unlicensed;
  f.sc.spectrum.subframes = subframes;
  f.sc.spectrum.max_resources_per_vehicle = s;
  f.sc.spectrum.max_vehicles_per_resource = q;
  const int users = static_cast<int>(roles.size());
  int next_rx = users;
  for (int u = 0; u < users; ++u) {
    Vehicle v;
    v.id = u;
    v.role = roles[static_cast<size_t>(u)];
    v.offset_m = 10.0 * u;
    if (v.role == Role::kV2VTransmitter) v.peer = next_rx++;
    f.sc.vehicles.push_back(v);
  }
  for (int u = 0; u < users; ++u) {
    if (roles[static_cast<size_t>(u)] != Role::kV2VTransmitter) continue;
    Vehicle rx;
    rx.id = static_cast<int>(f.sc.vehicles.size());
    rx.role = Role::kV2VReceiver;
    rx.offset_m = 10.0 * u + 5.0;
    rx.peer = u;
    f.sc.vehicles.push_back(rx);
  }

  f.cs.phy = PhyParams::defaults();
  f.cs.phy.tx_power_w = 1.0;
  f.cs.phy.noise_w = 1.0;
  f.cs.phy.sinr_threshold = 1.0;
  f.sc.phy = f.cs.phy;
  std::vector<bool> v2v;
  for (auto r : roles) {
    v2v.push_back(r == Role::kV2VTransmitter);
    f.cs.is_v2i.push_back(r == Role::kV2I);
  }
  f.cs.gains = LinkGainTable(subframes, v2v);
  for (int t = 0; t < subframes; ++t) {
    for (int u = 0; u < users; ++u) f.cs.gains.set(t, u, u, 10.0);
  }
  f.cs.radius.assign(static_cast<size_t>(users), radius);
  f.cs.position.assign(static_cast<size_t>(subframes), std::vector<Vec2>(static_cast<size_t>(users)));
  for (int t = 0; t < subframes; ++t) {
    for (int u = 0; u < users; ++u) f.place(t, u, {1000.0 * u, 0.0});
  }
  for (int u = 0; u < users; ++u) f.cs.vehicle_ids.push_back(u);
  return f;
}

}  // namespace v2x::oracle
