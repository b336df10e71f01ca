#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "v2xcoex/channel.hpp"
#include "v2xcoex/geometry.hpp"

namespace v2x {

enum class Role { kV2I, kV2VTransmitter, kV2VReceiver, kVanet };

const char* to_string(Role role);
Role role_from_string(const std::string& s);

inline double kmh_to_ms(double kmh) { return kmh / 3.6; }

// Minimum same-lane gap: 2.5 s of travel at the given speed.
inline double safe_gap_m(double speed_ms) { return 2.5 * speed_ms; }

// One directed lane. Vehicles travel from `start` along `direction` and
// re-enter at `start` after `length` metres.
struct Lane {
  Vec2 start;
  Vec2 direction;
  double length = 0.0;

  Vec2 point_at(double offset) const;
};

// Two perpendicular roads crossing at the origin, each with
// `lanes_per_direction` lanes per travel direction and arms of `arm_length`.
struct RoadGrid {
  double arm_length_m = 500.0;
  double lane_width_m = 3.5;
  int lanes_per_direction = 2;

  std::vector<Lane> lanes() const;
  double lane_length() const { return 2.0 * arm_length_m; }
};

struct Spectrum {
  int dedicated = 10;     // K
  int unlicensed = 10;    // K_u
  int subframes = 10;     // T
  double subframe_s = 1e-3;
  int max_resources_per_vehicle = 3;  // S
  int max_vehicles_per_resource = 3;  // Q

  int subchannels() const { return dedicated + unlicensed; }
  double sps_cycle_s() const { return subframes * subframe_s; }
  void validate() const;
};

struct Vehicle {
  int id = 0;
  Role role = Role::kVanet;
  int lane = 0;
  double offset_m = 0.0;  // along the lane at subframe 1
  double speed_ms = 0.0;
  std::optional<int> peer;  // vehicle id of the V2V partner
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::vector<Vehicle> vehicles;  // sorted by id, ids are 0..n-1
  RoadGrid grid;
  Spectrum spectrum;
  PhyParams phy = PhyParams::defaults();
  Vec2 bs_position;
  std::vector<std::string> warnings;

  const Vehicle& vehicle(int id) const { return vehicles.at(static_cast<size_t>(id)); }
  Vec2 position(const Vehicle& v, double elapsed_s) const;
  Vec2 velocity(const Vehicle& v) const;

  // Ids of the scheduled users (V2I users and V2V transmitters), ascending.
  std::vector<int> cellular_users() const;
  int count(Role role) const;

  // Area of the grid's bounding box grown by `margin` on every side.
  double map_area(double margin) const;

  void validate() const;
};

struct ScenarioConfig {
  RoadGrid grid;
  Spectrum spectrum;
  PhyParams phy = PhyParams::defaults();
  double speed_kmh = 45.0;
  int v2i = 10;
  int v2v_pairs = 10;
  int vanet = 10;
  double pairing_range_m = 50.0;

  int total_vehicles() const { return v2i + 2 * v2v_pairs + vanet; }
};

struct RoleCounts {
  int v2i = 0;
  int v2v_pairs = 0;
  int vanet = 0;
};

// Vehicle counts for a fraction of the grid's safe-spacing capacity at the
// given speed, split by role shares (v2v_share counts vehicles, two per pair).
RoleCounts counts_from_density(const RoadGrid& grid, double speed_kmh, double fraction,
                               double v2i_share, double v2v_share);

Scenario generate_urban(const ScenarioConfig& config, std::uint64_t seed);

// Transmitter positions at subframe t (1-based); t = 1 is the generated snapshot.
std::vector<Vec2> advance(const Scenario& scenario, int t);

// The same vehicles `elapsed_s` later, re-based as a new subframe-1 snapshot.
Scenario shifted(const Scenario& scenario, double elapsed_s);

nlohmann::json to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& doc);

}  // namespace v2x
