#include "v2xcoex/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "v2xcoex/rng.hpp"

namespace v2x {

const char* to_string(Role role) {
  switch (role) {
    case Role::kV2I: return "v2i";
    case Role::kV2VTransmitter: return "v2v_tx";
    case Role::kV2VReceiver: return "v2v_rx";
    case Role::kVanet: return "vanet";
  }
  return "?";
}

Role role_from_string(const std::string& s) {
  if (s == "v2i") return Role::kV2I;
  if (s == "v2v_tx") return Role::kV2VTransmitter;
  if (s == "v2v_rx") return Role::kV2VReceiver;
  if (s == "vanet") return Role::kVanet;
  throw std::invalid_argument("unknown vehicle role '" + s + "'");
}

Vec2 Lane::point_at(double offset) const {
  double s = std::fmod(offset, length);
  if (s < 0) s += length;
  return start + direction * s;
}

std::vector<Lane> RoadGrid::lanes() const {
  std::vector<Lane> out;
  const double len = lane_length();
  const double a = arm_length_m;
  // East, west, north, south; lane j sits (j + 0.5) lane widths off the axis
  // on the right-hand side of its travel direction.
  for (int j = 0; j < lanes_per_direction; ++j) {
    const double off = (j + 0.5) * lane_width_m;
    out.push_back({{-a, -off}, {1, 0}, len});
    out.push_back({{a, off}, {-1, 0}, len});
    out.push_back({{off, -a}, {0, 1}, len});
    out.push_back({{-off, a}, {0, -1}, len});
  }
  return out;
}

void Spectrum::validate() const {
  if (dedicated < 1 || subframes < 1 || max_resources_per_vehicle < 1 ||
      max_vehicles_per_resource < 1) {
    throw std::invalid_argument("spectrum: K, T, S and Q must be >= 1");
  }
  if (unlicensed < 0) throw std::invalid_argument("spectrum: K_u must be >= 0");
  if (!(subframe_s > 0)) throw std::invalid_argument("spectrum: subframe length must be positive");
}

Vec2 Scenario::position(const Vehicle& v, double elapsed_s) const {
  const auto lanes = grid.lanes();
  return lanes.at(static_cast<size_t>(v.lane)).point_at(v.offset_m + v.speed_ms * elapsed_s);
}

Vec2 Scenario::velocity(const Vehicle& v) const {
  return grid.lanes().at(static_cast<size_t>(v.lane)).direction * v.speed_ms;
}

std::vector<int> Scenario::cellular_users() const {
  std::vector<int> ids;
  for (const auto& v : vehicles) {
    if (v.role == Role::kV2I || v.role == Role::kV2VTransmitter) ids.push_back(v.id);
  }
  return ids;
}

int Scenario::count(Role role) const {
  return static_cast<int>(std::count_if(vehicles.begin(), vehicles.end(),
                                        [&](const Vehicle& v) { return v.role == role; }));
}

double Scenario::map_area(double margin) const {
  const double side = 2.0 * grid.arm_length_m + 2.0 * margin;
  return side * side;
}

void Scenario::validate() const {
  spectrum.validate();
  phy.validate();
  const int lane_count = static_cast<int>(grid.lanes().size());
  for (size_t i = 0; i < vehicles.size(); ++i) {
    const auto& v = vehicles[i];
    if (v.id != static_cast<int>(i)) throw std::invalid_argument("scenario: vehicle ids must be 0..n-1 in order");
    if (v.lane < 0 || v.lane >= lane_count) throw std::invalid_argument("scenario: vehicle lane out of range");
    if (v.speed_ms < 0) throw std::invalid_argument("scenario: negative speed");
    const bool v2v = v.role == Role::kV2VTransmitter || v.role == Role::kV2VReceiver;
    if (v2v != v.peer.has_value()) {
      throw std::invalid_argument("scenario: vehicle " + std::to_string(v.id) +
                                  " has inconsistent V2V peer");
    }
    if (v.peer) {
      const auto& p = vehicles.at(static_cast<size_t>(*v.peer));
      const Role expected = v.role == Role::kV2VTransmitter ? Role::kV2VReceiver : Role::kV2VTransmitter;
      if (p.role != expected || p.peer != v.id) {
        throw std::invalid_argument("scenario: V2V peer link of vehicle " + std::to_string(v.id) +
                                    " is not mutual");
      }
    }
  }
}

RoleCounts counts_from_density(const RoadGrid& grid, double speed_kmh, double fraction,
                               double v2i_share, double v2v_share) {
  const double gap = safe_gap_m(kmh_to_ms(speed_kmh));
  const int per_lane = gap > 0 ? static_cast<int>(std::floor(grid.lane_length() / gap + 1e-9))
                               : std::numeric_limits<int>::max() / 64;
  const int capacity = per_lane * static_cast<int>(grid.lanes().size());
  const int total = static_cast<int>(std::floor(fraction * capacity));
  RoleCounts c;
  c.v2i = static_cast<int>(std::lround(v2i_share * total));
  c.v2v_pairs = static_cast<int>(std::floor(v2v_share * total / 2.0));
  c.vanet = std::max(0, total - c.v2i - 2 * c.v2v_pairs);
  return c;
}

Scenario generate_urban(const ScenarioConfig& config, std::uint64_t seed) {
  config.spectrum.validate();
  config.phy.validate();
  if (config.v2i < 0 || config.v2v_pairs < 0 || config.vanet < 0) {
    throw std::invalid_argument("scenario: role counts must be non-negative");
  }
  if (config.speed_kmh < 15.0 || config.speed_kmh > 60.0) {
    throw std::invalid_argument("scenario: speed must lie in [15, 60] km/h");
  }

  Rng rng(derive_seed(seed, Stream::kScenario));
  Scenario sc;
  sc.grid = config.grid;
  sc.spectrum = config.spectrum;
  sc.phy = config.phy;
  sc.bs_position = {0.0, 0.0};

  const auto lanes = sc.grid.lanes();
  const int n_lanes = static_cast<int>(lanes.size());
  const int total = config.total_vehicles();
  const double speed = kmh_to_ms(config.speed_kmh);
  const double min_gap = safe_gap_m(speed);

  // Spread the vehicles over lanes; the remainder goes to randomly chosen lanes.
  std::vector<int> per_lane(static_cast<size_t>(n_lanes), total / n_lanes);
  std::vector<int> lane_order(static_cast<size_t>(n_lanes));
  std::iota(lane_order.begin(), lane_order.end(), 0);
  std::shuffle(lane_order.begin(), lane_order.end(), rng);
  for (int i = 0; i < total % n_lanes; ++i) ++per_lane[static_cast<size_t>(lane_order[static_cast<size_t>(i)])];

  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int lane = 0; lane < n_lanes; ++lane) {
    const int n = per_lane[static_cast<size_t>(lane)];
    if (n == 0) continue;
    const double length = lanes[static_cast<size_t>(lane)].length;
    const double slack = length - (n > 1 ? n * min_gap : 0.0);
    if (slack < 0) {
      throw GenerationError("scenario: lane " + std::to_string(lane) + " cannot hold " +
                            std::to_string(n) + " vehicles at " + std::to_string(config.speed_kmh) +
                            " km/h (needs " + std::to_string(n * min_gap) + " m, has " +
                            std::to_string(length) + " m)");
    }
    // Circular lane: n gaps of min_gap plus an exponential share of the slack.
    std::vector<double> weights(static_cast<size_t>(n));
    for (auto& w : weights) w = expo(rng);
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    double pos = unit(rng) * length;
    for (int i = 0; i < n; ++i) {
      Vehicle v;
      v.id = static_cast<int>(sc.vehicles.size());
      v.lane = lane;
      v.offset_m = std::fmod(pos, length);
      v.speed_ms = speed;
      sc.vehicles.push_back(v);
      pos += (n > 1 ? min_gap : 0.0) + slack * weights[static_cast<size_t>(i)] / wsum;
    }
  }

  // Roles: a random subset becomes V2I, then transmitters are paired with the
  // nearest free vehicle inside the pairing range.
  std::vector<int> order(static_cast<size_t>(total));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int i = 0; i < config.v2i; ++i) sc.vehicles[static_cast<size_t>(order[static_cast<size_t>(i)])].role = Role::kV2I;

  std::vector<Vec2> pos0(static_cast<size_t>(total));
  for (const auto& v : sc.vehicles) pos0[static_cast<size_t>(v.id)] = sc.position(v, 0.0);

  int pairs = 0;
  for (size_t i = static_cast<size_t>(config.v2i); i < order.size() && pairs < config.v2v_pairs; ++i) {
    auto& tx = sc.vehicles[static_cast<size_t>(order[i])];
    if (tx.role != Role::kVanet) continue;
    int best = -1;
    double best_d = config.pairing_range_m;
    for (size_t j = static_cast<size_t>(config.v2i); j < order.size(); ++j) {
      const int cand = order[j];
      if (cand == tx.id || sc.vehicles[static_cast<size_t>(cand)].role != Role::kVanet) continue;
      const double d = distance(pos0[static_cast<size_t>(tx.id)], pos0[static_cast<size_t>(cand)]);
      if (d <= best_d && (best < 0 || d < best_d || cand < best)) {
        best = cand;
        best_d = d;
      }
    }
    if (best < 0) continue;
    auto& rx = sc.vehicles[static_cast<size_t>(best)];
    tx.role = Role::kV2VTransmitter;
    rx.role = Role::kV2VReceiver;
    tx.peer = rx.id;
    rx.peer = tx.id;
    ++pairs;
  }
  if (pairs < config.v2v_pairs) {
    sc.warnings.push_back("scenario: only " + std::to_string(pairs) + " of " +
                          std::to_string(config.v2v_pairs) + " V2V pairs found within " +
                          std::to_string(config.pairing_range_m) +
                          " m; unpaired candidates stay VANET");
  }
  return sc;
}

std::vector<Vec2> advance(const Scenario& scenario, int t) {
  if (t < 1 || t > scenario.spectrum.subframes) {
    throw std::out_of_range("advance: subframe outside the SPS cycle");
  }
  const double elapsed = (t - 1) * scenario.spectrum.subframe_s;
  const auto lanes = scenario.grid.lanes();
  std::vector<Vec2> out;
  out.reserve(scenario.vehicles.size());
  for (const auto& v : scenario.vehicles) {
    out.push_back(lanes[static_cast<size_t>(v.lane)].point_at(v.offset_m + v.speed_ms * elapsed));
  }
  return out;
}

Scenario shifted(const Scenario& scenario, double elapsed_s) {
  Scenario out = scenario;
  const auto lanes = scenario.grid.lanes();
  for (auto& v : out.vehicles) {
    const double len = lanes[static_cast<size_t>(v.lane)].length;
    v.offset_m = std::fmod(v.offset_m + v.speed_ms * elapsed_s, len);
    if (v.offset_m < 0) v.offset_m += len;
  }
  return out;
}

nlohmann::json to_json(const Scenario& sc) {
  using nlohmann::json;
  json vehicles = json::array();
  for (const auto& v : sc.vehicles) {
    json jv = {{"id", v.id}, {"role", to_string(v.role)}, {"lane", v.lane},
               {"offset_m", v.offset_m}, {"speed_ms", v.speed_ms}};
    jv["peer"] = v.peer ? json(*v.peer) : json(nullptr);
    vehicles.push_back(jv);
  }
  const auto& p = sc.phy;
  return {
      {"vehicles", vehicles},
      {"grid", {{"arm_length_m", sc.grid.arm_length_m},
                {"lane_width_m", sc.grid.lane_width_m},
                {"lanes_per_direction", sc.grid.lanes_per_direction}}},
      {"spectrum", {{"K", sc.spectrum.dedicated},
                    {"K_u", sc.spectrum.unlicensed},
                    {"T", sc.spectrum.subframes},
                    {"subframe_s", sc.spectrum.subframe_s},
                    {"S", sc.spectrum.max_resources_per_vehicle},
                    {"Q", sc.spectrum.max_vehicles_per_resource}}},
      {"phy", {{"tx_power_w", p.tx_power_w},
               {"rx_threshold_w", p.rx_threshold_w},
               {"noise_w", p.noise_w},
               {"gain_factor", p.gain_factor},
               {"alpha", p.alpha},
               {"sinr_threshold", p.sinr_threshold},
               {"bandwidth_hz", p.bandwidth_hz},
               {"waiting_interval_s", p.waiting_interval_s},
               {"carrier_hz", p.carrier_hz}}},
      {"bs_position", {sc.bs_position.x, sc.bs_position.y}},
  };
}

Scenario scenario_from_json(const nlohmann::json& doc) {
  Scenario sc;
  try {
    const auto& g = doc.at("grid");
    sc.grid.arm_length_m = g.at("arm_length_m").get<double>();
    sc.grid.lane_width_m = g.at("lane_width_m").get<double>();
    sc.grid.lanes_per_direction = g.at("lanes_per_direction").get<int>();
    const auto& s = doc.at("spectrum");
    sc.spectrum.dedicated = s.at("K").get<int>();
    sc.spectrum.unlicensed = s.at("K_u").get<int>();
    sc.spectrum.subframes = s.at("T").get<int>();
    sc.spectrum.subframe_s = s.at("subframe_s").get<double>();
    sc.spectrum.max_resources_per_vehicle = s.at("S").get<int>();
    sc.spectrum.max_vehicles_per_resource = s.at("Q").get<int>();
    const auto& p = doc.at("phy");
    sc.phy.tx_power_w = p.at("tx_power_w").get<double>();
    sc.phy.rx_threshold_w = p.at("rx_threshold_w").get<double>();
    sc.phy.noise_w = p.at("noise_w").get<double>();
    sc.phy.gain_factor = p.at("gain_factor").get<double>();
    sc.phy.alpha = p.at("alpha").get<double>();
    sc.phy.sinr_threshold = p.at("sinr_threshold").get<double>();
    sc.phy.bandwidth_hz = p.at("bandwidth_hz").get<double>();
    sc.phy.waiting_interval_s = p.at("waiting_interval_s").get<double>();
    sc.phy.carrier_hz = p.at("carrier_hz").get<double>();
    const auto& bs = doc.at("bs_position");
    sc.bs_position = {bs.at(0).get<double>(), bs.at(1).get<double>()};
    for (const auto& jv : doc.at("vehicles")) {
      Vehicle v;
      v.id = jv.at("id").get<int>();
      v.role = role_from_string(jv.at("role").get<std::string>());
      v.lane = jv.at("lane").get<int>();
      v.offset_m = jv.at("offset_m").get<double>();
      v.speed_ms = jv.at("speed_ms").get<double>();
      if (jv.contains("peer") && !jv.at("peer").is_null()) v.peer = jv.at("peer").get<int>();
      sc.vehicles.push_back(v);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("scenario json: ") + e.what());
  }
  sc.validate();
  return sc;
}

}  // namespace v2x
