#include "v2xcoex/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace v2x {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
double db_to_ratio(double db) { return std::pow(10.0, db / 10.0); }
double ratio_to_db(double ratio) { return 10.0 * std::log10(ratio); }

PhyParams PhyParams::defaults() {
  PhyParams p{};
  p.tx_power_w = dbm_to_watts(23.0);
  p.rx_threshold_w = dbm_to_watts(-75.0);
  p.bandwidth_hz = 10e3;
  p.noise_w = dbm_to_watts(-174.0 + 10.0 * std::log10(p.bandwidth_hz));
  p.gain_factor = db_to_ratio(-31.5);
  p.alpha = 3.0;
  p.sinr_threshold = db_to_ratio(0.0);
  p.waiting_interval_s = 10e-3;
  p.carrier_hz = 2.4e9;
  return p;
}

void PhyParams::validate() const {
  if (!(tx_power_w > 0) || !(rx_threshold_w > 0) || !(noise_w > 0) || !(gain_factor > 0)) {
    throw std::invalid_argument("phy: powers, noise and gain factor must be strictly positive");
  }
  if (!(alpha > 0)) throw std::invalid_argument("phy: alpha must be positive");
  if (!(sinr_threshold >= 0)) throw std::invalid_argument("phy: sinr threshold must be >= 0");
  if (!(waiting_interval_s >= 0)) throw std::invalid_argument("phy: waiting interval must be >= 0");
}

LinkGain channel_gain(Vec2 displacement, Vec2 relative_velocity, double waiting_interval_s,
                      double fading_draw, const PhyParams& phy) {
  const double dist = (displacement + relative_velocity * waiting_interval_s).norm();
  if (!(dist > 0.0)) {
    throw std::domain_error("channel_gain: transmitter and receiver are co-located");
  }
  return {phy.gain_factor * std::pow(dist, -phy.alpha) * fading_draw, fading_draw};
}

double received_power(const LinkGain& gain, const PhyParams& phy) {
  return phy.tx_power_w * gain.value;
}

LinkGainTable::LinkGainTable(int subframes, std::vector<bool> is_v2v)
    : subframes_(subframes),
      users_(static_cast<int>(is_v2v.size())),
      is_v2v_(std::move(is_v2v)),
      values_(static_cast<size_t>(subframes_) * users_ * users_, 0.0) {}

namespace {

bool contains(std::span<const int> members, int u) {
  return std::find(members.begin(), members.end(), u) != members.end();
}

double sinr_impl(int user, std::span<const int> co_channel, int t, const LinkGainTable& gains,
                 const PhyParams& phy, bool v2v_interferers_only) {
  if (!contains(co_channel, user)) return 0.0;
  double interference = 0.0;
  for (int other : co_channel) {
    if (other == user) continue;
    if (v2v_interferers_only && !gains.is_v2v(other)) continue;
    interference += phy.tx_power_w * gains.gain(t, other, user);
  }
  return phy.tx_power_w * gains.gain(t, user, user) / (phy.noise_w + interference);
}

}  // namespace

double sinr_v2i(int n, std::span<const int> co_channel, int t, const LinkGainTable& gains,
                const PhyParams& phy) {
  return sinr_impl(n, co_channel, t, gains, phy, true);
}

double sinr_v2v(int m, std::span<const int> co_channel, int t, const LinkGainTable& gains,
                const PhyParams& phy) {
  return sinr_impl(m, co_channel, t, gains, phy, false);
}

double sinr(int user, std::span<const int> co_channel, int t, const LinkGainTable& gains,
            const PhyParams& phy) {
  return gains.is_v2v(user) ? sinr_v2v(user, co_channel, t, gains, phy)
                            : sinr_v2i(user, co_channel, t, gains, phy);
}

}  // namespace v2x
