#pragma once

#include <span>
#include <vector>

#include "v2xcoex/geometry.hpp"

namespace v2x {

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double db_to_ratio(double db);
double ratio_to_db(double ratio);

// Link-budget parameters shared by every cellular transmitter.
struct PhyParams {
  double tx_power_w;          // P^v
  double rx_threshold_w;      // P^r, also the interference-disk edge
  double noise_w;             // sigma^2 per subchannel
  double gain_factor;         // G
  double alpha;               // path-loss exponent
  double sinr_threshold;      // gamma_th as a linear ratio
  double bandwidth_hz;        // B; rates are per Hz, kept for reporting
  double waiting_interval_s;  // t_w
  double carrier_hz;

  // 23 dBm, -75 dBm, -174 dBm/Hz over 10 kHz, -31.5 dB, alpha 3, 0 dB,
  // 2.4 GHz. t_w defaults to one 10-subframe SPS cycle.
  static PhyParams defaults();
  void validate() const;
};

struct LinkGain {
  double value = 0.0;        // |h|^2
  double fading_draw = 1.0;  // |h0|^2
};

/// |h|^2 = G * |d + v * t_w|^-alpha * |h0|^2. `displacement` points from the
/// transmitter to the receiver and `relative_velocity` is the receiver's
/// velocity minus the transmitter's, so their combination predicts the
/// displacement t_w later. Throws std::domain_error on zero effective distance.
LinkGain channel_gain(Vec2 displacement, Vec2 relative_velocity, double waiting_interval_s,
                      double fading_draw, const PhyParams& phy);

double received_power(const LinkGain& gain, const PhyParams& phy);

// Gains for one SPS cycle. gain(t, tx, owner) is the power gain from user tx
// to the receiver serving user `owner`: the BS for a V2I user, the paired
// receiver for a V2V user. gain(t, u, u) is therefore u's own signal link.
class LinkGainTable {
 public:
  LinkGainTable() = default;
  LinkGainTable(int subframes, std::vector<bool> is_v2v);

  double gain(int t, int tx, int owner) const {
    return values_[(static_cast<size_t>(t) * users_ + tx) * users_ + owner];
  }
  void set(int t, int tx, int owner, double value) {
    values_[(static_cast<size_t>(t) * users_ + tx) * users_ + owner] = value;
  }
  int users() const { return users_; }
  int subframes() const { return subframes_; }
  bool is_v2v(int u) const { return is_v2v_[u]; }

 private:
  int subframes_ = 0;
  int users_ = 0;
  std::vector<bool> is_v2v_;
  std::vector<double> values_;
};

// SINR of a V2I user at the BS over one (k,t) cell. `co_channel` lists every
// user assigned to the cell; the result is 0 if `n` is not among them. Only
// V2V transmitters contribute interference.
double sinr_v2i(int n, std::span<const int> co_channel, int t, const LinkGainTable& gains,
                const PhyParams& phy);

// SINR at the receiver of V2V user m; every other co-channel transmitter
// interferes.
double sinr_v2v(int m, std::span<const int> co_channel, int t, const LinkGainTable& gains,
                const PhyParams& phy);

// Dispatches on the user's role.
double sinr(int user, std::span<const int> co_channel, int t, const LinkGainTable& gains,
            const PhyParams& phy);

inline double rate(double sinr_value) { return std::log2(1.0 + sinr_value); }

inline bool active_indicator(double sinr_value, double sinr_threshold) {
  return sinr_value >= sinr_threshold;
}

}  // namespace v2x
