#include "v2xcoex/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace v2x {
namespace {

constexpr double kCoincident = 1e-12;

double safe_acos(double v) { return std::acos(std::clamp(v, -1.0, 1.0)); }

// 2R^2(r^2+d^2) - (r^2-d^2)^2 - R^4, i.e. 16 * (triangle area)^2 of the
// (r, R, d) triangle; clamped against round-off near tangency.
double lens_root(double r, double big_r, double d) {
  const double r2 = r * r;
  const double big_r2 = big_r * big_r;
  const double d2 = d * d;
  const double v = 2.0 * big_r2 * (r2 + d2) - (r2 - d2) * (r2 - d2) - big_r2 * big_r2;
  return std::sqrt(std::max(0.0, v));
}

}  // namespace

double interference_radius(double tx_power_w, double gain_factor, double fading,
                           double rx_threshold_w, double alpha) {
  if (!(tx_power_w > 0.0) || !(gain_factor > 0.0) || !(fading > 0.0) ||
      !(rx_threshold_w > 0.0) || !(alpha > 0.0)) {
    throw std::domain_error("interference_radius: all inputs must be strictly positive");
  }
  return std::pow(tx_power_w * gain_factor * fading / rx_threshold_w, 1.0 / alpha);
}

double circle_overlap(double r1, double r2, double d) {
  if (!(r1 > 0.0) || !(r2 > 0.0) || !(d >= 0.0)) {
    throw std::domain_error("circle_overlap: radii must be positive and distance non-negative");
  }
  const double r = std::min(r1, r2);
  const double big_r = std::max(r1, r2);
  if (d >= r + big_r) return 0.0;
  if (d <= big_r - r || d < kCoincident) return disk_area(r);

  const double r2s = r * r;
  const double big_r2 = big_r * big_r;
  const double d2 = d * d;
  const double tail = 0.5 * lens_root(r, big_r, d);
  const double big_term = big_r2 * safe_acos((d2 - r2s + big_r2) / (2.0 * big_r * d));
  double area;
  if (d < std::sqrt(big_r2 - r2s)) {
    area = r2s * safe_acos((d2 + r2s - big_r2) / (2.0 * r * d)) + big_term - tail;
  } else {
    area = std::numbers::pi * r2s - r2s * safe_acos((big_r2 - d2 - r2s) / (2.0 * r * d)) +
           big_term - tail;
  }
  return std::clamp(area, 0.0, disk_area(r));
}

double additional_area_pair(double ri, double rj, double d) {
  if (d >= ri + rj) return disk_area(ri);
  return std::max(0.0, disk_area(ri) - circle_overlap(ri, rj, d));
}

double additional_area(const InterferenceDisk& candidate, OccupiedSet occupied) {
  double best = disk_area(candidate.radius);
  for (const auto& other : occupied) {
    if (other.id == candidate.id) continue;
    best = std::min(best, additional_area_pair(candidate.radius, other.radius,
                                               distance(candidate.center, other.center)));
  }
  return best;
}

double union_area_estimate(OccupiedSet disks, int cells_per_axis) {
  if (disks.empty()) return 0.0;
  double x0 = std::numeric_limits<double>::max(), y0 = x0;
  double x1 = std::numeric_limits<double>::lowest(), y1 = x1;
  for (const auto& d : disks) {
    x0 = std::min(x0, d.center.x - d.radius);
    y0 = std::min(y0, d.center.y - d.radius);
    x1 = std::max(x1, d.center.x + d.radius);
    y1 = std::max(y1, d.center.y + d.radius);
  }
  const double hx = (x1 - x0) / cells_per_axis;
  const double hy = (y1 - y0) / cells_per_axis;
  long covered = 0;
  for (int i = 0; i < cells_per_axis; ++i) {
    const double x = x0 + (i + 0.5) * hx;
    for (int j = 0; j < cells_per_axis; ++j) {
      const Vec2 p{x, y0 + (j + 0.5) * hy};
      for (const auto& d : disks) {
        if (distance(p, d.center) <= d.radius) {
          ++covered;
          break;
        }
      }
    }
  }
  return static_cast<double>(covered) * hx * hy;
}

}  // namespace v2x
