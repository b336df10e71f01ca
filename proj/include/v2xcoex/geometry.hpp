#pragma once

#include <cmath>
#include <numbers>
#include <span>

namespace v2x {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2&) const = default;
  double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

// Disk where a cellular transmitter's emission on an unlicensed subchannel
// exceeds the receive threshold.
struct InterferenceDisk {
  int id = 0;
  Vec2 center;
  double radius = 0.0;
};

// Disks of the users already occupying unlicensed spectrum in one subframe.
using OccupiedSet = std::span<const InterferenceDisk>;

/// Distance at which P^v * G * fading * d^-alpha drops to rx_threshold.
/// Throws std::domain_error unless every argument is strictly positive.
double interference_radius(double tx_power_w, double gain_factor, double fading,
                           double rx_threshold_w, double alpha);

/// Area of the intersection of two disks of radii r1, r2 whose centres are d
/// apart.
double circle_overlap(double r1, double r2, double d);

/// Part of disk i (radius ri) not covered by disk j (radius rj) at distance d.
double additional_area_pair(double ri, double rj, double d);

/// Smallest additional_area_pair of `candidate` against any disk in
/// `occupied`; a disk carrying the candidate's own id is skipped. With nothing
/// to overlap the candidate pays its full circle.
double additional_area(const InterferenceDisk& candidate, OccupiedSet occupied);

// Diagnostic only: area of the union of the disks by midpoint-grid
// integration over their bounding box.
double union_area_estimate(OccupiedSet disks, int cells_per_axis = 1000);

inline double disk_area(double r) { return std::numbers::pi * r * r; }

}  // namespace v2x
