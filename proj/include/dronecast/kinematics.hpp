#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "dronecast/error.hpp"
#include "dronecast/link_budget.hpp"
#include "dronecast/mcs.hpp"

namespace dronecast {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const {
    double n = norm();
    if (n == 0.0) throw validation_error("cannot normalize a zero-length vector");
    return {x / n, y / n, z / n};
  }
};

struct Waypoint {
  double t_s = 0.0;
  Vec3 position_m;
  double roll_deg = 0.0;  // polarization-plane roll of the drone antenna
};

// Timed waypoints in the AP-centered frame (right-handed, z up). Position and
// roll are interpolated piecewise-linearly between waypoints.
struct Trajectory {
  std::vector<Waypoint> waypoints;

  void validate() const {
    if (waypoints.empty()) throw validation_error("Trajectory: needs at least one waypoint");
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
      if (!(waypoints[i].t_s > waypoints[i - 1].t_s)) {
        throw validation_error("Trajectory: waypoint times must be strictly increasing (waypoint " +
                               std::to_string(i) + ")");
      }
    }
  }

  double start_time_s() const { return waypoints.front().t_s; }
  double end_time_s() const { return waypoints.back().t_s; }

  std::pair<Vec3, double> position_at(double t) const {
    if (waypoints.empty()) throw validation_error("Trajectory: empty");
    if (t < start_time_s() || t > end_time_s()) {
      throw validation_error("Trajectory: t=" + std::to_string(t) + " outside span [" +
                             std::to_string(start_time_s()) + ", " + std::to_string(end_time_s()) + "]");
    }
    auto it = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                               [](double tt, const Waypoint& w) { return tt < w.t_s; });
    if (it == waypoints.begin()) return {waypoints.front().position_m, waypoints.front().roll_deg};
    if (it == waypoints.end()) return {waypoints.back().position_m, waypoints.back().roll_deg};
    const Waypoint& a = *(it - 1);
    const Waypoint& b = *it;
    double u = (t - a.t_s) / (b.t_s - a.t_s);
    Vec3 p = a.position_m + (b.position_m - a.position_m) * u;
    double roll = a.roll_deg + (b.roll_deg - a.roll_deg) * u;
    return {p, roll};
  }
};

// The ground AP sits at the origin; boresight is the mechanical pointing axis
// of its antenna (default zenith), from which scan offsets are measured.
struct ApConfig {
  Vec3 position_m{0.0, 0.0, 0.0};
  Vec3 boresight{0.0, 0.0, 1.0};

  void validate() const {
    if (std::abs(position_m.x) > 0 || std::abs(position_m.y) > 0 || std::abs(position_m.z) > 0) {
      throw validation_error("ApConfig.position_m is fixed at the origin");
    }
    if (std::abs(boresight.norm() - 1.0) > 1e-6) {
      throw validation_error("ApConfig.boresight must have unit norm");
    }
  }
};

struct GimbalState {
  double roll_deg = 0.0;
  double rate_limit_deg_s = 90.0;

  void validate() const {
    if (!(rate_limit_deg_s > 0)) throw validation_error("GimbalState.rate_limit_deg_s must be > 0");
  }
};

// Folds any roll difference into the [0, 90] degree mismatch range of linear
// polarization (180-degree plane symmetry, then mirror above 90).
inline double fold_mismatch_deg(double delta_deg) {
  double m = std::fmod(std::abs(delta_deg), 180.0);
  return m > 90.0 ? 180.0 - m : m;
}

// Angular offsets of the drone direction from the boresight axis, in the
// boresight-aligned frame: az along the frame's horizontal axis, el along its
// vertical axis, both via tangent-plane components. (0, 0) on boresight.
inline std::pair<double, double> aim_angles(const ApConfig& ap, const Vec3& position) {
  Vec3 d = position - ap.position_m;
  if (d.norm() == 0.0) throw validation_error("aim_angles: drone position equals AP position");
  Vec3 dir = d.normalized();
  Vec3 b = ap.boresight.normalized();

  // Horizontal axis of the antenna frame: perpendicular to world-up and
  // boresight. A (near-)vertical boresight has no preferred horizontal, so
  // fall back to world x.
  const Vec3 up{0.0, 0.0, 1.0};
  Vec3 eh = up.cross(b);
  if (eh.norm() < 1e-9) eh = Vec3{1.0, 0.0, 0.0};
  eh = eh.normalized();
  Vec3 ev = b.cross(eh);

  double along = dir.dot(b);
  double az = rad_to_deg(std::atan2(dir.dot(eh), along));
  double el = rad_to_deg(std::atan2(dir.dot(ev), along));
  return {az, el};
}

inline bool in_scan(const RadioHardware& hw, double az_off_deg, double el_off_deg) {
  return std::abs(az_off_deg) <= hw.scan_az_deg && std::abs(el_off_deg) <= hw.scan_el_deg;
}

// Finite-difference rate of change of the pointing direction over [t, t+dt],
// in deg/s. For tangential motion at speed v and range d this converges to
// (v/d)*(180/pi) as dt -> 0.
inline double angular_rate_deg_s(const Trajectory& traj, const ApConfig& ap, double t, double dt) {
  if (!(dt > 0)) throw validation_error("angular_rate_deg_s: dt must be > 0");
  Vec3 p0 = traj.position_at(t).first - ap.position_m;
  Vec3 p1 = traj.position_at(t + dt).first - ap.position_m;
  Vec3 u0 = p0.normalized();
  Vec3 u1 = p1.normalized();
  double angle_rad = std::atan2(u0.cross(u1).norm(), u0.dot(u1));
  return rad_to_deg(angle_rad) / dt;
}

struct GimbalStepResult {
  GimbalState state;
  double residual_mismatch_deg = 0.0;
};

// Slews the antenna roll toward the target polarization plane, moving at most
// rate_limit*dt. Planes repeat every 180 degrees, so the gimbal heads for the
// nearest equivalent target. Residual mismatch is folded into [0, 90].
inline GimbalStepResult gimbal_step(const GimbalState& state, double target_roll_deg, double dt) {
  if (!(dt > 0)) throw validation_error("gimbal_step: dt must be > 0");
  state.validate();
  double delta = std::remainder(target_roll_deg - state.roll_deg, 180.0);
  double max_step = state.rate_limit_deg_s * dt;
  double step = std::clamp(delta, -max_step, max_step);
  GimbalState next = state;
  next.roll_deg = state.roll_deg + step;
  return {next, fold_mismatch_deg(target_roll_deg - next.roll_deg)};
}

}  // namespace dronecast
