#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dronecast/detection.hpp"
#include "dronecast/error.hpp"
#include "dronecast/kinematics.hpp"
#include "dronecast/link_budget.hpp"
#include "dronecast/mcs.hpp"
#include "dronecast/video.hpp"

namespace dronecast {

// Deterministic time-stepped simulation of the whole chain: geometry ->
// gimbal residual -> polarization loss -> SNR -> MCS -> capacity, driving a
// fluid FIFO frame queue. Buffered bits drain continuously at the step's
// capacity; a frame is delivered the instant its last bit drains (plus decode
// latency). Frames that can no longer meet their deadline, or that would
// overflow the buffer on arrival, are dropped.

enum class ComputePlacement { kEdge, kOnboard };

struct PowerModel {
  double rx_idle_w = 3.8;
  double rx_active_w = 17.3;
  double drone_base_w = 0.0;
  double drone_radio_w = 0.0;
  double drone_ai_w = 0.0;  // drawn only under onboard placement

  void validate() const {
    if (!(rx_idle_w >= 0)) throw validation_error("PowerModel.rx_idle_w must be >= 0");
    if (!(rx_active_w >= 0)) throw validation_error("PowerModel.rx_active_w must be >= 0");
    if (!(drone_base_w >= 0)) throw validation_error("PowerModel.drone_base_w must be >= 0");
    if (!(drone_radio_w >= 0)) throw validation_error("PowerModel.drone_radio_w must be >= 0");
    if (!(drone_ai_w >= 0)) throw validation_error("PowerModel.drone_ai_w must be >= 0");
    if (!(rx_active_w >= rx_idle_w)) {
      throw validation_error("PowerModel.rx_active_w must be >= rx_idle_w");
    }
  }
};

struct QueuePolicy {
  double max_queue_bits = std::numeric_limits<double>::infinity();
  double frame_deadline_s = 1.0;

  void validate() const {
    if (!(max_queue_bits > 0)) throw validation_error("QueuePolicy.max_queue_bits must be > 0");
    if (!(frame_deadline_s > 0)) throw validation_error("QueuePolicy.frame_deadline_s must be > 0");
  }
};

struct DetectionConfig {
  DetectionCalibration calibration;
  FaceScene scene;
};

struct Scenario {
  LinkBudgetParams link;
  RadioHardware ground_radio;
  RadioHardware drone_radio;
  McsTable mcs_table;
  double mcs_hysteresis_db = 0.0;
  Trajectory trajectory;
  ApConfig ap;
  GimbalState gimbal_init;
  VideoProfile video;
  CodecModel codec;
  PowerModel power;
  std::optional<DetectionConfig> detection;
  double duration_s = 0.0;
  double channel_sample_dt_s = 0.01;
  QueuePolicy queue;
  ComputePlacement placement = ComputePlacement::kEdge;
  double max_tracking_rate_deg_s = std::numeric_limits<double>::infinity();

  void validate() const {
    link.validate();
    ground_radio.validate();
    drone_radio.validate();
    if (mcs_table.entries().empty()) throw validation_error("Scenario: MCS table is empty");
    if (!(mcs_hysteresis_db >= 0)) throw validation_error("Scenario.mcs_hysteresis_db must be >= 0");
    trajectory.validate();
    ap.validate();
    gimbal_init.validate();
    video.validate();
    codec.validate();
    power.validate();
    queue.validate();
    if (detection) {
      detection->calibration.validate();
      detection->scene.validate();
    }
    if (!(duration_s >= 0)) throw validation_error("Scenario.duration_s must be >= 0");
    if (!(channel_sample_dt_s > 0)) throw validation_error("Scenario.channel_sample_dt_s must be > 0");
    if (!(max_tracking_rate_deg_s > 0)) {
      throw validation_error("Scenario.max_tracking_rate_deg_s must be > 0");
    }
    if (trajectory.start_time_s() > 0 || trajectory.end_time_s() < duration_s) {
      throw validation_error("Scenario: trajectory must cover [0, duration_s]");
    }
    for (const Waypoint& w : trajectory.waypoints) {
      if ((w.position_m - ap.position_m).norm() <= 0.0) {
        throw validation_error("Scenario: waypoint coincides with the AP position");
      }
    }
  }
};

struct StepRecord {
  double t_s = 0.0;
  double distance_m = 0.0;
  double az_off_deg = 0.0;
  double el_off_deg = 0.0;
  bool in_scan = false;
  double ang_rate_deg_s = 0.0;
  double pol_mismatch_deg = 0.0;
  double extra_loss_db = 0.0;
  double snr_db = 0.0;
  std::optional<int> mcs_index;
  double capacity_bps = 0.0;
  double queue_bits = 0.0;          // occupancy at the end of the step
  std::int64_t frames_delivered_cum = 0;
  std::int64_t frames_dropped_cum = 0;
};

struct LatencyStats {
  double mean_s = 0.0;
  double p95_s = 0.0;
  double max_s = 0.0;
};

struct SimulationResult {
  std::vector<StepRecord> steps;
  std::int64_t frames_generated = 0;
  std::int64_t frames_delivered = 0;
  std::int64_t frames_dropped = 0;
  std::int64_t frames_pending_end = 0;  // generated but neither delivered nor dropped
  double generated_bits = 0.0;
  double delivered_bits = 0.0;
  LatencyStats latency;
  double goodput_bps = 0.0;
  double ground_active_s = 0.0;
  double energy_ground_j = 0.0;
  double energy_drone_j = 0.0;
  double duration_s = 0.0;
  std::optional<double> detections_per_delivered_frame;
};

struct EnergyBreakdown {
  double ground_active_s = 0.0;
  double ground_idle_s = 0.0;
  double ground_j = 0.0;
  double ground_idle_baseline_j = 0.0;  // receiver idling for the whole run
  double drone_j = 0.0;
};

struct RunOptions {
  enum class DetectionStat { kExpected, kMonteCarlo };
  DetectionStat detection_stat = DetectionStat::kExpected;
  std::uint64_t seed = 0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::int64_t step_count(double duration_s, double dt_s) {
  std::int64_t n = 0;
  while (static_cast<double>(n) * dt_s < duration_s) ++n;
  return n;
}

namespace detail {

inline EnergyBreakdown compute_energy(double active_s, const Scenario& sc) {
  EnergyBreakdown e;
  const double duration = sc.duration_s;
  e.ground_active_s = active_s;
  e.ground_idle_s = std::max(0.0, duration - active_s);
  e.ground_idle_baseline_j = sc.power.rx_idle_w * duration;
  if (sc.placement == ComputePlacement::kOnboard) {
    // all computation on the drone; the ground station just idles
    e.ground_j = sc.power.rx_idle_w * duration;
  } else {
    e.ground_j = (sc.power.rx_active_w + sc.codec.decode_power_w) * e.ground_active_s +
                 sc.power.rx_idle_w * e.ground_idle_s;
  }
  double drone_w = sc.power.drone_base_w + sc.power.drone_radio_w + sc.codec.encode_power_w;
  if (sc.placement == ComputePlacement::kOnboard) drone_w += sc.power.drone_ai_w;
  e.drone_j = drone_w * duration;
  return e;
}

}  // namespace detail

inline SimulationResult run(const Scenario& sc, const RunOptions& opt = {}) {
  sc.validate();

  SimulationResult r;
  r.duration_s = sc.duration_s;
  if (sc.duration_s == 0.0) return r;

  const double frame_bits = frame_size_bits(sc.video, sc.codec);
  const std::vector<double> gen_times = frame_times_s(sc.video, sc.duration_s);
  r.frames_generated = static_cast<std::int64_t>(gen_times.size());
  r.generated_bits = frame_bits * static_cast<double>(gen_times.size());

  struct QueuedFrame {
    std::int64_t id = 0;
    double gen_t = 0.0;
    double remaining_bits = 0.0;
  };
  std::deque<QueuedFrame> queue;
  std::size_t next_frame = 0;  // first frame not yet arrived at the queue
  std::vector<double> latencies;
  latencies.reserve(gen_times.size());

  GimbalState gimbal = sc.gimbal_init;
  std::optional<std::size_t> held_mcs;
  double active_s = 0.0;
  double detection_sum = 0.0;  // Monte Carlo counts over delivered frames

  const double dt = sc.channel_sample_dt_s;
  const std::int64_t n_steps = step_count(sc.duration_s, dt);
  r.steps.reserve(static_cast<std::size_t>(n_steps));

  for (std::int64_t k = 0; k < n_steps; ++k) {
    const double t0 = static_cast<double>(k) * dt;
    const double t1 = std::min(t0 + dt, sc.duration_s);
    const double step_len = t1 - t0;

    StepRecord rec;
    rec.t_s = t0;

    auto [pos, roll_target] = sc.trajectory.position_at(t0);
    rec.distance_m = (pos - sc.ap.position_m).norm();
    auto [az, el] = aim_angles(sc.ap, pos);
    rec.az_off_deg = az;
    rec.el_off_deg = el;
    rec.in_scan = in_scan(sc.ground_radio, az, el);
    rec.ang_rate_deg_s = angular_rate_deg_s(sc.trajectory, sc.ap, t0, step_len);
    const bool tracked = !(rec.ang_rate_deg_s > sc.max_tracking_rate_deg_s);

    GimbalStepResult g = gimbal_step(gimbal, roll_target, step_len);
    gimbal = g.state;
    rec.pol_mismatch_deg = g.residual_mismatch_deg;
    rec.extra_loss_db = polarization_loss_db(rec.pol_mismatch_deg);
    const bool blocked = link_blocked(rec.extra_loss_db);
    rec.snr_db = blocked ? -std::numeric_limits<double>::infinity()
                         : snr_db(sc.link, rec.distance_m, rec.extra_loss_db);

    double cap = 0.0;
    if (rec.in_scan && tracked && !blocked) {
      std::optional<std::size_t> sel =
          sc.mcs_table.select_pos_hysteresis(rec.snr_db, held_mcs, sc.mcs_hysteresis_db);
      held_mcs = sel;
      if (sel) {
        const McsEntry& e = sc.mcs_table.entries()[*sel];
        rec.mcs_index = e.index;
        cap = std::min(capacity_bps(&e, sc.ground_radio), capacity_bps(&e, sc.drone_radio));
      }
    } else {
      held_mcs.reset();
    }
    rec.capacity_bps = cap;

    // Advance the fluid queue over [t0, t1): drain between arrival events,
    // admit arrivals, and apply the drop policy. A head frame that cannot
    // finish by its deadline at the current rate is dropped before any more
    // capacity is spent on it.
    bool activity = false;
    double cursor = t0;
    const double inf = std::numeric_limits<double>::infinity();
    while (true) {
      const double next_arrival = next_frame < gen_times.size()
                                      ? gen_times[next_frame] + sc.codec.encode_latency_s
                                      : inf;
      const double boundary = std::min(t1, next_arrival);

      while (cursor < boundary && !queue.empty()) {
        QueuedFrame& head = queue.front();
        const double expiry = head.gen_t + sc.queue.frame_deadline_s - sc.codec.decode_latency_s;
        if (cap <= 0.0) {
          if (expiry <= boundary) {
            cursor = std::max(cursor, expiry);
            queue.pop_front();
            ++r.frames_dropped;
          } else {
            cursor = boundary;
          }
          continue;
        }
        const double finish = cursor + head.remaining_bits / cap;
        if (finish > expiry) {
          queue.pop_front();
          ++r.frames_dropped;
          continue;
        }
        if (finish <= boundary) {
          latencies.push_back(finish + sc.codec.decode_latency_s - head.gen_t);
          r.delivered_bits += frame_bits;
          ++r.frames_delivered;
          if (sc.detection && opt.detection_stat == RunOptions::DetectionStat::kMonteCarlo) {
            detection_sum += static_cast<double>(
                sampled_detections(sc.detection->calibration, sc.detection->scene,
                                   splitmix64(opt.seed ^ static_cast<std::uint64_t>(head.id))));
          }
          cursor = finish;
          queue.pop_front();
          activity = true;
        } else {
          head.remaining_bits -= cap * (boundary - cursor);
          cursor = boundary;
          activity = true;
        }
      }
      cursor = std::max(cursor, boundary);

      if (next_arrival >= t1) break;
      double occupancy = 0.0;
      for (const QueuedFrame& f : queue) occupancy += f.remaining_bits;
      if (occupancy + frame_bits > sc.queue.max_queue_bits) {
        ++r.frames_dropped;  // overflow: drop the newest (the arriving frame)
      } else {
        queue.push_back({static_cast<std::int64_t>(next_frame), gen_times[next_frame], frame_bits});
      }
      ++next_frame;
    }

    if (activity) active_s += step_len;
    rec.queue_bits = 0.0;
    for (const QueuedFrame& f : queue) rec.queue_bits += f.remaining_bits;
    rec.frames_delivered_cum = r.frames_delivered;
    rec.frames_dropped_cum = r.frames_dropped;
    r.steps.push_back(rec);
  }

  r.frames_pending_end = r.frames_generated - r.frames_delivered - r.frames_dropped;
  r.goodput_bps = r.delivered_bits / sc.duration_s;
  r.ground_active_s = active_s;

  if (!latencies.empty()) {
    double sum = 0.0;
    for (double v : latencies) sum += v;
    r.latency.mean_s = sum / static_cast<double>(latencies.size());
    std::vector<double> sorted = latencies;
    std::sort(sorted.begin(), sorted.end());
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(sorted.size())));
    r.latency.p95_s = sorted[std::max<std::size_t>(rank, 1) - 1];
    r.latency.max_s = sorted.back();
  }

  const EnergyBreakdown e = detail::compute_energy(active_s, sc);
  r.energy_ground_j = e.ground_j;
  r.energy_drone_j = e.drone_j;

  if (sc.detection) {
    if (opt.detection_stat == RunOptions::DetectionStat::kExpected) {
      r.detections_per_delivered_frame =
          expected_detections(sc.detection->calibration, sc.detection->scene);
    } else {
      r.detections_per_delivered_frame =
          r.frames_delivered > 0 ? detection_sum / static_cast<double>(r.frames_delivered) : 0.0;
    }
  }
  return r;
}

// Per-side energy breakdown for a finished run. The result must come from
// this scenario; step count and duration are cross-checked.
inline EnergyBreakdown energy_report(const SimulationResult& result, const Scenario& sc) {
  if (result.duration_s != sc.duration_s ||
      static_cast<std::int64_t>(result.steps.size()) !=
          (sc.duration_s == 0.0 ? 0 : step_count(sc.duration_s, sc.channel_sample_dt_s))) {
    throw validation_error("energy_report: result does not match scenario");
  }
  return detail::compute_energy(result.ground_active_s, sc);
}

struct DistancePoint {
  double gain_dbi = 0.0;
  double target_snr_db = 0.0;
  std::optional<double> max_distance_m;  // empty when the target is unreachable
};

// Max-distance curve over antenna gains and SNR targets; the same gain is
// applied at both ends. Unreachable points are flagged, not fatal.
inline std::vector<DistancePoint> sweep_max_distance(const LinkBudgetParams& base,
                                                     const std::vector<double>& gains_dbi,
                                                     const std::vector<double>& target_snrs_db) {
  std::vector<DistancePoint> out;
  out.reserve(gains_dbi.size() * target_snrs_db.size());
  for (double gain : gains_dbi) {
    LinkBudgetParams p = base;
    p.tx_gain_dbi = gain;
    p.rx_gain_dbi = gain;
    for (double snr : target_snrs_db) {
      DistancePoint pt;
      pt.gain_dbi = gain;
      pt.target_snr_db = snr;
      try {
        pt.max_distance_m = max_distance_m(p, snr);
      } catch (const unreachable_error&) {
        pt.max_distance_m = std::nullopt;
      }
      out.push_back(pt);
    }
  }
  return out;
}

}  // namespace dronecast
