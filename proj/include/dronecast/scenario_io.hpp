#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dronecast/engine.hpp"
#include "dronecast/error.hpp"

namespace dronecast {

namespace detail {

using njson = nlohmann::ordered_json;

inline njson parse_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open file: " + path);
  try {
    return njson::parse(f, nullptr, true, /*ignore_comments=*/true);
  } catch (const njson::parse_error& e) {
    throw validation_error(path + ": " + e.what());
  }
}

inline const njson& as_object(const njson& v, const std::string& where) {
  if (!v.is_object()) throw validation_error(where + ": expected an object");
  return v;
}

inline const njson& as_array(const njson& v, const std::string& where) {
  if (!v.is_array()) throw validation_error(where + ": expected an array");
  return v;
}

inline void reject_unknown_keys(const njson& obj, const std::string& where,
                                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* a : allowed) {
      if (it.key() == a) {
        known = true;
        break;
      }
    }
    if (!known) throw validation_error(where + ": unknown key '" + it.key() + "'");
  }
}

inline const njson& member(const njson& obj, const std::string& where, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw validation_error(where + ": missing required key '" + key + "'");
  return *it;
}

inline double as_number(const njson& v, const std::string& where) {
  if (!v.is_number()) throw validation_error(where + ": expected a number");
  return v.get<double>();
}

inline double num(const njson& obj, const std::string& where, const char* key) {
  return as_number(member(obj, where, key), where + "." + key);
}

inline double num_or(const njson& obj, const std::string& where, const char* key, double fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, where + "." + key);
}

inline int int_field(const njson& obj, const std::string& where, const char* key) {
  const njson& v = member(obj, where, key);
  if (!v.is_number_integer()) throw validation_error(where + "." + key + ": expected an integer");
  return v.get<int>();
}

inline std::string str_field(const njson& obj, const std::string& where, const char* key) {
  const njson& v = member(obj, where, key);
  if (!v.is_string()) throw validation_error(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline std::string str_or(const njson& obj, const std::string& where, const char* key,
                          const std::string& fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) throw validation_error(where + "." + key + ": expected a string");
  return it->get<std::string>();
}

inline Vec3 vec3_field(const njson& obj, const std::string& where, const char* key) {
  const njson& v = as_array(member(obj, where, key), where + "." + key);
  if (v.size() != 3) throw validation_error(where + "." + key + ": expected 3 numbers");
  return {as_number(v[0], where + "." + key), as_number(v[1], where + "." + key),
          as_number(v[2], where + "." + key)};
}

inline VideoProfile parse_video_profile(const njson& obj, const std::string& where,
                                        bool fps_required) {
  reject_unknown_keys(obj, where, {"width_px", "height_px", "fps", "bits_per_pixel"});
  VideoProfile p;
  p.width_px = int_field(obj, where, "width_px");
  p.height_px = int_field(obj, where, "height_px");
  p.fps = fps_required ? num(obj, where, "fps") : num_or(obj, where, "fps", 0.0);
  p.bits_per_pixel = num_or(obj, where, "bits_per_pixel", 24.0);
  return p;
}

inline RadioHardware parse_radio(const njson& obj, const std::string& where) {
  reject_unknown_keys(obj, where,
                      {"antenna_gain_dbi", "scan_az_deg", "scan_el_deg", "max_throughput_bps"});
  RadioHardware hw;
  hw.antenna_gain_dbi = num(obj, where, "antenna_gain_dbi");
  hw.scan_az_deg = num(obj, where, "scan_az_deg");
  hw.scan_el_deg = num(obj, where, "scan_el_deg");
  hw.max_throughput_bps = num(obj, where, "max_throughput_bps");
  return hw;
}

inline DetectionCalibration parse_calibration(const njson& obj, const std::string& where) {
  reject_unknown_keys(obj, where, {"anchors", "min_face_px", "quality_factor"});
  DetectionCalibration cal;
  const njson& anchors = as_array(member(obj, where, "anchors"), where + ".anchors");
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    std::string awhere = where + ".anchors[" + std::to_string(i) + "]";
    const njson& a = as_object(anchors[i], awhere);
    reject_unknown_keys(a, awhere, {"face_px", "rate"});
    cal.anchors.push_back({num(a, awhere, "face_px"), num(a, awhere, "rate")});
  }
  cal.min_face_px = num_or(obj, where, "min_face_px", 8.0);
  cal.quality_factor = num_or(obj, where, "quality_factor", 1.0);
  return cal;
}

inline std::vector<Face> parse_faces(const njson& arr, const std::string& where) {
  std::vector<Face> faces;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    std::string fwhere = where + "[" + std::to_string(i) + "]";
    const njson& f = as_object(arr[i], fwhere);
    reject_unknown_keys(f, fwhere, {"width_m", "distance_m", "count"});
    Face face{num(f, fwhere, "width_m"), num(f, fwhere, "distance_m")};
    double count = num_or(f, fwhere, "count", 1.0);
    if (!(count >= 1) || count != std::floor(count)) {
      throw validation_error(fwhere + ".count: expected a positive integer");
    }
    for (long k = 0; k < static_cast<long>(count); ++k) faces.push_back(face);
  }
  return faces;
}

}  // namespace detail

// Parses and fully validates a scenario document. Unknown keys anywhere are
// an error; defaults are applied only where the format declares one. The MCS
// table file is resolved relative to the scenario file unless overridden.
inline Scenario parse_scenario(const std::string& path,
                               const std::optional<std::string>& mcs_table_override = {}) {
  namespace d = detail;
  namespace fs = std::filesystem;
  const d::njson root = d::parse_json_file(path);
  d::as_object(root, path);
  d::reject_unknown_keys(root, path,
                         {"link", "ground_radio", "drone_radio", "mcs", "ap", "trajectory",
                          "gimbal", "video", "codec", "power", "detection", "sim"});

  Scenario sc;

  {
    const d::njson& link = d::as_object(d::member(root, path, "link"), "link");
    d::reject_unknown_keys(link, "link",
                           {"carrier_freq_hz", "bandwidth_hz", "tx_power_dbm",
                            "noise_density_dbm_per_hz", "noise_figure_db", "misc_loss_db"});
    sc.link.carrier_freq_hz = d::num(link, "link", "carrier_freq_hz");
    sc.link.bandwidth_hz = d::num(link, "link", "bandwidth_hz");
    sc.link.tx_power_dbm = d::num(link, "link", "tx_power_dbm");
    sc.link.noise_density_dbm_per_hz = d::num(link, "link", "noise_density_dbm_per_hz");
    sc.link.noise_figure_db = d::num(link, "link", "noise_figure_db");
    sc.link.misc_loss_db = d::num_or(link, "link", "misc_loss_db", 0.0);
  }

  sc.ground_radio = d::parse_radio(d::as_object(d::member(root, path, "ground_radio"), "ground_radio"),
                                   "ground_radio");
  sc.drone_radio = d::parse_radio(d::as_object(d::member(root, path, "drone_radio"), "drone_radio"),
                                  "drone_radio");
  // uplink: the drone transmits, the ground AP receives
  sc.link.tx_gain_dbi = sc.drone_radio.antenna_gain_dbi;
  sc.link.rx_gain_dbi = sc.ground_radio.antenna_gain_dbi;

  {
    const d::njson& mcs = d::as_object(d::member(root, path, "mcs"), "mcs");
    d::reject_unknown_keys(mcs, "mcs", {"table_file", "hysteresis_db"});
    std::string table_file = d::str_field(mcs, "mcs", "table_file");
    fs::path table_path = mcs_table_override ? fs::path(*mcs_table_override)
                                             : fs::path(table_file);
    if (!mcs_table_override && table_path.is_relative()) {
      table_path = fs::path(path).parent_path() / table_path;
    }
    sc.mcs_table = McsTable::load_file(table_path.string());
    sc.mcs_hysteresis_db = d::num_or(mcs, "mcs", "hysteresis_db", 0.0);
  }

  if (auto it = root.find("ap"); it != root.end()) {
    const d::njson& ap = d::as_object(*it, "ap");
    d::reject_unknown_keys(ap, "ap", {"position_m", "boresight"});
    if (ap.contains("position_m")) sc.ap.position_m = d::vec3_field(ap, "ap", "position_m");
    if (ap.contains("boresight")) sc.ap.boresight = d::vec3_field(ap, "ap", "boresight");
  }

  {
    const d::njson& traj = d::as_object(d::member(root, path, "trajectory"), "trajectory");
    d::reject_unknown_keys(traj, "trajectory", {"waypoints"});
    const d::njson& wps = d::as_array(d::member(traj, "trajectory", "waypoints"),
                                      "trajectory.waypoints");
    for (std::size_t i = 0; i < wps.size(); ++i) {
      std::string wwhere = "trajectory.waypoints[" + std::to_string(i) + "]";
      const d::njson& w = d::as_object(wps[i], wwhere);
      d::reject_unknown_keys(w, wwhere, {"t_s", "position_m", "roll_deg"});
      Waypoint wp;
      wp.t_s = d::num(w, wwhere, "t_s");
      wp.position_m = d::vec3_field(w, wwhere, "position_m");
      wp.roll_deg = d::num_or(w, wwhere, "roll_deg", 0.0);
      sc.trajectory.waypoints.push_back(wp);
    }
  }

  if (auto it = root.find("gimbal"); it != root.end()) {
    const d::njson& gim = d::as_object(*it, "gimbal");
    d::reject_unknown_keys(gim, "gimbal", {"roll_deg", "rate_limit_deg_s"});
    sc.gimbal_init.roll_deg = d::num_or(gim, "gimbal", "roll_deg", 0.0);
    sc.gimbal_init.rate_limit_deg_s = d::num_or(gim, "gimbal", "rate_limit_deg_s", 90.0);
  }

  sc.video = d::parse_video_profile(d::as_object(d::member(root, path, "video"), "video"), "video",
                                    /*fps_required=*/true);

  if (auto it = root.find("codec"); it != root.end()) {
    const d::njson& codec = d::as_object(*it, "codec");
    d::reject_unknown_keys(codec, "codec",
                           {"mode", "compression_ratio", "encode_latency_s", "decode_latency_s",
                            "encode_power_w", "decode_power_w"});
    std::string mode = d::str_or(codec, "codec", "mode", "uncompressed");
    if (mode == "uncompressed") {
      sc.codec.mode = CodecMode::kUncompressed;
    } else if (mode == "compressed") {
      sc.codec.mode = CodecMode::kCompressed;
    } else {
      throw validation_error("codec.mode: expected 'uncompressed' or 'compressed'");
    }
    sc.codec.compression_ratio = d::num_or(codec, "codec", "compression_ratio", 1.0);
    sc.codec.encode_latency_s = d::num_or(codec, "codec", "encode_latency_s", 0.0);
    sc.codec.decode_latency_s = d::num_or(codec, "codec", "decode_latency_s", 0.0);
    sc.codec.encode_power_w = d::num_or(codec, "codec", "encode_power_w", 0.0);
    sc.codec.decode_power_w = d::num_or(codec, "codec", "decode_power_w", 0.0);
  }

  {
    const d::njson& power = d::as_object(d::member(root, path, "power"), "power");
    d::reject_unknown_keys(power, "power",
                           {"rx_idle_w", "rx_active_w", "drone_base_w", "drone_radio_w",
                            "drone_ai_w"});
    sc.power.rx_idle_w = d::num(power, "power", "rx_idle_w");
    sc.power.rx_active_w = d::num(power, "power", "rx_active_w");
    sc.power.drone_base_w = d::num_or(power, "power", "drone_base_w", 0.0);
    sc.power.drone_radio_w = d::num_or(power, "power", "drone_radio_w", 0.0);
    sc.power.drone_ai_w = d::num_or(power, "power", "drone_ai_w", 0.0);
  }

  if (auto it = root.find("detection"); it != root.end()) {
    const d::njson& det = d::as_object(*it, "detection");
    d::reject_unknown_keys(det, "detection", {"calibration", "scene"});
    DetectionConfig cfg;
    cfg.calibration = d::parse_calibration(
        d::as_object(d::member(det, "detection", "calibration"), "detection.calibration"),
        "detection.calibration");
    const d::njson& scene = d::as_object(d::member(det, "detection", "scene"), "detection.scene");
    d::reject_unknown_keys(scene, "detection.scene", {"camera", "faces"});
    const d::njson& cam = d::as_object(d::member(scene, "detection.scene", "camera"),
                                       "detection.scene.camera");
    d::reject_unknown_keys(cam, "detection.scene.camera",
                           {"width_px", "height_px", "fps", "bits_per_pixel",
                            "horizontal_fov_deg"});
    cfg.scene.camera.profile.width_px = d::int_field(cam, "detection.scene.camera", "width_px");
    cfg.scene.camera.profile.height_px = d::int_field(cam, "detection.scene.camera", "height_px");
    cfg.scene.camera.profile.fps = d::num_or(cam, "detection.scene.camera", "fps", 0.0);
    cfg.scene.camera.profile.bits_per_pixel =
        d::num_or(cam, "detection.scene.camera", "bits_per_pixel", 24.0);
    cfg.scene.camera.horizontal_fov_deg = d::num(cam, "detection.scene.camera",
                                                 "horizontal_fov_deg");
    cfg.scene.faces = d::parse_faces(
        d::as_array(d::member(scene, "detection.scene", "faces"), "detection.scene.faces"),
        "detection.scene.faces");
    sc.detection = std::move(cfg);
  }

  {
    const d::njson& sim = d::as_object(d::member(root, path, "sim"), "sim");
    d::reject_unknown_keys(sim, "sim",
                           {"duration_s", "channel_sample_dt_s", "max_queue_bits",
                            "frame_deadline_s", "placement", "max_tracking_rate_deg_s"});
    sc.duration_s = d::num(sim, "sim", "duration_s");
    sc.channel_sample_dt_s = d::num_or(sim, "sim", "channel_sample_dt_s", 0.01);
    sc.queue.max_queue_bits =
        d::num_or(sim, "sim", "max_queue_bits", std::numeric_limits<double>::infinity());
    sc.queue.frame_deadline_s = d::num_or(sim, "sim", "frame_deadline_s", 1.0);
    std::string placement = d::str_or(sim, "sim", "placement", "edge");
    if (placement == "edge") {
      sc.placement = ComputePlacement::kEdge;
    } else if (placement == "onboard") {
      sc.placement = ComputePlacement::kOnboard;
    } else {
      throw validation_error("sim.placement: expected 'edge' or 'onboard'");
    }
    sc.max_tracking_rate_deg_s = d::num_or(sim, "sim", "max_tracking_rate_deg_s",
                                           std::numeric_limits<double>::infinity());
  }

  sc.validate();
  return sc;
}

// Standalone detection-comparison scene: one face set viewed through several
// camera profiles.
struct LabeledCamera {
  std::string label;
  CameraModel camera;
};

struct DetectionCompareScene {
  DetectionCalibration calibration;
  std::vector<LabeledCamera> cameras;
  std::vector<Face> faces;
};

inline DetectionCompareScene load_detection_scene(const std::string& path) {
  namespace d = detail;
  const d::njson root = d::parse_json_file(path);
  d::as_object(root, path);
  d::reject_unknown_keys(root, path, {"calibration", "cameras", "faces"});

  DetectionCompareScene scene;
  scene.calibration = d::parse_calibration(
      d::as_object(d::member(root, path, "calibration"), "calibration"), "calibration");
  scene.calibration.validate();

  const d::njson& cams = d::as_array(d::member(root, path, "cameras"), "cameras");
  for (std::size_t i = 0; i < cams.size(); ++i) {
    std::string cwhere = "cameras[" + std::to_string(i) + "]";
    const d::njson& c = d::as_object(cams[i], cwhere);
    d::reject_unknown_keys(c, cwhere,
                           {"label", "width_px", "height_px", "horizontal_fov_deg",
                            "bits_per_pixel"});
    LabeledCamera cam;
    cam.label = d::str_field(c, cwhere, "label");
    cam.camera.profile.width_px = d::int_field(c, cwhere, "width_px");
    cam.camera.profile.height_px = d::int_field(c, cwhere, "height_px");
    cam.camera.profile.fps = 0.0;
    cam.camera.horizontal_fov_deg = d::num(c, cwhere, "horizontal_fov_deg");
    cam.camera.validate();
    scene.cameras.push_back(std::move(cam));
  }
  if (scene.cameras.size() < 2) {
    throw validation_error(path + ": cameras: a comparison needs at least two camera profiles");
  }

  scene.faces = d::parse_faces(d::as_array(d::member(root, path, "faces"), "faces"), "faces");
  for (const Face& f : scene.faces) {
    if (!(f.width_m > 0)) throw validation_error("faces: width_m must be > 0");
    if (!(f.distance_m > 0)) throw validation_error("faces: distance_m must be > 0");
  }
  return scene;
}

// ---- output formatting ----
// All floats in reports are written with 6 significant digits so reruns and
// golden files compare byte-for-byte.

inline std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline double round6(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format_g6(v).c_str(), nullptr);
}

inline void write_steps_csv(std::ostream& out, const std::vector<StepRecord>& steps) {
  out << "t_s,distance_m,az_off_deg,el_off_deg,in_scan,ang_rate_deg_s,pol_mismatch_deg,"
         "extra_loss_db,snr_db,mcs_index,capacity_bps,queue_bits,frames_delivered_cum,"
         "frames_dropped_cum\n";
  for (const StepRecord& s : steps) {
    out << format_g6(s.t_s) << ',' << format_g6(s.distance_m) << ',' << format_g6(s.az_off_deg)
        << ',' << format_g6(s.el_off_deg) << ',' << (s.in_scan ? 1 : 0) << ','
        << format_g6(s.ang_rate_deg_s) << ',' << format_g6(s.pol_mismatch_deg) << ','
        << format_g6(s.extra_loss_db) << ',' << format_g6(s.snr_db) << ',';
    if (s.mcs_index) out << *s.mcs_index;
    out << ',' << format_g6(s.capacity_bps) << ',' << format_g6(s.queue_bits) << ','
        << s.frames_delivered_cum << ',' << s.frames_dropped_cum << '\n';
  }
}

inline void write_summary_json(std::ostream& out, const SimulationResult& r,
                               const EnergyBreakdown& energy, const std::string& steps_file) {
  detail::njson j;
  j["frames"] = {{"generated", r.frames_generated},
                 {"delivered", r.frames_delivered},
                 {"dropped", r.frames_dropped},
                 {"pending_at_end", r.frames_pending_end}};
  j["goodput_bps"] = round6(r.goodput_bps);
  j["latency_s"] = {{"mean", round6(r.latency.mean_s)},
                    {"p95", round6(r.latency.p95_s)},
                    {"max", round6(r.latency.max_s)}};
  j["energy_j"] = {{"ground", round6(energy.ground_j)},
                   {"ground_idle_baseline", round6(energy.ground_idle_baseline_j)},
                   {"drone", round6(energy.drone_j)}};
  j["ground_active_s"] = round6(energy.ground_active_s);
  if (r.detections_per_delivered_frame) {
    j["detections_per_delivered_frame"] = round6(*r.detections_per_delivered_frame);
  }
  j["steps_file"] = steps_file;
  out << j.dump(2) << '\n';
}

inline void write_distance_curve_csv(std::ostream& out, const std::vector<DistancePoint>& points) {
  out << "gain_dbi,snr_db,max_distance_m\n";
  for (const DistancePoint& p : points) {
    out << format_g6(p.gain_dbi) << ',' << format_g6(p.target_snr_db) << ',';
    if (p.max_distance_m) {
      out << format_g6(*p.max_distance_m);
    } else {
      out << "unreachable";
    }
    out << '\n';
  }
}

struct DetectionCompareRow {
  std::string label;
  int width_px = 0;
  double expected = 0.0;
  double ratio = 0.0;  // relative to the first row
  std::optional<long> sampled;
};

inline void write_detection_compare_csv(std::ostream& out,
                                        const std::vector<DetectionCompareRow>& rows) {
  bool any_sampled = false;
  for (const DetectionCompareRow& r : rows) any_sampled = any_sampled || r.sampled.has_value();
  out << "label,width_px,expected_detections,ratio";
  if (any_sampled) out << ",sampled_detections";
  out << '\n';
  for (const DetectionCompareRow& r : rows) {
    out << r.label << ',' << r.width_px << ',' << format_g6(r.expected) << ','
        << format_g6(r.ratio);
    if (any_sampled) {
      out << ',';
      if (r.sampled) out << *r.sampled;
    }
    out << '\n';
  }
}

// Writes via a temp file in the target directory plus an atomic rename, so a
// failed run never leaves a partial report behind.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot write file: " + tmp.string());
    f << content;
    f.flush();
    if (!f) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw io_error("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw io_error("cannot move " + tmp.string() + " to " + path.string());
  }
}

}  // namespace dronecast
