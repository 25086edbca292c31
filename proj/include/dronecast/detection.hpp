#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dronecast/error.hpp"
#include "dronecast/link_budget.hpp"
#include "dronecast/video.hpp"

namespace dronecast {

// Statistical stand-in for the face detector: maps apparent face size in
// pixels to a detection probability. Calibrated through anchor points and
// interpolated piecewise-linearly in log2(pixel width), clamped to [0, 1].
// No pixels are ever processed.

struct DetectionAnchor {
  double face_px = 0.0;
  double rate = 0.0;
};

struct DetectionCalibration {
  std::vector<DetectionAnchor> anchors;
  double min_face_px = 8.0;     // below this, detection probability is 0
  double quality_factor = 1.0;  // scales effective pixel width (<= 1); compression hook

  void validate() const {
    if (anchors.size() < 2) throw validation_error("DetectionCalibration: needs >= 2 anchors");
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      const DetectionAnchor& a = anchors[i];
      if (!(a.face_px > 0)) throw validation_error("DetectionCalibration: anchor face_px must be > 0");
      if (!(a.rate >= 0 && a.rate <= 1)) {
        throw validation_error("DetectionCalibration: anchor rate must be in [0, 1]");
      }
      if (i > 0) {
        if (!(a.face_px > anchors[i - 1].face_px)) {
          throw validation_error("DetectionCalibration: anchor face_px must be strictly increasing");
        }
        if (!(a.rate >= anchors[i - 1].rate)) {
          throw validation_error("DetectionCalibration: anchor rates must be nondecreasing");
        }
      }
    }
    if (!(min_face_px >= 0)) throw validation_error("DetectionCalibration.min_face_px must be >= 0");
    if (!(quality_factor > 0 && quality_factor <= 1)) {
      throw validation_error("DetectionCalibration.quality_factor must be in (0, 1]");
    }
  }
};

struct CameraModel {
  VideoProfile profile;
  double horizontal_fov_deg = 90.0;

  void validate() const {
    profile.validate();
    if (!(horizontal_fov_deg > 0 && horizontal_fov_deg < 180)) {
      throw validation_error("CameraModel.horizontal_fov_deg must be in (0, 180)");
    }
  }
};

struct Face {
  double width_m = 0.0;
  double distance_m = 0.0;
};

struct FaceScene {
  CameraModel camera;
  std::vector<Face> faces;

  void validate() const {
    camera.validate();
    for (const Face& f : faces) {
      if (!(f.width_m > 0)) throw validation_error("FaceScene: face width_m must be > 0");
      if (!(f.distance_m > 0)) throw validation_error("FaceScene: face distance_m must be > 0");
    }
  }
};

// Pinhole projection of a face onto the sensor: linear in sensor width,
// inverse in distance.
inline double face_pixel_width(const CameraModel& cam, double face_width_m, double distance_m) {
  cam.validate();
  if (!(face_width_m > 0)) throw validation_error("face_pixel_width: face_width_m must be > 0");
  if (!(distance_m > 0)) throw validation_error("face_pixel_width: distance_m must be > 0");
  double half_fov_rad = deg_to_rad(cam.horizontal_fov_deg) / 2.0;
  return static_cast<double>(cam.profile.width_px) * face_width_m /
         (2.0 * distance_m * std::tan(half_fov_rad));
}

inline double detection_prob(const DetectionCalibration& cal, double face_px) {
  cal.validate();
  if (!(face_px >= 0)) throw validation_error("detection_prob: face_px must be >= 0");
  double eff = face_px * cal.quality_factor;
  if (eff < cal.min_face_px || eff <= 0.0) return 0.0;

  double lx = std::log2(eff);
  const auto& a = cal.anchors;
  std::size_t seg = 0;  // segment [seg, seg+1]; end segments extrapolate
  while (seg + 2 < a.size() && lx > std::log2(a[seg + 1].face_px)) ++seg;
  double x0 = std::log2(a[seg].face_px);
  double x1 = std::log2(a[seg + 1].face_px);
  double p = a[seg].rate + (a[seg + 1].rate - a[seg].rate) * (lx - x0) / (x1 - x0);
  return std::clamp(p, 0.0, 1.0);
}

inline double expected_detections(const DetectionCalibration& cal, const FaceScene& scene) {
  scene.validate();
  double sum = 0.0;
  for (const Face& f : scene.faces) {
    sum += detection_prob(cal, face_pixel_width(scene.camera, f.width_m, f.distance_m));
  }
  return sum;
}

// Uniform double in [0, 1) from the top 53 bits of the generator output.
// Hand-rolled so draws are identical across standard libraries.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Monte Carlo counterpart of expected_detections: one Bernoulli trial per
// face, reproducible from the seed.
inline long sampled_detections(const DetectionCalibration& cal, const FaceScene& scene,
                               std::uint64_t seed) {
  scene.validate();
  std::mt19937_64 gen(seed);
  long count = 0;
  for (const Face& f : scene.faces) {
    double p = detection_prob(cal, face_pixel_width(scene.camera, f.width_m, f.distance_m));
    if (uniform01(gen) < p) ++count;
  }
  return count;
}

}  // namespace dronecast
