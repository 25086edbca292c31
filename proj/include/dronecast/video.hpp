#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dronecast/error.hpp"

namespace dronecast {

struct VideoProfile {
  int width_px = 3840;
  int height_px = 2160;
  double fps = 7.5;
  double bits_per_pixel = 24.0;  // raw depth; 24 matches both 4K rate anchors

  void validate() const {
    if (width_px < 1) throw validation_error("VideoProfile.width_px must be >= 1");
    if (height_px < 1) throw validation_error("VideoProfile.height_px must be >= 1");
    if (!(fps >= 0)) throw validation_error("VideoProfile.fps must be >= 0");
    if (!(bits_per_pixel >= 1)) throw validation_error("VideoProfile.bits_per_pixel must be >= 1");
  }
};

enum class CodecMode { kUncompressed, kCompressed };

// Abstract codec: a single compression ratio plus its latency and power side
// effects. Uncompressed mode pins the ratio to 1 and all side effects to 0.
struct CodecModel {
  CodecMode mode = CodecMode::kUncompressed;
  double compression_ratio = 1.0;
  double encode_latency_s = 0.0;
  double decode_latency_s = 0.0;
  double encode_power_w = 0.0;
  double decode_power_w = 0.0;

  void validate() const {
    if (!(compression_ratio >= 1)) throw validation_error("CodecModel.compression_ratio must be >= 1");
    if (!(encode_latency_s >= 0)) throw validation_error("CodecModel.encode_latency_s must be >= 0");
    if (!(decode_latency_s >= 0)) throw validation_error("CodecModel.decode_latency_s must be >= 0");
    if (!(encode_power_w >= 0)) throw validation_error("CodecModel.encode_power_w must be >= 0");
    if (!(decode_power_w >= 0)) throw validation_error("CodecModel.decode_power_w must be >= 0");
    if (mode == CodecMode::kUncompressed) {
      if (compression_ratio != 1.0 || encode_latency_s != 0.0 || decode_latency_s != 0.0 ||
          encode_power_w != 0.0 || decode_power_w != 0.0) {
        throw validation_error(
            "CodecModel: uncompressed mode requires compression_ratio = 1 and zero "
            "latency/power fields");
      }
    }
  }
};

inline double pixel_bits(const VideoProfile& p) {
  return static_cast<double>(p.width_px) * static_cast<double>(p.height_px) * p.bits_per_pixel;
}

// width * height * fps * bits_per_pixel; ~12 Gbit/s for 4K/60 at 24 bpp.
inline double raw_bitrate_bps(const VideoProfile& p) {
  p.validate();
  return pixel_bits(p) * p.fps;
}

inline double frame_size_bits(const VideoProfile& p, const CodecModel& codec) {
  p.validate();
  codec.validate();
  return pixel_bits(p) / codec.compression_ratio;
}

// Frame generation instants k/fps on [0, duration), jitter-free. fps = 0
// yields an empty stream.
inline std::vector<double> frame_times_s(const VideoProfile& p, double duration_s) {
  p.validate();
  if (!(duration_s >= 0)) throw validation_error("frame_times_s: duration_s must be >= 0");
  std::vector<double> times;
  if (p.fps <= 0.0) return times;
  for (long k = 0;; ++k) {
    double t = static_cast<double>(k) / p.fps;
    if (!(t < duration_s)) break;
    times.push_back(t);
  }
  return times;
}

}  // namespace dronecast
