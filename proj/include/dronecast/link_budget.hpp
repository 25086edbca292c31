#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "dronecast/error.hpp"

namespace dronecast {

inline constexpr double kSpeedOfLightMps = 299'792'458.0;
inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Radio parameters of one link. Gains are per antenna and the budget applies
// both of them; wavelength is always derived from the carrier frequency.
struct LinkBudgetParams {
  double carrier_freq_hz = 60e9;
  double bandwidth_hz = 2.16e9;
  double tx_power_dbm = 10.0;
  double tx_gain_dbi = 0.0;
  double rx_gain_dbi = 0.0;
  double noise_density_dbm_per_hz = -174.0;
  double noise_figure_db = 10.0;
  double misc_loss_db = 0.0;

  void validate() const {
    if (!std::isfinite(carrier_freq_hz) || !(carrier_freq_hz > 0))
      throw validation_error("LinkBudgetParams.carrier_freq_hz must be > 0");
    if (!std::isfinite(bandwidth_hz) || !(bandwidth_hz > 0))
      throw validation_error("LinkBudgetParams.bandwidth_hz must be > 0");
    if (!(misc_loss_db >= 0)) throw validation_error("LinkBudgetParams.misc_loss_db must be >= 0");
    for (double v : {tx_power_dbm, tx_gain_dbi, rx_gain_dbi, noise_density_dbm_per_hz,
                     noise_figure_db, misc_loss_db}) {
      if (!std::isfinite(v)) throw validation_error("LinkBudgetParams: dB fields must be finite");
    }
  }
};

inline double wavelength_m(double carrier_freq_hz) {
  return kSpeedOfLightMps / carrier_freq_hz;
}

// Free-space path loss 20*log10(4*pi*d/lambda).
inline double fspl_db(double distance_m, double carrier_freq_hz) {
  if (!(distance_m > 0)) throw validation_error("fspl_db: distance_m must be > 0");
  if (!(carrier_freq_hz > 0)) throw validation_error("fspl_db: carrier_freq_hz must be > 0");
  return 20.0 * std::log10(4.0 * kPi * distance_m / wavelength_m(carrier_freq_hz));
}

// Thermal noise power over the full bandwidth, including the receiver
// noise figure.
inline double noise_power_dbm(const LinkBudgetParams& p) {
  p.validate();
  return p.noise_density_dbm_per_hz + 10.0 * std::log10(p.bandwidth_hz) + p.noise_figure_db;
}

// SNR at the receiver. extra_loss_db carries time-varying losses such as
// polarization mismatch; +inf there means the link is blocked (SNR -inf).
inline double snr_db(const LinkBudgetParams& p, double distance_m, double extra_loss_db = 0.0) {
  if (!(extra_loss_db >= 0)) throw validation_error("snr_db: extra_loss_db must be >= 0");
  return p.tx_power_dbm + p.tx_gain_dbi + p.rx_gain_dbi - fspl_db(distance_m, p.carrier_freq_hz) -
         p.misc_loss_db - extra_loss_db - noise_power_dbm(p);
}

// Closed-form inverse of snr_db in distance: the d with snr_db(p, d, 0) equal
// to the target. FSPL is analytically invertible so no root finding is used.
inline double max_distance_m(const LinkBudgetParams& p, double target_snr_db) {
  p.validate();
  const double margin_db = p.tx_power_dbm + p.tx_gain_dbi + p.rx_gain_dbi - p.misc_loss_db -
                           noise_power_dbm(p) - target_snr_db;
  const double d = wavelength_m(p.carrier_freq_hz) / (4.0 * kPi) * std::pow(10.0, margin_db / 20.0);
  if (!std::isfinite(d) || !(d > 0)) {
    throw unreachable_error("max_distance_m: target SNR " + std::to_string(target_snr_db) +
                            " dB is unreachable at any positive distance");
  }
  return d;
}

// Loss value that marks an orthogonal-polarization (blocked) link.
inline constexpr double kBlockedLossDb = std::numeric_limits<double>::infinity();

inline bool link_blocked(double loss_db) { return std::isinf(loss_db) && loss_db > 0; }

// Linear-polarization mismatch loss, -20*log10(cos(mismatch)). The caller
// folds symmetry first: the argument must already be in [0, 90] degrees.
// Exactly 90 degrees returns kBlockedLossDb.
inline double polarization_loss_db(double mismatch_deg) {
  if (!(mismatch_deg >= 0.0 && mismatch_deg <= 90.0)) {
    throw validation_error("polarization_loss_db: mismatch_deg must be in [0, 90]");
  }
  if (mismatch_deg == 90.0) return kBlockedLossDb;
  if (mismatch_deg == 0.0) return 0.0;
  return -20.0 * std::log10(std::cos(deg_to_rad(mismatch_deg)));
}

}  // namespace dronecast
