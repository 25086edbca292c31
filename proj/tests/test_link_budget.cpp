#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dronecast/link_budget.hpp"

using namespace dronecast;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
LinkBudgetParams table2_params(double gain_dbi) {
  LinkBudgetParams p;  // 60 GHz / 2.16 GHz / 10 dBm / -174 dBm/Hz / NF 10
  p.tx_gain_dbi = gain_dbi;
  p.rx_gain_dbi = gain_dbi;
  return p;
}
}  // namespace

TEST_CASE("wavelength at 60 GHz", "[link_budget]") {
  CHECK_THAT(wavelength_m(60e9), WithinRel(0.004996540966666667, 1e-12));
}

TEST_CASE("free-space path loss reference points", "[link_budget]") {
  CHECK_THAT(fspl_db(1.0, 60e9), WithinAbs(68.01080822955625, 1e-9));
  CHECK_THAT(fspl_db(100.0, 60e9), WithinAbs(108.01080822955625, 1e-9));
  CHECK_THAT(fspl_db(132.6, 60e9), WithinAbs(110.46167871093134, 1e-9));
}

TEST_CASE("path loss grows 6.0206 dB per distance doubling", "[link_budget]") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> dist(0.1, 1e4);
  for (int i = 0; i < 200; ++i) {
    double d = dist(gen);
    CHECK_THAT(fspl_db(2 * d, 60e9) - fspl_db(d, 60e9), WithinAbs(6.0205999132796, 1e-9));
  }
}

TEST_CASE("path loss rejects non-positive distance", "[link_budget]") {
  CHECK_THROWS_AS(fspl_db(0.0, 60e9), validation_error);
  CHECK_THROWS_AS(fspl_db(-5.0, 60e9), validation_error);
}

TEST_CASE("noise power over 2.16 GHz with NF 10", "[link_budget]") {
  CHECK_THAT(noise_power_dbm(LinkBudgetParams{}), WithinAbs(-70.65546248849068, 1e-9));
}

TEST_CASE("SNR at the measured operating points", "[link_budget]") {
  CHECK_THAT(snr_db(table2_params(25.4), 100.0), WithinAbs(23.444654258934435, 1e-9));
  CHECK_THAT(snr_db(table2_params(25.4), 132.6), WithinAbs(20.993783777559344, 1e-9));
  CHECK_THAT(snr_db(table2_params(17.5), 21.6), WithinAbs(20.95557923591582, 1e-9));
}

TEST_CASE("extra loss subtracts straight from SNR", "[link_budget]") {
  LinkBudgetParams p = table2_params(25.4);
  CHECK_THAT(snr_db(p, 100.0, 3.5), WithinAbs(snr_db(p, 100.0) - 3.5, 1e-12));
  CHECK(snr_db(p, 100.0, kBlockedLossDb) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("max distance anchors at 21 dB", "[link_budget]") {
  double d_array = max_distance_m(table2_params(17.5), 21.0);
  double d_lens = max_distance_m(table2_params(25.4), 21.0);
  CHECK_THAT(d_array, WithinAbs(21.48981678941318, 1e-9));
  CHECK_THAT(d_lens, WithinAbs(132.50513623271132, 1e-9));
  // both within 2% of the measured 21.6 m / 132.6 m
  CHECK_THAT(d_array, WithinRel(21.6, 0.02));
  CHECK_THAT(d_lens, WithinRel(132.6, 0.02));
}

TEST_CASE("max distance / SNR round trip", "[link_budget]") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> gain(-5.0, 40.0);
  std::uniform_real_distribution<double> target(-20.0, 60.0);
  std::uniform_real_distribution<double> freq(1e9, 100e9);
  for (int i = 0; i < 500; ++i) {
    LinkBudgetParams p;
    p.carrier_freq_hz = freq(gen);
    p.tx_gain_dbi = gain(gen);
    p.rx_gain_dbi = gain(gen);
    double t = target(gen);
    double d = max_distance_m(p, t);
    REQUIRE(d > 0);
    CHECK_THAT(snr_db(p, d), WithinAbs(t, 1e-9));
  }
}

TEST_CASE("absurd SNR targets are reported unreachable", "[link_budget]") {
  CHECK_THROWS_AS(max_distance_m(table2_params(25.4), 1e9), unreachable_error);
}

TEST_CASE("polarization mismatch loss", "[link_budget]") {
  CHECK_THAT(polarization_loss_db(0.0), WithinAbs(0.0, 1e-12));
  CHECK_THAT(polarization_loss_db(30.0), WithinAbs(1.2493873660829988, 1e-9));
  CHECK_THAT(polarization_loss_db(60.0), WithinAbs(6.0205999132796215, 1e-9));
  CHECK(link_blocked(polarization_loss_db(90.0)));
  CHECK_FALSE(link_blocked(polarization_loss_db(89.9)));
  CHECK_THROWS_AS(polarization_loss_db(-1.0), validation_error);
  CHECK_THROWS_AS(polarization_loss_db(90.1), validation_error);
}

TEST_CASE("parameter validation rejects bad values", "[link_budget]") {
  LinkBudgetParams p;
  p.bandwidth_hz = 0;
  CHECK_THROWS_AS(p.validate(), validation_error);
  p = LinkBudgetParams{};
  p.tx_power_dbm = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(p.validate(), validation_error);
  p = LinkBudgetParams{};
  p.carrier_freq_hz = -60e9;
  CHECK_THROWS_AS(p.validate(), validation_error);
}
