#include <catch2/catch_amalgamated.hpp>

#include <limits>
#include <random>
#include <sstream>

#include "dronecast/mcs.hpp"

using namespace dronecast;

#ifndef DRONECAST_SCENARIO_DIR
#error "DRONECAST_SCENARIO_DIR must point at the shipped scenario files"
#endif

namespace {

McsTable shipped_table() {
  return McsTable::load_file(std::string(DRONECAST_SCENARIO_DIR) + "/mcs_80211ad_sc.csv");
}

McsTable tiny_table() {
  return McsTable::from_entries({{1, "a", 6.0, 385e6},
                                 {2, "b", 7.0, 770e6},
                                 {12, "c", 21.0, 4620e6}});
}

// Reference selector: scan every entry, keep the best sustainable one.
std::optional<std::size_t> linear_scan(const McsTable& t, double snr) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < t.entries().size(); ++i) {
    if (snr >= t.entries()[i].min_snr_db) best = i;
  }
  return best;
}

}  // namespace

TEST_CASE("shipped ladder parses with the expected endpoints", "[mcs]") {
  McsTable t = shipped_table();
  REQUIRE(t.entries().size() == 11);
  CHECK(t.entries().front().index == 1);
  CHECK(t.entries().front().min_snr_db == 6.0);
  CHECK(t.entries().front().phy_rate_bps == 385e6);
  CHECK(t.entries().back().index == 12);
  CHECK(t.entries().back().min_snr_db == 21.0);
  CHECK(t.entries().back().phy_rate_bps == 4620e6);
  // spot-check a middle row with a fractional rate
  CHECK(t.entries()[7].index == 9);
  CHECK(t.entries()[7].phy_rate_bps == 2502.5e6);
}

TEST_CASE("selection uses closed thresholds", "[mcs]") {
  McsTable t = shipped_table();
  CHECK(t.select(5.999) == nullptr);
  REQUIRE(t.select(6.0) != nullptr);
  CHECK(t.select(6.0)->index == 1);
  REQUIRE(t.select(20.999) != nullptr);
  CHECK(t.select(20.999)->index == 11);
  CHECK(t.select(21.0)->index == 12);
  CHECK(t.select(23.444654258934435)->index == 12);
  CHECK(t.select(1e9)->index == 12);
  CHECK(t.select(-std::numeric_limits<double>::infinity()) == nullptr);
  CHECK(t.select(std::numeric_limits<double>::quiet_NaN()) == nullptr);
}

TEST_CASE("selection equals the linear-scan oracle on random tables", "[mcs]") {
  std::mt19937_64 gen(42);
  std::uniform_int_distribution<int> size_dist(1, 16);
  std::uniform_real_distribution<double> step(0.25, 4.0);
  std::uniform_real_distribution<double> snr_probe(-15.0, 45.0);
  for (int trial = 0; trial < 1000; ++trial) {
    int n = size_dist(gen);
    std::vector<McsEntry> entries;
    double snr = -10.0 + step(gen);
    double rate = 1e6 * step(gen);
    for (int i = 0; i < n; ++i) {
      entries.push_back({i, "m" + std::to_string(i), snr, rate});
      snr += step(gen);
      rate += 1e6 * step(gen);
    }
    McsTable t = McsTable::from_entries(entries);
    std::vector<double> probes;
    for (int probe = 0; probe < 40; ++probe) probes.push_back(snr_probe(gen));
    std::sort(probes.begin(), probes.end());
    std::optional<std::size_t> prev;
    for (double s : probes) {
      auto cur = t.select_pos(s);
      CHECK(cur == linear_scan(t, s));
      // monotonicity: a higher SNR never selects a lower entry
      if (prev) {
        REQUIRE(cur.has_value());
        CHECK(*cur >= *prev);
      }
      prev = cur;
    }
  }
}

TEST_CASE("selection is monotone along an SNR ramp", "[mcs]") {
  McsTable t = shipped_table();
  std::optional<std::size_t> prev;
  for (double s = -5.0; s <= 40.0; s += 0.01) {
    auto cur = t.select_pos(s);
    if (prev) {
      REQUIRE(cur.has_value());
      REQUIRE(*cur >= *prev);
    }
    prev = cur;
  }
}

TEST_CASE("hysteresis delays upgrades but never downgrades harder", "[mcs]") {
  McsTable t = tiny_table();
  // held on entry 0 at snr 7.4 with 1 dB margin: plain selection says 1,
  // but the upgrade needs 8.0
  auto held = t.select_pos(6.5);
  REQUIRE(held == std::optional<std::size_t>(0));
  CHECK(t.select_pos_hysteresis(7.4, held, 1.0) == held);
  CHECK(t.select_pos_hysteresis(8.0, held, 1.0) == std::optional<std::size_t>(1));
  // downgrades and link loss are immediate
  CHECK(t.select_pos_hysteresis(5.0, std::optional<std::size_t>(2), 1.0) == std::nullopt);
  CHECK(t.select_pos_hysteresis(6.2, std::optional<std::size_t>(2), 1.0) ==
        std::optional<std::size_t>(0));
  // zero margin reduces to plain selection
  CHECK(t.select_pos_hysteresis(7.4, held, 0.0) == std::optional<std::size_t>(1));
}

TEST_CASE("capacity clips the PHY rate at the device ceiling", "[mcs]") {
  McsTable t = shipped_table();
  RadioHardware lens{25.4, 13.5, 7.0, 1.5e9};
  RadioHardware fast{25.4, 13.5, 7.0, 10e9};
  CHECK(capacity_bps(t.select(23.4), lens) == 1.5e9);
  CHECK(capacity_bps(t.select(23.4), fast) == 4620e6);
  CHECK(capacity_bps(t.select(-100.0), lens) == 0.0);
}

TEST_CASE("table format errors are rejected with context", "[mcs]") {
  auto load_str = [](const std::string& s) {
    std::istringstream in(s);
    return McsTable::load(in, "test.csv");
  };
  CHECK_THROWS_AS(load_str(""), validation_error);
  CHECK_THROWS_AS(load_str("nope,nope\n"), validation_error);
  CHECK_THROWS_AS(load_str("index,label,min_snr_db,phy_rate_mbps\n1,a,6\n"), validation_error);
  CHECK_THROWS_AS(load_str("index,label,min_snr_db,phy_rate_mbps\n1,a,six,385\n"),
                  validation_error);
  CHECK_THROWS_WITH(load_str("index,label,min_snr_db,phy_rate_mbps\n1,a,6,385\n2,b,5,770\n"),
                    Catch::Matchers::ContainsSubstring("ascending"));
  // a slower rate at a higher threshold is a dominated entry
  CHECK_THROWS_AS(load_str("index,label,min_snr_db,phy_rate_mbps\n1,a,6,770\n2,b,7,385\n"),
                  validation_error);
  CHECK_THROWS_AS(load_str("index,label,min_snr_db,phy_rate_mbps\n1,a,6,385\n1,b,7,770\n"),
                  validation_error);
  CHECK_THROWS_AS(McsTable::load_file("/nonexistent/mcs.csv"), io_error);
}

TEST_CASE("header tolerates spacing and comments", "[mcs]") {
  std::istringstream in(
      "# ladder\n"
      "\n"
      "Index, Label, Min_SNR_dB, PHY_Rate_Mbps\n"
      "1, first ,6,385\n");
  McsTable t = McsTable::load(in, "spaced.csv");
  REQUIRE(t.entries().size() == 1);
  CHECK(t.entries()[0].label == "first");
}
