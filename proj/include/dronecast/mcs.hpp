#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dronecast/error.hpp"

namespace dronecast {

// One PHY operating point. min_snr_db is the negated EVM requirement of the
// MCS, used as the minimum SNR at which the MCS is sustainable.
struct McsEntry {
  int index = 0;
  std::string label;
  double min_snr_db = 0.0;
  double phy_rate_bps = 0.0;
};

// One end of the radio link: a beamforming antenna plus the device's
// throughput ceiling.
struct RadioHardware {
  double antenna_gain_dbi = 0.0;
  double scan_az_deg = 0.0;  // half-width of the horizontal scan range
  double scan_el_deg = 0.0;  // half-width of the vertical scan range
  double max_throughput_bps = 0.0;

  void validate() const {
    if (!(scan_az_deg > 0)) throw validation_error("RadioHardware.scan_az_deg must be > 0");
    if (!(scan_el_deg > 0)) throw validation_error("RadioHardware.scan_el_deg must be > 0");
    if (!(max_throughput_bps > 0)) throw validation_error("RadioHardware.max_throughput_bps must be > 0");
  }
};

// Ordered MCS ladder. Entries must be strictly ascending in both min_snr_db
// and phy_rate_bps (a Pareto frontier: a higher threshold must buy a higher
// rate), with unique indices. Immutable after construction.
class McsTable {
public:
  static McsTable from_entries(std::vector<McsEntry> entries) {
    if (entries.empty()) throw validation_error("McsTable: table has no entries");
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const McsEntry& e = entries[i];
      if (!(e.phy_rate_bps > 0)) {
        throw validation_error("McsTable: MCS " + std::to_string(e.index) + " has non-positive rate");
      }
      if (!std::isfinite(e.min_snr_db)) {
        throw validation_error("McsTable: MCS " + std::to_string(e.index) + " has non-finite min_snr_db");
      }
      if (i > 0) {
        if (!(e.min_snr_db > entries[i - 1].min_snr_db)) {
          throw validation_error("McsTable: min_snr_db not strictly ascending at MCS " +
                                 std::to_string(e.index));
        }
        if (!(e.phy_rate_bps > entries[i - 1].phy_rate_bps)) {
          throw validation_error("McsTable: phy_rate_bps not strictly ascending at MCS " +
                                 std::to_string(e.index));
        }
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (entries[j].index == e.index) {
          throw validation_error("McsTable: duplicate MCS index " + std::to_string(e.index));
        }
      }
    }
    McsTable t;
    t.entries_ = std::move(entries);
    return t;
  }

  // Parses the delimited table format: header
  //   index,label,min_snr_db,phy_rate_mbps
  // with '#' comment lines. Rates are Mbit/s in the file.
  static McsTable load(std::istream& in, const std::string& origin = "<stream>") {
    std::vector<McsEntry> entries;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
      ++lineno;
      std::string trimmed = trim(line);
      if (trimmed.empty() || trimmed[0] == '#') continue;
      if (!header_seen) {
        if (normalize(trimmed) != "index,label,min_snr_db,phy_rate_mbps") {
          throw validation_error(origin + ":" + std::to_string(lineno) +
                                 ": expected header 'index,label,min_snr_db,phy_rate_mbps'");
        }
        header_seen = true;
        continue;
      }
      std::vector<std::string> cols = split_csv(trimmed);
      if (cols.size() != 4) {
        throw validation_error(origin + ":" + std::to_string(lineno) + ": expected 4 columns, got " +
                               std::to_string(cols.size()));
      }
      McsEntry e;
      e.index = static_cast<int>(parse_num(cols[0], origin, lineno, "index"));
      e.label = trim(cols[1]);
      e.min_snr_db = parse_num(cols[2], origin, lineno, "min_snr_db");
      e.phy_rate_bps = parse_num(cols[3], origin, lineno, "phy_rate_mbps") * 1e6;
      entries.push_back(std::move(e));
    }
    if (!header_seen) throw validation_error(origin + ": empty MCS table document");
    return from_entries(std::move(entries));
  }

  static McsTable load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw io_error("cannot open MCS table file: " + path);
    return load(f, path);
  }

  const std::vector<McsEntry>& entries() const { return entries_; }

  // Highest entry whose threshold is at or below snr (the threshold is a
  // closed lower bound); nullptr when snr is below every threshold.
  const McsEntry* select(double snr_db) const {
    auto pos = select_pos(snr_db);
    return pos ? &entries_[*pos] : nullptr;
  }

  std::optional<std::size_t> select_pos(double snr_db) const {
    if (std::isnan(snr_db)) return std::nullopt;
    auto it = std::upper_bound(entries_.begin(), entries_.end(), snr_db,
                               [](double s, const McsEntry& e) { return s < e.min_snr_db; });
    if (it == entries_.begin()) return std::nullopt;
    return static_cast<std::size_t>(std::distance(entries_.begin(), it)) - 1;
  }

  // Selection with an upgrade hysteresis margin: stepping above the held
  // entry requires exceeding the new threshold by margin_db; holding and
  // stepping down follow the plain thresholds. margin_db = 0 reduces to
  // select_pos.
  std::optional<std::size_t> select_pos_hysteresis(double snr_db,
                                                   std::optional<std::size_t> held,
                                                   double margin_db) const {
    std::optional<std::size_t> plain = select_pos(snr_db);
    if (!held || margin_db <= 0) return plain;
    if (!plain || *plain <= *held) return plain;
    std::optional<std::size_t> up = select_pos(snr_db - margin_db);
    if (!up || *up < *held) return held;  // snr still >= entries_[*held].min_snr_db here
    return up;
  }

private:
  static std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  static std::string normalize(const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == ' ' || c == '\t') continue;
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
  }

  static std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> cols;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        cols.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    cols.push_back(cur);
    return cols;
  }

  static double parse_num(const std::string& s, const std::string& origin, int lineno,
                          const char* col) {
    std::string t = trim(s);
    std::size_t consumed = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &consumed);
    } catch (const std::exception&) {
      throw validation_error(origin + ":" + std::to_string(lineno) + ": column '" + col +
                             "' is not a number: '" + t + "'");
    }
    if (consumed != t.size()) {
      throw validation_error(origin + ":" + std::to_string(lineno) + ": column '" + col +
                             "' has trailing characters: '" + t + "'");
    }
    return v;
  }

  std::vector<McsEntry> entries_;
};

// Usable link rate for a selected entry: the PHY rate clipped by the device
// ceiling. No entry (no link) carries zero capacity.
inline double capacity_bps(const McsEntry* entry, const RadioHardware& hw) {
  if (entry == nullptr) return 0.0;
  return std::min(entry->phy_rate_bps, hw.max_throughput_bps);
}

}  // namespace dronecast
