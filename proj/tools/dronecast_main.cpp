#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "dronecast/engine.hpp"
#include "dronecast/scenario_io.hpp"

namespace dc = dronecast;
namespace fs = std::filesystem;

namespace {

void ensure_out_dir(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw dc::io_error("cannot create output directory " + out.string() + ": " + ec.message());
}

struct RunArgs {
  std::string scenario;
  std::string mcs_table;
  std::string out = ".";
  std::string detection_mode = "expected";
  double dt = 0.0;
  std::uint64_t seed = 0;
  bool has_mcs_table = false;
  bool has_dt = false;
  bool has_seed = false;
};

void cmd_run(const RunArgs& a) {
  std::optional<std::string> mcs_override;
  if (a.has_mcs_table) mcs_override = a.mcs_table;
  dc::Scenario sc = dc::parse_scenario(a.scenario, mcs_override);
  if (a.has_dt) {
    sc.channel_sample_dt_s = a.dt;
    sc.validate();
  }

  dc::RunOptions opt;
  if (a.detection_mode == "expected") {
    opt.detection_stat = dc::RunOptions::DetectionStat::kExpected;
  } else if (a.detection_mode == "monte-carlo") {
    if (!a.has_seed) {
      throw dc::validation_error("run: --seed is required with --detection-mode monte-carlo");
    }
    opt.detection_stat = dc::RunOptions::DetectionStat::kMonteCarlo;
    opt.seed = a.seed;
  } else {
    throw dc::validation_error("run: --detection-mode must be 'expected' or 'monte-carlo'");
  }

  dc::SimulationResult result = dc::run(sc, opt);
  dc::EnergyBreakdown energy = dc::energy_report(result, sc);

  ensure_out_dir(a.out);
  std::ostringstream steps;
  dc::write_steps_csv(steps, result.steps);
  std::ostringstream summary;
  dc::write_summary_json(summary, result, energy, "steps.csv");
  dc::atomic_write_file(fs::path(a.out) / "steps.csv", steps.str());
  dc::atomic_write_file(fs::path(a.out) / "summary.json", summary.str());

  std::cout << "frames: " << result.frames_generated << " generated, " << result.frames_delivered
            << " delivered, " << result.frames_dropped << " dropped\n"
            << "goodput_bps: " << dc::format_g6(result.goodput_bps) << "\n"
            << "wrote " << (fs::path(a.out) / "summary.json").string() << "\n";
}

struct CurveArgs {
  std::string config;
  std::string out = ".";
  std::vector<double> gains;
  double snr_min = 0.0;
  double snr_max = 0.0;
  double snr_step = 1.0;
  int jobs = 1;
  dc::LinkBudgetParams link;  // gains overwritten per sweep point
  bool has_config = false;
  bool has_snr_min = false;
  bool has_snr_max = false;
  bool has_snr_step = false;
};

void cmd_distance_curve(CurveArgs a) {
  if (a.has_config) {
    const auto root = dc::detail::parse_json_file(a.config);
    dc::detail::as_object(root, a.config);
    dc::detail::reject_unknown_keys(root, a.config,
                                    {"gains_dbi", "snr_db_min", "snr_db_max", "snr_db_step",
                                     "link"});
    if (auto it = root.find("gains_dbi"); it != root.end() && a.gains.empty()) {
      const auto& arr = dc::detail::as_array(*it, "gains_dbi");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        a.gains.push_back(dc::detail::as_number(arr[i], "gains_dbi"));
      }
    }
    if (root.contains("snr_db_min") && !a.has_snr_min) {
      a.snr_min = dc::detail::num(root, a.config, "snr_db_min");
      a.has_snr_min = true;
    }
    if (root.contains("snr_db_max") && !a.has_snr_max) {
      a.snr_max = dc::detail::num(root, a.config, "snr_db_max");
      a.has_snr_max = true;
    }
    if (root.contains("snr_db_step") && !a.has_snr_step) {
      a.snr_step = dc::detail::num(root, a.config, "snr_db_step");
    }
    if (auto it = root.find("link"); it != root.end()) {
      const auto& link = dc::detail::as_object(*it, "link");
      dc::detail::reject_unknown_keys(link, "link",
                                      {"carrier_freq_hz", "bandwidth_hz", "tx_power_dbm",
                                       "noise_density_dbm_per_hz", "noise_figure_db",
                                       "misc_loss_db"});
      a.link.carrier_freq_hz = dc::detail::num_or(link, "link", "carrier_freq_hz",
                                                  a.link.carrier_freq_hz);
      a.link.bandwidth_hz = dc::detail::num_or(link, "link", "bandwidth_hz", a.link.bandwidth_hz);
      a.link.tx_power_dbm = dc::detail::num_or(link, "link", "tx_power_dbm", a.link.tx_power_dbm);
      a.link.noise_density_dbm_per_hz =
          dc::detail::num_or(link, "link", "noise_density_dbm_per_hz",
                             a.link.noise_density_dbm_per_hz);
      a.link.noise_figure_db = dc::detail::num_or(link, "link", "noise_figure_db",
                                                  a.link.noise_figure_db);
      a.link.misc_loss_db = dc::detail::num_or(link, "link", "misc_loss_db", a.link.misc_loss_db);
    }
  }

  if (a.gains.empty()) {
    throw dc::validation_error("distance-curve: no antenna gains given (--gains or config)");
  }
  if (!a.has_snr_min || !a.has_snr_max) {
    throw dc::validation_error("distance-curve: SNR range required (--snr-min/--snr-max or config)");
  }
  if (!(a.snr_step > 0) || !std::isfinite(a.snr_step)) {
    throw dc::validation_error("distance-curve: snr step must be > 0");
  }
  if (a.snr_min > a.snr_max) {
    throw dc::validation_error("distance-curve: SNR range must be ascending");
  }
  a.link.validate();

  std::vector<double> snrs;
  for (long k = 0;; ++k) {
    double v = a.snr_min + static_cast<double>(k) * a.snr_step;
    if (v > a.snr_max + a.snr_step * 1e-9) break;
    snrs.push_back(v);
  }

  std::vector<std::pair<double, double>> grid;  // (gain, snr), gain-major
  for (double g : a.gains) {
    for (double s : snrs) grid.emplace_back(g, s);
  }

  std::vector<dc::DistancePoint> points(grid.size());
  auto worker = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < grid.size(); i += stride) {
      dc::LinkBudgetParams p = a.link;
      p.tx_gain_dbi = grid[i].first;
      p.rx_gain_dbi = grid[i].first;
      dc::DistancePoint pt{grid[i].first, grid[i].second, std::nullopt};
      try {
        pt.max_distance_m = dc::max_distance_m(p, grid[i].second);
      } catch (const dc::unreachable_error&) {
      }
      points[i] = pt;
    }
  };
  unsigned jobs = a.jobs < 1 ? 1u : static_cast<unsigned>(a.jobs);
  if (jobs <= 1 || grid.size() < 2) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker, w, jobs);
    for (std::thread& t : pool) t.join();
  }

  ensure_out_dir(a.out);
  std::ostringstream csv;
  dc::write_distance_curve_csv(csv, points);
  dc::atomic_write_file(fs::path(a.out) / "distance_curve.csv", csv.str());
  std::cout << "wrote " << (fs::path(a.out) / "distance_curve.csv").string() << " ("
            << points.size() << " rows)\n";
}

struct CompareArgs {
  std::string scene;
  std::string out = ".";
  std::uint64_t seed = 0;
  bool has_seed = false;
};

void cmd_detection_compare(const CompareArgs& a) {
  dc::DetectionCompareScene scene = dc::load_detection_scene(a.scene);
  std::vector<dc::DetectionCompareRow> rows;
  for (std::size_t i = 0; i < scene.cameras.size(); ++i) {
    const dc::LabeledCamera& cam = scene.cameras[i];
    dc::FaceScene fs_view{cam.camera, scene.faces};
    dc::DetectionCompareRow row;
    row.label = cam.label;
    row.width_px = cam.camera.profile.width_px;
    row.expected = dc::expected_detections(scene.calibration, fs_view);
    if (a.has_seed) {
      row.sampled = dc::sampled_detections(scene.calibration, fs_view,
                                           dc::splitmix64(a.seed ^ static_cast<std::uint64_t>(i)));
    }
    rows.push_back(std::move(row));
  }
  double denom = rows.empty() ? 0.0 : rows.front().expected;
  for (dc::DetectionCompareRow& r : rows) r.ratio = denom > 0 ? r.expected / denom : 0.0;

  ensure_out_dir(a.out);
  std::ostringstream csv;
  dc::write_detection_compare_csv(csv, rows);
  dc::atomic_write_file(fs::path(a.out) / "detection_compare.csv", csv.str());
  std::cout << "wrote " << (fs::path(a.out) / "detection_compare.csv").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mmWave drone-to-ground video link simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "simulate a scenario and write summary + step table");
  run->add_option("--scenario", run_args.scenario, "scenario file")->required();
  auto* run_mcs = run->add_option("--mcs-table", run_args.mcs_table,
                                  "MCS table file (overrides the scenario's)");
  run->add_option("--out", run_args.out, "output directory (default .)");
  auto* run_dt = run->add_option("--dt", run_args.dt, "channel sample interval override, seconds");
  auto* run_seed = run->add_option("--seed", run_args.seed, "Monte Carlo seed");
  run->add_option("--detection-mode", run_args.detection_mode,
                  "detection statistic: expected | monte-carlo");

  CurveArgs curve_args;
  CLI::App* curve = app.add_subcommand("distance-curve",
                                       "max reachable distance vs required SNR per antenna gain");
  auto* curve_cfg = curve->add_option("--config", curve_args.config, "sweep config file");
  curve->add_option("--gains", curve_args.gains, "antenna gains, dBi (comma separated)")
      ->delimiter(',');
  auto* curve_min = curve->add_option("--snr-min", curve_args.snr_min, "SNR range start, dB");
  auto* curve_max = curve->add_option("--snr-max", curve_args.snr_max, "SNR range end, dB");
  auto* curve_step = curve->add_option("--snr-step", curve_args.snr_step, "SNR step, dB (default 1)");
  curve->add_option("--out", curve_args.out, "output directory (default .)");
  curve->add_option("--jobs", curve_args.jobs, "worker threads for the sweep (default 1)");
  curve->add_option("--carrier-freq-hz", curve_args.link.carrier_freq_hz, "carrier frequency, Hz");
  curve->add_option("--bandwidth-hz", curve_args.link.bandwidth_hz, "channel bandwidth, Hz");
  curve->add_option("--tx-power-dbm", curve_args.link.tx_power_dbm, "transmit power, dBm");
  curve->add_option("--noise-density-dbm-per-hz", curve_args.link.noise_density_dbm_per_hz,
                    "thermal noise density, dBm/Hz");
  curve->add_option("--noise-figure-db", curve_args.link.noise_figure_db, "receiver noise figure, dB");
  curve->add_option("--misc-loss-db", curve_args.link.misc_loss_db, "fixed implementation loss, dB");

  CompareArgs cmp_args;
  CLI::App* cmp = app.add_subcommand("detection-compare",
                                     "expected face detections per camera profile");
  cmp->add_option("--scene", cmp_args.scene, "detection scene file")->required();
  cmp->add_option("--out", cmp_args.out, "output directory (default .)");
  auto* cmp_seed = cmp->add_option("--seed", cmp_args.seed, "also sample detections with this seed");

  std::string validate_scenario;
  std::string validate_mcs;
  CLI::App* val = app.add_subcommand("validate", "parse and validate a scenario, write nothing");
  val->add_option("--scenario", validate_scenario, "scenario file")->required();
  auto* val_mcs = val->add_option("--mcs-table", validate_mcs,
                                  "MCS table file (overrides the scenario's)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(run)) {
      run_args.has_mcs_table = run_mcs->count() > 0;
      run_args.has_dt = run_dt->count() > 0;
      run_args.has_seed = run_seed->count() > 0;
      cmd_run(run_args);
    } else if (app.got_subcommand(curve)) {
      curve_args.has_config = curve_cfg->count() > 0;
      curve_args.has_snr_min = curve_min->count() > 0;
      curve_args.has_snr_max = curve_max->count() > 0;
      curve_args.has_snr_step = curve_step->count() > 0;
      cmd_distance_curve(curve_args);
    } else if (app.got_subcommand(cmp)) {
      cmp_args.has_seed = cmp_seed->count() > 0;
      cmd_detection_compare(cmp_args);
    } else if (app.got_subcommand(val)) {
      std::optional<std::string> mcs_override;
      if (val_mcs->count() > 0) mcs_override = validate_mcs;
      dc::parse_scenario(validate_scenario, mcs_override);
      std::cout << "OK: " << validate_scenario << "\n";
    }
  } catch (const dc::io_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const dc::validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
