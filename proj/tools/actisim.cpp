#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "actisim/actisim.hpp"

namespace {

// Exit codes: 0 success, 1 usage/configuration error, 2 partial failure.
int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const actisim::Error& e) {
    std::cerr << "actisim: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "actisim: unexpected error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Activity-aware power and energy-efficiency estimation for "
               "FPGA IP-core dataflow systems"};
  app.require_subcommand(1);

  // estimate ----------------------------------------------------------------
  actisim::EstimateOptions est;
  std::string est_scenario, est_library, est_out;
  auto* cmd_est = app.add_subcommand(
      "estimate", "Simulate a scenario's applications and estimate power");
  cmd_est->add_option("--scenario", est_scenario, "Scenario JSON file")->required();
  cmd_est->add_option("--library", est_library, "Power library JSON file")->required();
  cmd_est->add_option("--out", est_out, "Output directory")->required();
  cmd_est->add_option("--seed", est.seed, "Root seed (default 1)");
  cmd_est->add_option("--jobs", est.jobs,
                      "Parallel applications (default: one per application)");
  cmd_est->add_flag("--no-timings", [&est](std::int64_t) { est.record_timings = false; },
                    "Zero wall-clock fields for byte-reproducible output trees");
  cmd_est->add_option("--dump-samples", est.dump_samples,
                      "Also dump per-antenna samples (csv|int16)")
      ->check(CLI::IsMember({"csv", "int16"}));

  // ee ----------------------------------------------------------------------
  actisim::EeOptions ee;
  std::string ee_manifest, ee_params, ee_out;
  auto* cmd_ee = app.add_subcommand("ee", "Energy-efficiency sweep from an estimate manifest");
  cmd_ee->add_option("--manifest", ee_manifest, "manifest.json from estimate")->required();
  cmd_ee->add_option("--params", ee_params, "EE parameter JSON file")->required();
  cmd_ee->add_option("--pt-dbm", ee.pt_range, "Transmit power sweep start:stop:step in dBm");
  cmd_ee->add_option("--out", ee_out, "Output directory")->required();
  cmd_ee->add_option("--seed", ee.seed, "Fading sample seed (default 1)");
  cmd_ee->add_flag("--no-timings", [&ee](std::int64_t) { ee.record_timings = false; },
                   "Zero wall-clock fields for byte-reproducible output trees");

  // compare -------------------------------------------------------------------
  std::string cmp_manifest, cmp_reference;
  auto* cmd_cmp = app.add_subcommand(
      "compare", "Tabulate activity-weighted vs cumulative totals and errors");
  cmd_cmp->add_option("--manifest", cmp_manifest, "manifest.json from estimate")->required();
  cmd_cmp->add_option("--reference", cmp_reference,
                      "Optional reference JSON with per-application reference_mw");

  // report --------------------------------------------------------------------
  std::string rep_manifest;
  bool rep_breakdown = false;
  auto* cmd_rep = app.add_subcommand("report", "Emit plot-ready report CSVs");
  cmd_rep->add_option("--manifest", rep_manifest, "manifest.json from estimate")->required();
  cmd_rep->add_flag("--breakdown", rep_breakdown, "Per-block-type power breakdown CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // 1 for any usage error, 0 for --help
  }

  if (cmd_est->parsed()) {
    return guarded([&] {
      est.scenario_path = est_scenario;
      est.library_path = est_library;
      est.out_dir = est_out;
      auto res = actisim::run_estimate(est);
      std::cout << "manifest: " << res.manifest_path.string() << "\n";
      return res.exit_code;
    });
  }
  if (cmd_ee->parsed()) {
    return guarded([&] {
      ee.manifest_path = ee_manifest;
      ee.params_path = ee_params;
      ee.out_dir = ee_out;
      auto res = actisim::run_ee(ee);
      std::cout << "manifest: " << res.manifest_path.string() << "\n";
      return res.exit_code;
    });
  }
  if (cmd_cmp->parsed()) {
    return guarded([&] {
      return actisim::run_compare(cmp_manifest, cmp_reference, std::cout);
    });
  }
  if (cmd_rep->parsed()) {
    return guarded([&] {
      if (!rep_breakdown) {
        std::cerr << "actisim report: nothing to do (pass --breakdown)\n";
        return 1;
      }
      return actisim::run_report_breakdown(rep_manifest, std::cout);
    });
  }
  return 1;
}
