#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "actisim/blocks.hpp"
#include "actisim/ee.hpp"
#include "actisim/estimator.hpp"
#include "actisim/scenario.hpp"
#include "actisim/sim.hpp"

namespace actisim {

// ---------------------------------------------------------------------------
// `estimate`: simulate every application of a scenario, weight the recorded
// activity with the power library, emit reports and a run manifest.
// ---------------------------------------------------------------------------

struct EstimateOptions {
  fs::path scenario_path;
  fs::path library_path;
  fs::path out_dir;
  std::uint64_t seed = 1;
  int jobs = 0;                // 0 = one thread per application (capped)
  bool record_timings = true;  // false zeroes wall times for reproducible trees
  std::string dump_samples;    // "", "csv" or "int16"
};

struct RunResult {
  int exit_code = 0;
  fs::path manifest_path;
  json manifest;
};

namespace detail {

inline double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string samples_to_csv(const CplxVec& samples) {
  std::string out = "re,im\n";
  for (const auto& s : samples) out += fmt_double(s.real()) + "," + fmt_double(s.imag()) + "\n";
  return out;
}

inline std::string samples_to_int16le(const CplxVec& samples, int q_bits) {
  const double scale = std::ldexp(1.0, q_bits - 1);
  std::string out;
  out.reserve(samples.size() * 4);
  auto put = [&out](double v) {
    long code = std::lround(v);
    code = std::clamp(code, -32768L, 32767L);
    const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(code));
    out.push_back(static_cast<char>(u & 0xff));
    out.push_back(static_cast<char>((u >> 8) & 0xff));
  };
  for (const auto& s : samples) {
    put(s.real() * scale);
    put(s.imag() * scale);
  }
  return out;
}

inline json ofdm_to_json(const OfdmParams& p) {
  json j = json::object();
  j["bandwidth_mhz"] = p.bandwidth_mhz;
  j["fft_size"] = p.fft_size;
  j["used_subcarriers"] = p.used_subcarriers;
  j["resource_blocks"] = p.resource_blocks;
  j["subcarrier_spacing_khz"] = p.subcarrier_spacing_khz;
  j["cp_mode"] = to_string(p.cp_mode);
  j["sampling_rate_hz"] = p.sampling_rate_hz();
  return j;
}

struct AppRun {
  json entry;           // manifest entry
  bool ok = false;
  std::vector<std::string> files;  // paths relative to out_dir
};

inline AppRun run_application(const ApplicationSpec& app, const PowerLibrary& lib,
                              const EstimateOptions& opts) {
  AppRun run;
  json& e = run.entry;
  e = json::object();
  e["name"] = app.name;
  e["index"] = app.index;
  e["bindings"] = params_to_json(app.bindings);
  e["parameters"] = params_to_json(app.all_params);
  const std::uint64_t app_seed = derive_seed(opts.seed, static_cast<std::uint64_t>(app.index));
  e["seed"] = app_seed;

  auto fail = [&](const std::string& why) {
    e["status"] = "error";
    e["error"] = why;
    e["files"] = json::array();
    log(LogLevel::error, app.name + ": " + why);
    return run;
  };

  if (app.error) return fail(*app.error);

  try {
    e["ofdm"] = ofdm_to_json(app.ofdm);
    e["clock_mhz"] = app.clock_mhz;
    e["fpga_part"] = app.fpga_part;
    e["w_hz"] = app.ofdm.bandwidth_mhz * 1e6;
    e["stop"] = app.stop.to_json();

    // Resolve all records before spending time simulating.
    if (auto missing = missing_records(app, lib); !missing.empty()) {
      std::string msg = "missing power record(s):";
      for (const auto& k : missing) msg += " " + k.to_string();
      return fail(msg);
    }

    const Topology topo = build_lte_topology(app.lte, app.sink_quota_items);
    const SystemModel model = build_system(topo, builtin_registry(), &lib);

    SimOptions sim_opts;
    sim_opts.seed = app_seed;
    sim_opts.stop = app.stop.kind == StopSpec::Kind::cycles
                        ? StopCondition::cycles(app.stop.value)
                        : StopCondition::sink_items(app.sink_quota_items);

    const auto t_sim0 = std::chrono::steady_clock::now();
    const SimulationResult sim = simulate(model, sim_opts);
    const double simulate_s = elapsed_s(t_sim0);

    const auto t_est0 = std::chrono::steady_clock::now();
    const auto all_alphas = activity_coefficients(sim.trace);
    std::map<std::string, double> alphas;
    std::map<std::string, IpPowerRecord> records;
    for (const auto& inst : topo.instances) {
      if (!inst.powered) continue;
      alphas[inst.id] = all_alphas.at(inst.id);
      records[inst.id] = lib.lookup(inst.config_key());
    }
    const PowerReport activity = estimate_power(alphas, records, app.name);
    const PowerReport cumulative = cumulative_power(records, app.name);

    const fs::path app_dir = opts.out_dir / app.name;
    fs::create_directories(app_dir);
    auto emit = [&](const std::string& file, const std::string& text) {
      write_file_text(app_dir / file, text);
      run.files.push_back(app.name + "/" + file);
    };
    emit("report_activity.json", report_to_json(activity).dump(2) + "\n");
    emit("report_activity.csv", report_to_csv(activity));
    emit("report_cumulative.json", report_to_json(cumulative).dump(2) + "\n");
    emit("report_cumulative.csv", report_to_csv(cumulative));
    emit("breakdown.csv", breakdown_to_csv(activity));
    emit("trace.csv", trace_to_csv(sim.trace));
    if (!opts.dump_samples.empty()) {
      for (const auto& [sink, payload] : sim.outputs) {
        if (!std::holds_alternative<CplxVec>(payload)) continue;
        const auto& samples = std::get<CplxVec>(payload);
        if (opts.dump_samples == "csv") {
          emit("samples_" + sink + ".csv", samples_to_csv(samples));
        } else if (opts.dump_samples == "int16") {
          emit("samples_" + sink + ".bin",
               samples_to_int16le(samples, app.lte.q_bits.value_or(15)));
        } else {
          throw ValidationError("unknown sample dump format: " + opts.dump_samples);
        }
      }
    }
    const double estimate_s = elapsed_s(t_est0);

    e["status"] = "ok";
    e["t_sim_cycles"] = sim.trace.t_sim_cycles;
    // cycles convert to seconds only here, at the reporting boundary
    e["t_sim_s"] = static_cast<double>(sim.trace.t_sim_cycles) / (app.clock_mhz * 1e6);
    json sink_samples = json::object();
    for (const auto& [sink, items] : sim.sink_items) sink_samples[sink] = items;
    e["sink_samples"] = std::move(sink_samples);
    json totals = json::object();
    totals["activity_weighted"] = activity.total_mw;
    totals["cumulative"] = cumulative.total_mw;
    e["totals_mw"] = std::move(totals);
    json files = json::array();
    for (const auto& f : run.files) files.push_back(f);
    e["files"] = std::move(files);
    json timings = json::object();
    timings["simulate"] = opts.record_timings ? simulate_s : 0.0;
    timings["estimate"] = opts.record_timings ? estimate_s : 0.0;
    e["timings_s"] = std::move(timings);
    run.ok = true;
    return run;
  } catch (const Error& ex) {
    return fail(ex.what());
  }
}

}  // namespace detail

inline RunResult run_estimate(const EstimateOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const PowerLibrary lib = load_library(opts.library_path);
  const ScenarioSpec scenario = parse_scenario(opts.scenario_path);
  const std::vector<ApplicationSpec> apps = enumerate_applications(scenario);
  fs::create_directories(opts.out_dir);

  std::vector<detail::AppRun> runs(apps.size());
  int jobs = opts.jobs > 0 ? opts.jobs : static_cast<int>(apps.size());
  jobs = std::clamp<int>(jobs, 1,
                         std::max(1u, std::thread::hardware_concurrency()));
  if (jobs <= 1 || apps.size() <= 1) {
    for (std::size_t i = 0; i < apps.size(); ++i)
      runs[i] = detail::run_application(apps[i], lib, opts);
  } else {
    std::vector<std::thread> pool;
    std::mutex next_mu;
    std::size_t next = 0;
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        while (true) {
          std::size_t i;
          {
            std::lock_guard<std::mutex> lock(next_mu);
            if (next >= apps.size()) return;
            i = next++;
          }
          runs[i] = detail::run_application(apps[i], lib, opts);
        }
      });
    for (auto& th : pool) th.join();
  }

  json manifest = json::object();
  manifest["schema_version"] = 1;
  manifest["tool"] = "actisim";
  manifest["command"] = "estimate";
  manifest["scenario"] = opts.scenario_path.string();
  manifest["library"] = opts.library_path.string();
  manifest["out_dir"] = opts.out_dir.string();
  manifest["seed"] = opts.seed;
  manifest["jobs"] = jobs;
  manifest["scenario_name"] = scenario.name;
  manifest["fpga_part"] = scenario.fpga_part;
  manifest["clock_mhz"] = scenario.clock_mhz;
  if (lib.metadata().static_power_mw) {
    // device static power is never part of any total; surfaced for reporting
    json sp = json::object();
    sp["value_mw"] = *lib.metadata().static_power_mw;
    sp["included_in_totals"] = false;
    manifest["library_static_power"] = std::move(sp);
  }
  json app_entries = json::array();
  bool any_fail = false;
  std::vector<std::string> all_files;
  for (auto& r : runs) {
    app_entries.push_back(r.entry);
    any_fail |= !r.ok;
    all_files.insert(all_files.end(), r.files.begin(), r.files.end());
  }
  manifest["applications"] = std::move(app_entries);
  all_files.push_back("manifest.json");
  json files = json::array();
  for (const auto& f : all_files) files.push_back(f);
  manifest["files"] = std::move(files);
  json timings = json::object();
  timings["total"] = opts.record_timings ? detail::elapsed_s(t0) : 0.0;
  manifest["timings_s"] = std::move(timings);

  RunResult res;
  res.manifest_path = opts.out_dir / "manifest.json";
  write_file_text(res.manifest_path, manifest.dump(2) + "\n");
  res.manifest = std::move(manifest);
  res.exit_code = any_fail ? 2 : 0;
  return res;
}

// ---------------------------------------------------------------------------
// `ee`: energy-efficiency sweeps from an estimate manifest.
// ---------------------------------------------------------------------------

struct EeOptions {
  fs::path manifest_path;
  fs::path params_path;
  std::string pt_range = "-10:50:1";
  fs::path out_dir;
  std::uint64_t seed = 1;
  bool record_timings = true;
};

inline json load_manifest(const fs::path& path) {
  try {
    return json::parse(read_file_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest " + path.string() + ": " + e.what());
  }
}

inline RunResult run_ee(const EeOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const json manifest = load_manifest(opts.manifest_path);
  json params_json;
  try {
    params_json = json::parse(read_file_text(opts.params_path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("ee params " + opts.params_path.string() + ": " + e.what());
  }
  const EeParams base = ee_params_from_json(params_json, opts.params_path.string());
  const auto n_samples = params_json.value("n_samples", 100000ULL);
  const std::vector<double> pt = parse_pt_range(opts.pt_range);

  std::vector<EeSweepEntry> entries;
  std::vector<std::string> skipped;
  for (const auto& app : manifest.at("applications")) {
    if (app.value("status", "error") != "ok") {
      skipped.push_back(app.value("name", "?"));
      continue;
    }
    EeSweepEntry entry;
    entry.application = app.at("name").get<std::string>();
    entry.w_hz = app.at("w_hz").get<double>();
    entry.p_circuit_mw = app.at("totals_mw").at("activity_weighted").get<double>();
    entries.push_back(std::move(entry));
  }
  if (entries.empty()) throw ValidationError("manifest has no successful applications");

  const std::vector<EeCurve> curves = ee_sweep(entries, pt, base, n_samples, opts.seed);

  fs::create_directories(opts.out_dir);
  std::vector<std::string> files;
  json curve_index = json::array();
  for (const auto& c : curves) {
    const fs::path dir = opts.out_dir / c.application;
    fs::create_directories(dir);
    const std::string file = c.application + "/ee_" + c.mode + ".csv";
    write_file_text(opts.out_dir / file, ee_curves_to_csv({c}));
    files.push_back(file);
    json cj = json::object();
    cj["application"] = c.application;
    cj["mode"] = c.mode;
    cj["file"] = file;
    cj["points"] = c.points.size();
    curve_index.push_back(std::move(cj));
  }

  json out = json::object();
  out["schema_version"] = 1;
  out["tool"] = "actisim";
  out["command"] = "ee";
  out["estimate_manifest"] = opts.manifest_path.string();
  out["params"] = opts.params_path.string();
  out["pt_dbm"] = opts.pt_range;
  out["seed"] = opts.seed;
  out["n_samples"] = n_samples;
  json sk = json::array();
  for (const auto& s : skipped) sk.push_back(s);
  out["skipped_applications"] = std::move(sk);
  out["curves"] = std::move(curve_index);
  files.push_back("ee_manifest.json");
  json jf = json::array();
  for (const auto& f : files) jf.push_back(f);
  out["files"] = std::move(jf);
  json timings = json::object();
  timings["total"] = opts.record_timings ? detail::elapsed_s(t0) : 0.0;
  out["timings_s"] = std::move(timings);

  RunResult res;
  res.manifest_path = opts.out_dir / "ee_manifest.json";
  write_file_text(res.manifest_path, out.dump(2) + "\n");
  res.manifest = std::move(out);
  res.exit_code = skipped.empty() ? 0 : 2;
  return res;
}

// ---------------------------------------------------------------------------
// `compare`: activity-weighted vs cumulative totals, optionally against an
// external reference file {"applications": [{"name", "reference_mw"}, ...]}.
// ---------------------------------------------------------------------------

inline int run_compare(const fs::path& manifest_path, const fs::path& reference_path,
                       std::ostream& os) {
  const json manifest = load_manifest(manifest_path);
  std::vector<double> refs;
  if (!reference_path.empty()) {
    json rj;
    try {
      rj = json::parse(read_file_text(reference_path));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("reference " + reference_path.string() + ": " + e.what());
    }
    for (const auto& r : rj.at("applications")) refs.push_back(r.at("reference_mw").get<double>());
  }
  os << "application,activity_mw,cumulative_mw,cumulative_error_pct";
  if (!refs.empty()) os << ",reference_mw,activity_error_pct,cumulative_vs_ref_pct";
  os << "\n";
  int rc = 0;
  std::size_t i = 0;
  for (const auto& app : manifest.at("applications")) {
    const std::string name = app.value("name", "?");
    if (app.value("status", "error") != "ok") {
      os << name << ",error,,\n";
      rc = 2;
      ++i;
      continue;
    }
    const double act = app.at("totals_mw").at("activity_weighted").get<double>();
    const double cum = app.at("totals_mw").at("cumulative").get<double>();
    os << name << "," << fmt_double(act) << "," << fmt_double(cum) << ","
       << fmt_double(relative_error_percent(cum, act));
    if (!refs.empty()) {
      if (i < refs.size()) {
        os << "," << fmt_double(refs[i]) << "," << fmt_double(relative_error_percent(act, refs[i]))
           << "," << fmt_double(relative_error_percent(cum, refs[i]));
      } else {
        os << ",,,";
      }
    }
    os << "\n";
    ++i;
  }
  return rc;
}

// `report --breakdown`: one plot-ready CSV over all applications, grouped by
// block type.
inline int run_report_breakdown(const fs::path& manifest_path, std::ostream& os) {
  const json manifest = load_manifest(manifest_path);
  const fs::path out_dir = manifest_path.parent_path();
  os << "application,block_type,contribution_mw,share\n";
  int rc = 0;
  for (const auto& app : manifest.at("applications")) {
    const std::string name = app.value("name", "?");
    if (app.value("status", "error") != "ok") {
      rc = 2;
      continue;
    }
    const json rep = load_manifest(out_dir / name / "report_activity.json");
    PowerReport report;
    report.application = name;
    report.total_mw = rep.at("total_mw").get<double>();
    for (const auto& row : rep.at("per_ip")) {
      PerIpPower ip;
      ip.instance_id = row.at("instance_id").get<std::string>();
      ip.block_type = row.at("block_type").get<std::string>();
      ip.alpha = row.at("alpha").get<double>();
      ip.p_active_mw = row.at("p_active_mw").get<double>();
      ip.p_idle_mw = row.at("p_idle_mw").get<double>();
      ip.contribution_mw = row.at("contribution_mw").get<double>();
      report.per_ip.push_back(std::move(ip));
    }
    for (const auto& g : power_breakdown(report).groups)
      os << name << "," << g.block_type << "," << fmt_double(g.contribution_mw) << ","
         << fmt_double(g.share) << "\n";
  }
  return rc;
}

}  // namespace actisim
