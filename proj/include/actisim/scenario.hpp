#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "actisim/blocks.hpp"
#include "actisim/lte.hpp"
#include "actisim/params.hpp"
#include "actisim/power_library.hpp"

namespace actisim {

// ---------------------------------------------------------------------------
// Scenario: the parameter meta-model. Fixed parameters are shared by every
// application; each variable axis contributes one binding per application.
// ---------------------------------------------------------------------------

struct StopSpec {
  enum class Kind { cycles, subframes };
  Kind kind = Kind::subframes;
  std::uint64_t value = 5;

  json to_json() const {
    json j = json::object();
    j[kind == Kind::cycles ? "cycles" : "subframes"] = value;
    return j;
  }
};

struct ScenarioSpec {
  std::string name;
  Params fixed;
  std::vector<std::pair<std::string, std::vector<ParamValue>>> variable;  // declaration order
  std::string fpga_part;
  double clock_mhz = 0;
  StopSpec stop;
  std::vector<std::string> custom_parameters;
};

namespace detail {

inline const std::set<std::string>& known_parameters() {
  static const std::set<std::string> k = {
      "coding_rate",  "code_block_size", "modulation", "fft_size", "bandwidth_mhz",
      "quantization_bits", "tx_antennas", "cp_mode",   "pilot_period", "clock_mhz"};
  return k;
}

inline void check_parameter_names(const ScenarioSpec& s) {
  std::set<std::string> allowed = known_parameters();
  allowed.insert(s.custom_parameters.begin(), s.custom_parameters.end());
  auto check = [&](const std::string& name) {
    if (!allowed.count(name))
      throw ValidationError("unknown parameter '" + name +
                            "' (declare it under custom_parameters to pass it through)");
  };
  std::set<std::string> fixed_names;
  for (const auto& [k, v] : s.fixed) {
    check(k);
    fixed_names.insert(k);
  }
  std::set<std::string> axis_names;
  for (const auto& [k, values] : s.variable) {
    check(k);
    if (!axis_names.insert(k).second)
      throw ValidationError("variable axis '" + k + "' declared twice");
    if (fixed_names.count(k))
      throw ValidationError("parameter '" + k + "' is both fixed and variable");
    if (values.empty()) throw ValidationError("variable axis '" + k + "' is empty");
  }
}

}  // namespace detail

inline ScenarioSpec parse_scenario_json(const json& j, const std::string& where = "<scenario>") {
  ScenarioSpec s;
  try {
    s.name = j.value("name", std::string("scenario"));
    if (j.contains("fixed")) s.fixed = params_from_json(j["fixed"]);
    if (j.contains("variable")) {
      if (!j["variable"].is_object())
        throw ParseError(where + ": variable must be an object of arrays");
      for (auto it = j["variable"].begin(); it != j["variable"].end(); ++it) {
        if (!it.value().is_array())
          throw ParseError(where + ": variable axis '" + it.key() + "' must be an array");
        std::vector<ParamValue> values;
        for (const auto& v : it.value()) values.push_back(ParamValue::from_json(v));
        s.variable.emplace_back(it.key(), std::move(values));
      }
    }
    s.fpga_part = j.value("fpga_part", std::string());
    s.clock_mhz = j.value("clock_mhz", 0.0);
    if (j.contains("custom_parameters"))
      for (const auto& c : j["custom_parameters"]) s.custom_parameters.push_back(c.get<std::string>());
    if (j.contains("stop")) {
      const auto& st = j["stop"];
      const bool has_sf = st.contains("subframes"), has_cy = st.contains("cycles");
      if (has_sf == has_cy)
        throw ParseError(where + ": stop must carry exactly one of subframes|cycles");
      s.stop.kind = has_sf ? StopSpec::Kind::subframes : StopSpec::Kind::cycles;
      s.stop.value = (has_sf ? st["subframes"] : st["cycles"]).get<std::uint64_t>();
      if (s.stop.value == 0) throw ParseError(where + ": stop value must be positive");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
  detail::check_parameter_names(s);
  return s;
}

inline ScenarioSpec parse_scenario(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("scenario file " + path.string() + ": " + e.what());
  }
  return parse_scenario_json(j, path.string());
}

// ---------------------------------------------------------------------------
// Applications: one full binding of the scenario's variable axes.
// ---------------------------------------------------------------------------

struct ApplicationSpec {
  std::string name;  // app_1, app_2, ... in enumeration order
  int index = 0;     // 1-based
  Params bindings;
  Params all_params;  // fixed + bindings
  std::string fpga_part;
  double clock_mhz = 0;
  StopSpec stop;
  OfdmParams ofdm;
  LteAppConfig lte;
  std::uint64_t sink_quota_items = 0;  // derived for subframes stop
  std::vector<std::pair<std::string, IpConfigKey>> instance_keys;  // powered instances
  std::optional<std::string> error;  // derivation failure; isolates this application

  std::string label() const {
    std::string l = name;
    if (!bindings.empty()) l += "[" + format_params_kv(bindings) + "]";
    return l;
  }
};

namespace detail {

inline void derive_application(ApplicationSpec& app, const ScenarioSpec& s) {
  const Params& p = app.all_params;
  // Clock: a fixed/bound clock_mhz parameter takes precedence over the
  // scenario-level field.
  app.clock_mhz = s.clock_mhz;
  if (auto c = get_double(p, "clock_mhz")) app.clock_mhz = *c;
  if (app.clock_mhz <= 0) throw ValidationError("clock_mhz must be positive");

  const CpMode cp = cp_mode_from_string(get_string_or(p, "cp_mode", "normal"));
  const auto fft = get_int(p, "fft_size");
  const auto bw = get_double(p, "bandwidth_mhz");
  if (!fft && !bw)
    throw ValidationError("scenario must bind fft_size or bandwidth_mhz");
  if (fft) {
    app.ofdm = ofdm_params_for_fft(static_cast<int>(*fft), cp);
    if (bw && *bw != app.ofdm.bandwidth_mhz)
      throw ValidationError("fft_size " + std::to_string(*fft) + " and bandwidth_mhz " +
                            fmt_double(*bw) + " are inconsistent");
  } else {
    app.ofdm = derive_ofdm_params(*bw, cp);
  }

  const std::string rate = get_string_or(p, "coding_rate", "1/3");
  if (rate != "1/3")
    throw ValidationError("unsupported coding_rate '" + rate + "' (the coder is rate 1/3)");

  LteAppConfig cfg;
  cfg.ofdm = app.ofdm;
  cfg.modulation = modulation_from_string(get_string_or(p, "modulation", "QPSK"));
  cfg.code_block_size = static_cast<int>(get_int_or(p, "code_block_size", 1024));
  if (cfg.code_block_size < 1) throw ValidationError("code_block_size must be positive");
  const auto q = get_int_or(p, "quantization_bits", 14);
  if (q > 0) cfg.q_bits = static_cast<int>(q);
  else cfg.q_bits.reset();
  cfg.pilot_period = static_cast<int>(get_int_or(p, "pilot_period", 11));
  if (cfg.pilot_period != 0 && cfg.pilot_period < 2)
    throw ValidationError("pilot_period must be 0 (no pilots) or >= 2");
  cfg.clock_mhz = app.clock_mhz;
  cfg.tx_antennas = static_cast<int>(get_int_or(p, "tx_antennas", 2));
  app.lte = cfg;

  app.stop = s.stop;
  if (app.stop.kind == StopSpec::Kind::subframes)
    app.sink_quota_items = app.stop.value * 2 *
                           static_cast<std::uint64_t>(slot_samples(app.ofdm.fft_size, cp));

  // The topology builder is the single source of truth for config keys.
  Topology topo = build_lte_topology(cfg, app.sink_quota_items);
  for (const auto& inst : topo.instances)
    if (inst.powered) app.instance_keys.emplace_back(inst.id, inst.config_key());
}

}  // namespace detail

// Cartesian product of the variable axes; the first-declared axis varies
// slowest. Per-application derivation failures are captured in .error so one
// bad binding cannot take down its siblings.
inline std::vector<ApplicationSpec> enumerate_applications(const ScenarioSpec& s) {
  std::vector<ApplicationSpec> apps;
  std::size_t count = 1;
  for (const auto& [name, values] : s.variable) count *= values.size();
  std::vector<std::size_t> odo(s.variable.size(), 0);
  for (std::size_t n = 0; n < count; ++n) {
    ApplicationSpec app;
    app.index = static_cast<int>(n + 1);
    app.name = "app_" + std::to_string(app.index);
    for (std::size_t a = 0; a < s.variable.size(); ++a)
      app.bindings[s.variable[a].first] = s.variable[a].second[odo[a]];
    app.all_params = s.fixed;
    for (const auto& [k, v] : app.bindings) app.all_params[k] = v;
    app.fpga_part = s.fpga_part;
    try {
      detail::derive_application(app, s);
    } catch (const Error& e) {
      app.error = app.name + ": " + e.what();
    }
    apps.push_back(std::move(app));
    // advance odometer, last axis fastest
    for (std::size_t a = s.variable.size(); a-- > 0;) {
      if (++odo[a] < s.variable[a].second.size()) break;
      odo[a] = 0;
    }
  }
  return apps;
}

// Keys this application needs but the library lacks.
inline std::vector<IpConfigKey> missing_records(const ApplicationSpec& app,
                                                const PowerLibrary& lib) {
  std::vector<IpConfigKey> missing;
  std::set<IpConfigKey> seen;
  for (const auto& [id, key] : app.instance_keys)
    if (!lib.contains(key) && seen.insert(key).second) missing.push_back(key);
  return missing;
}

}  // namespace actisim
