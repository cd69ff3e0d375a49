#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "actisim/common.hpp"
#include "actisim/csv.hpp"
#include "actisim/params.hpp"

namespace actisim {

// Identity of one characterized IP configuration. Equality is
// order-insensitive over the parameter pairs (Params is a sorted map).
struct IpConfigKey {
  std::string ip_name;
  Params parameters;

  friend bool operator==(const IpConfigKey& a, const IpConfigKey& b) {
    return a.ip_name == b.ip_name && a.parameters == b.parameters;
  }
  friend bool operator<(const IpConfigKey& a, const IpConfigKey& b) {
    if (a.ip_name != b.ip_name) return a.ip_name < b.ip_name;
    return a.parameters < b.parameters;
  }

  std::string to_string() const {
    return ip_name + "{" + format_params_kv(parameters) + "}";
  }
};

// One stage-1 characterization result: average dynamic power in the two
// observed modes, in milliwatts. Static device power is deliberately not a
// per-record field.
struct IpPowerRecord {
  IpConfigKey key;
  double p_active_mw = 0;
  double p_idle_mw = 0;
  std::string fpga_part;
  std::string source;

  friend bool operator==(const IpPowerRecord& a, const IpPowerRecord& b) {
    return a.key == b.key && a.p_active_mw == b.p_active_mw && a.p_idle_mw == b.p_idle_mw &&
           a.fpga_part == b.fpga_part && a.source == b.source;
  }
};

struct LibraryMetadata {
  int schema_version = 1;
  std::string created;                      // passthrough; never auto-generated
  std::optional<double> static_power_mw;    // device static power, reporting only
};

// Immutable store of power records, unique per IpConfigKey. Mutation
// (import) returns a new library.
class PowerLibrary {
 public:
  PowerLibrary() = default;

  static PowerLibrary from_records(std::vector<IpPowerRecord> records,
                                   LibraryMetadata meta = {}) {
    PowerLibrary lib;
    lib.meta_ = std::move(meta);
    for (auto& r : records) lib.insert(std::move(r));
    return lib;
  }

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<IpPowerRecord>& records() const { return records_; }
  const LibraryMetadata& metadata() const { return meta_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  bool contains(const IpConfigKey& key) const { return index_.count(key) != 0; }

  // Exact-match only; a miss means the configuration has not been
  // characterized yet.
  const IpPowerRecord& lookup(const IpConfigKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end())
      throw NotFoundError("no power record for " + key.to_string() +
                          "; characterize this configuration first");
    return records_[it->second];
  }

  static PowerLibrary load(const fs::path& path) {
    json j;
    try {
      j = json::parse(read_file_text(path));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("library file " + path.string() + ": " + e.what());
    }
    return from_json(j, path.string());
  }

  static PowerLibrary from_json(const json& j, const std::string& where = "<library>") {
    if (!j.is_object()) throw ParseError(where + ": top level must be an object");
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
      throw ParseError(where + ": missing integer schema_version");
    int ver = j["schema_version"].get<int>();
    if (ver != 1)
      throw ParseError(where + ": schema_version mismatch (got " + std::to_string(ver) +
                       ", expected 1)");
    LibraryMetadata meta;
    meta.schema_version = ver;
    if (j.contains("created")) meta.created = j["created"].get<std::string>();
    if (j.contains("static_power_mw")) meta.static_power_mw = j["static_power_mw"].get<double>();
    PowerLibrary lib;
    lib.meta_ = meta;
    if (!j.contains("records") || !j["records"].is_array())
      throw ParseError(where + ": missing records array");
    for (const auto& rj : j["records"]) {
      IpPowerRecord r;
      try {
        r.key.ip_name = rj.at("ip_name").get<std::string>();
        r.key.parameters = params_from_json(rj.at("parameters"));
        r.p_active_mw = rj.at("p_active_mw").get<double>();
        r.p_idle_mw = rj.at("p_idle_mw").get<double>();
        r.fpga_part = rj.value("fpga_part", std::string());
        r.source = rj.value("source", std::string());
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(where + ": malformed record " + rj.dump() + ": " + e.what());
      }
      lib.insert(std::move(r));
    }
    return lib;
  }

  json to_json() const {
    json j = json::object();
    j["schema_version"] = meta_.schema_version;
    if (!meta_.created.empty()) j["created"] = meta_.created;
    if (meta_.static_power_mw) j["static_power_mw"] = *meta_.static_power_mw;
    json recs = json::array();
    std::vector<std::size_t> order(records_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return records_[a].key < records_[b].key;
    });
    for (std::size_t i : order) {
      const auto& r = records_[i];
      json rj = json::object();
      rj["ip_name"] = r.key.ip_name;
      rj["parameters"] = params_to_json(r.key.parameters);
      rj["p_active_mw"] = r.p_active_mw;
      rj["p_idle_mw"] = r.p_idle_mw;
      rj["fpga_part"] = r.fpga_part;
      rj["source"] = r.source;
      recs.push_back(std::move(rj));
    }
    j["records"] = std::move(recs);
    return j;
  }

  void save(const fs::path& path) const { write_file_text(path, to_json().dump(2) + "\n"); }

  // All-or-nothing CSV ingestion; duplicates report the offending file line.
  // Header: ip_name,parameters,p_active_mw,p_idle_mw,fpga_part,source
  PowerLibrary import_characterization_csv(const fs::path& path) const {
    static const std::vector<std::string> kHeader = {"ip_name",     "parameters", "p_active_mw",
                                                     "p_idle_mw",   "fpga_part",  "source"};
    const std::string text = read_file_text(path);
    auto lines = split_lines(text);
    if (lines.empty()) throw ParseError(path.string() + ": empty CSV");
    if (split_csv_row(lines[0], 1) != kHeader)
      throw ParseError(path.string() + ": bad header, expected " +
                       "ip_name,parameters,p_active_mw,p_idle_mw,fpga_part,source");
    PowerLibrary next = *this;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const std::size_t line_no = i + 1;
      auto f = split_csv_row(lines[i], line_no);
      if (f.size() != kHeader.size())
        throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": expected " +
                         std::to_string(kHeader.size()) + " fields, got " +
                         std::to_string(f.size()));
      IpPowerRecord r;
      r.key.ip_name = f[0];
      r.key.parameters = parse_params_kv(f[1]);
      r.p_active_mw = parse_mw(f[2], path.string(), line_no);
      r.p_idle_mw = parse_mw(f[3], path.string(), line_no);
      r.fpga_part = f[4];
      r.source = f[5];
      if (next.contains(r.key))
        throw DuplicateKeyError(path.string() + ": line " + std::to_string(line_no) +
                                " duplicates key " + r.key.to_string());
      next.insert(std::move(r));
    }
    return next;
  }

  // Record-set equality; metadata and warnings are not part of identity.
  friend bool operator==(const PowerLibrary& a, const PowerLibrary& b) {
    if (a.records_.size() != b.records_.size()) return false;
    auto sa = a.sorted_records();
    auto sb = b.sorted_records();
    return sa == sb;
  }

 private:
  static double parse_mw(const std::string& s, const std::string& where, std::size_t line_no) {
    ParamValue v = ParamValue::parse(s);
    if (!v.is_number())
      throw ParseError(where + ": line " + std::to_string(line_no) +
                       ": power value is not numeric: " + s);
    return v.as_double();
  }

  void insert(IpPowerRecord r) {
    if (r.p_active_mw < 0 || r.p_idle_mw < 0)
      throw ValidationError("record " + r.key.to_string() + ": negative power");
    if (r.p_idle_mw > r.p_active_mw) {
      warnings_.push_back("record " + r.key.to_string() + ": p_idle_mw (" +
                          fmt_double(r.p_idle_mw) + ") exceeds p_active_mw (" +
                          fmt_double(r.p_active_mw) + ")");
      log(LogLevel::warn, warnings_.back());
    }
    auto [it, fresh] = index_.emplace(r.key, records_.size());
    if (!fresh)
      throw DuplicateKeyError("duplicate power record for key " + r.key.to_string());
    records_.push_back(std::move(r));
  }

  std::vector<IpPowerRecord> sorted_records() const {
    auto v = records_;
    std::sort(v.begin(), v.end(),
              [](const IpPowerRecord& a, const IpPowerRecord& b) { return a.key < b.key; });
    return v;
  }

  std::vector<IpPowerRecord> records_;
  std::map<IpConfigKey, std::size_t> index_;
  LibraryMetadata meta_;
  std::vector<std::string> warnings_;
};

inline PowerLibrary load_library(const fs::path& path) { return PowerLibrary::load(path); }

inline void save_library(const PowerLibrary& lib, const fs::path& path) { lib.save(path); }

}  // namespace actisim
