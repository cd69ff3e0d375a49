#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "actisim/common.hpp"
#include "actisim/params.hpp"
#include "actisim/power_library.hpp"

namespace actisim {

// ---------------------------------------------------------------------------
// Two-state activity-weighted power model:
//   contribution_i = alpha_i * p_active_i + (1 - alpha_i) * p_idle_i
// The cumulative baseline treats every alpha as 1.
// ---------------------------------------------------------------------------

enum class EstimateMethod { activity_weighted, cumulative };

inline std::string to_string(EstimateMethod m) {
  return m == EstimateMethod::activity_weighted ? "activity_weighted" : "cumulative";
}

struct PerIpPower {
  std::string instance_id;
  std::string block_type;
  double alpha = 0;
  double p_active_mw = 0;
  double p_idle_mw = 0;
  double contribution_mw = 0;
};

struct PowerReport {
  std::vector<PerIpPower> per_ip;  // sorted by instance_id
  double total_mw = 0;
  EstimateMethod method = EstimateMethod::activity_weighted;
  std::string application;
};

namespace detail {

inline void check_same_instances(const std::map<std::string, double>& alphas,
                                 const std::map<std::string, IpPowerRecord>& records) {
  std::string only_alpha, only_records;
  for (const auto& [id, a] : alphas)
    if (!records.count(id)) only_alpha += (only_alpha.empty() ? "" : ", ") + id;
  for (const auto& [id, r] : records)
    if (!alphas.count(id)) only_records += (only_records.empty() ? "" : ", ") + id;
  if (!only_alpha.empty() || !only_records.empty())
    throw ValidationError("instance sets differ: only in alphas {" + only_alpha +
                          "}, only in records {" + only_records + "}");
}

}  // namespace detail

inline PowerReport estimate_power(const std::map<std::string, double>& alphas,
                                  const std::map<std::string, IpPowerRecord>& records,
                                  const std::string& application = "") {
  detail::check_same_instances(alphas, records);
  PowerReport rep;
  rep.method = EstimateMethod::activity_weighted;
  rep.application = application;
  for (const auto& [id, alpha] : alphas) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
      throw ValidationError("alpha out of range for " + id + ": " + fmt_double(alpha));
    const IpPowerRecord& r = records.at(id);
    PerIpPower ip;
    ip.instance_id = id;
    ip.block_type = r.key.ip_name;
    ip.alpha = alpha;
    ip.p_active_mw = r.p_active_mw;
    ip.p_idle_mw = r.p_idle_mw;
    ip.contribution_mw = alpha * r.p_active_mw + (1.0 - alpha) * r.p_idle_mw;
    rep.total_mw += ip.contribution_mw;
    rep.per_ip.push_back(std::move(ip));
  }
  return rep;
}

inline PowerReport cumulative_power(const std::map<std::string, IpPowerRecord>& records,
                                    const std::string& application = "") {
  if (records.empty()) throw ValidationError("cumulative power of an empty record set");
  PowerReport rep;
  rep.method = EstimateMethod::cumulative;
  rep.application = application;
  for (const auto& [id, r] : records) {
    PerIpPower ip;
    ip.instance_id = id;
    ip.block_type = r.key.ip_name;
    ip.alpha = 1.0;
    ip.p_active_mw = r.p_active_mw;
    ip.p_idle_mw = r.p_idle_mw;
    ip.contribution_mw = r.p_active_mw;
    rep.total_mw += ip.contribution_mw;
    rep.per_ip.push_back(std::move(ip));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Breakdown: per-IP shares plus block-type groups (the bar-chart view).
// ---------------------------------------------------------------------------

struct BreakdownGroup {
  std::string block_type;
  double contribution_mw = 0;
  double share = 0;
};

struct Breakdown {
  std::vector<std::pair<std::string, double>> per_instance_share;  // report order
  std::vector<BreakdownGroup> groups;                              // sorted by block_type
};

inline Breakdown power_breakdown(const PowerReport& report) {
  if (!(report.total_mw > 0))
    throw ValidationError("power breakdown undefined for non-positive total");
  Breakdown b;
  std::map<std::string, double> by_type;
  for (const auto& ip : report.per_ip) {
    b.per_instance_share.emplace_back(ip.instance_id, ip.contribution_mw / report.total_mw);
    by_type[ip.block_type] += ip.contribution_mw;
  }
  for (const auto& [type, mw] : by_type)
    b.groups.push_back({type, mw, mw / report.total_mw});
  return b;
}

inline double relative_error_percent(double estimate_mw, double reference_mw) {
  if (!(reference_mw > 0))
    throw ValidationError("relative error needs a positive reference, got " +
                          fmt_double(reference_mw));
  return 100.0 * std::fabs(estimate_mw - reference_mw) / reference_mw;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

inline json report_to_json(const PowerReport& rep) {
  json j = json::object();
  j["application"] = rep.application;
  j["method"] = to_string(rep.method);
  j["total_mw"] = rep.total_mw;
  json rows = json::array();
  for (const auto& ip : rep.per_ip) {
    json r = json::object();
    r["instance_id"] = ip.instance_id;
    r["block_type"] = ip.block_type;
    r["alpha"] = ip.alpha;
    r["p_active_mw"] = ip.p_active_mw;
    r["p_idle_mw"] = ip.p_idle_mw;
    r["contribution_mw"] = ip.contribution_mw;
    rows.push_back(std::move(r));
  }
  j["per_ip"] = std::move(rows);
  return j;
}

inline std::string report_to_csv(const PowerReport& rep) {
  std::string out = "instance_id,alpha,p_active_mw,p_idle_mw,contribution_mw,share\n";
  for (const auto& ip : rep.per_ip) {
    const double share = rep.total_mw > 0 ? ip.contribution_mw / rep.total_mw : 0.0;
    out += ip.instance_id + "," + fmt_double(ip.alpha) + "," + fmt_double(ip.p_active_mw) +
           "," + fmt_double(ip.p_idle_mw) + "," + fmt_double(ip.contribution_mw) + "," +
           fmt_double(share) + "\n";
  }
  out += "total,,,," + fmt_double(rep.total_mw) + ",1\n";
  return out;
}

inline std::string breakdown_to_csv(const PowerReport& rep) {
  const Breakdown b = power_breakdown(rep);
  std::string out = "block_type,contribution_mw,share\n";
  for (const auto& g : b.groups)
    out += g.block_type + "," + fmt_double(g.contribution_mw) + "," + fmt_double(g.share) + "\n";
  return out;
}

}  // namespace actisim
