#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "actisim/estimator.hpp"
#include "actisim/sim.hpp"

using namespace actisim;

namespace {

IpPowerRecord rec(const std::string& type, double active, double idle) {
  IpPowerRecord r;
  r.key.ip_name = type;
  r.p_active_mw = active;
  r.p_idle_mw = idle;
  return r;
}

// Independent per-cycle energy integration over an explicit interval set.
double energy_oracle_mw(const std::map<std::string, std::vector<ActivityInterval>>& intervals,
                        const std::map<std::string, IpPowerRecord>& records, Cycle t_sim) {
  double total = 0;
  for (const auto& [id, ivs] : intervals) {
    const auto& r = records.at(id);
    std::vector<char> active(t_sim, 0);
    for (const auto& iv : ivs)
      for (Cycle t = iv.begin; t < iv.end && t < t_sim; ++t) active[t] = 1;
    double energy = 0;
    for (Cycle t = 0; t < t_sim; ++t) energy += active[t] ? r.p_active_mw : r.p_idle_mw;
    total += energy / static_cast<double>(t_sim);
  }
  return total;
}

}  // namespace

TEST_CASE("two-state weighting") {
  SECTION("midpoint") {
    auto rep = estimate_power({{"ip", 0.5}}, {{"ip", rec("t", 100, 20)}});
    CHECK(rep.per_ip.size() == 1);
    CHECK(rep.per_ip[0].contribution_mw == 60.0);
    CHECK(rep.total_mw == 60.0);
    CHECK(rep.method == EstimateMethod::activity_weighted);
  }
  SECTION("idle and active endpoints") {
    CHECK(estimate_power({{"a", 0.0}}, {{"a", rec("t", 100, 20)}}).total_mw == 20.0);
    CHECK(estimate_power({{"a", 1.0}}, {{"a", rec("t", 100, 20)}}).total_mw == 100.0);
  }
  SECTION("contributions stay between idle and active") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 200; ++i) {
      const double a = u(rng);
      auto rep = estimate_power({{"x", a}}, {{"x", rec("t", 100, 20)}});
      CHECK(rep.per_ip[0].contribution_mw >= 20.0);
      CHECK(rep.per_ip[0].contribution_mw <= 100.0);
    }
  }
  SECTION("instance set mismatch names the difference") {
    CHECK_THROWS_WITH(estimate_power({{"a", 0.5}}, {{"b", rec("t", 1, 0)}}),
                      Catch::Matchers::ContainsSubstring("a") &&
                          Catch::Matchers::ContainsSubstring("b"));
  }
  SECTION("alpha out of range") {
    CHECK_THROWS_AS(estimate_power({{"a", 1.5}}, {{"a", rec("t", 1, 0)}}), ValidationError);
    CHECK_THROWS_AS(estimate_power({{"a", -0.1}}, {{"a", rec("t", 1, 0)}}), ValidationError);
  }
}

TEST_CASE("activity-weighted total equals the per-cycle energy oracle") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> power(0.0, 200.0);
  for (int rep = 0; rep < 50; ++rep) {
    const Cycle t_sim = 200 + rng() % 2000;
    std::map<std::string, std::vector<ActivityInterval>> intervals;
    std::map<std::string, IpPowerRecord> records;
    std::map<std::string, double> alphas;
    for (int i = 0; i < 3; ++i) {
      const std::string id = "ip" + std::to_string(i);
      const double pa = power(rng);
      records[id] = rec("t" + std::to_string(i), pa, pa * 0.2);
      std::vector<ActivityInterval> ivs;
      Cycle t = rng() % 50;
      while (t < t_sim) {
        Cycle len = 1 + rng() % 40;
        ivs.push_back({t, std::min<Cycle>(t + len, t_sim)});
        t += len + 1 + rng() % 60;
      }
      intervals[id] = ivs;
      std::uint64_t active = 0;
      for (auto& iv : ivs) active += iv.end - iv.begin;
      alphas[id] = static_cast<double>(active) / static_cast<double>(t_sim);
    }
    const double estimated = estimate_power(alphas, records).total_mw;
    const double oracle = energy_oracle_mw(intervals, records, t_sim);
    CHECK_THAT(estimated, Catch::Matchers::WithinRel(oracle, 1e-9));
  }
}

TEST_CASE("cumulative baseline") {
  SECTION("singleton sum") {
    CHECK(cumulative_power({{"a", rec("t", 100, 1)}}).total_mw == 100.0);
  }
  SECTION("empty set") {
    CHECK_THROWS_AS(cumulative_power({}), ValidationError);
  }
  SECTION("equals activity-weighted when every alpha is 1") {
    std::map<std::string, IpPowerRecord> records{{"a", rec("x", 10, 1)},
                                                 {"b", rec("y", 20, 5)}};
    auto act = estimate_power({{"a", 1.0}, {"b", 1.0}}, records);
    CHECK(act.total_mw == cumulative_power(records).total_mw);
  }
  SECTION("dominates whenever idle <= active and some alpha < 1") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(0, 1);
    for (int it = 0; it < 100; ++it) {
      std::map<std::string, IpPowerRecord> records;
      std::map<std::string, double> alphas;
      bool some_below = false;
      for (int i = 0; i < 4; ++i) {
        const std::string id = "ip" + std::to_string(i);
        const double pa = 1 + 100 * u(rng);
        records[id] = rec("t", pa, pa * u(rng));
        double a = u(rng);
        if (i == 0) a = 0.5 * a;  // force at least one alpha below 1
        alphas[id] = a;
        some_below |= a < 1.0;
      }
      REQUIRE(some_below);
      CHECK(cumulative_power(records).total_mw > estimate_power(alphas, records).total_mw);
    }
  }
}

TEST_CASE("power breakdown") {
  SECTION("single IP takes the whole share") {
    auto rep = estimate_power({{"a", 1.0}}, {{"a", rec("t", 10, 1)}});
    auto b = power_breakdown(rep);
    CHECK(b.per_instance_share.size() == 1);
    CHECK(b.per_instance_share[0].second == 1.0);
  }
  SECTION("30/70 split") {
    auto rep = estimate_power({{"a", 1.0}, {"b", 1.0}},
                              {{"a", rec("x", 30, 0)}, {"b", rec("y", 70, 0)}});
    auto b = power_breakdown(rep);
    CHECK_THAT(b.per_instance_share[0].second, Catch::Matchers::WithinAbs(0.3, 1e-12));
    CHECK_THAT(b.per_instance_share[1].second, Catch::Matchers::WithinAbs(0.7, 1e-12));
  }
  SECTION("shares sum to one and groups preserve contributions") {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u(0.1, 50.0);
    std::map<std::string, IpPowerRecord> records;
    std::map<std::string, double> alphas;
    for (int i = 0; i < 7; ++i) {
      const std::string id = "ip" + std::to_string(i);
      records[id] = rec("type" + std::to_string(i % 3), u(rng), 0.1);
      alphas[id] = 0.25 + 0.5 * (i % 2);
    }
    auto repnow = estimate_power(alphas, records);
    auto b = power_breakdown(repnow);
    double share_sum = 0, group_sum = 0;
    for (auto& [id, s] : b.per_instance_share) share_sum += s;
    for (auto& g : b.groups) group_sum += g.contribution_mw;
    CHECK_THAT(share_sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(group_sum, Catch::Matchers::WithinRel(repnow.total_mw, 1e-12));
    CHECK(b.groups.size() == 3);
  }
  SECTION("ifft group dominates a synthetic LTE-shaped record set") {
    std::map<std::string, IpPowerRecord> records{
        {"coder", rec("channel_coder", 9.5, 2.1)},   {"qam", rec("qam_mapper", 6.2, 1.4)},
        {"alamouti", rec("alamouti", 7.8, 1.9)},     {"grid0", rec("grid_mapper", 15, 3.5)},
        {"grid1", rec("grid_mapper", 15, 3.5)},      {"ifft0", rec("ifft", 52, 13)},
        {"ifft1", rec("ifft", 52, 13)},              {"cp0", rec("cp_inserter", 10, 3)},
        {"cp1", rec("cp_inserter", 10, 3)}};
    auto b = power_breakdown(cumulative_power(records));
    const BreakdownGroup* top = &b.groups[0];
    for (const auto& g : b.groups)
      if (g.share > top->share) top = &g;
    CHECK(top->block_type == "ifft");
  }
  SECTION("zero total is rejected") {
    auto rep = estimate_power({{"a", 0.0}}, {{"a", rec("t", 10, 0)}});
    CHECK_THROWS_AS(power_breakdown(rep), ValidationError);
  }
}

TEST_CASE("relative error arithmetic") {
  CHECK(relative_error_percent(5.0, 5.0) == 0.0);
  CHECK_THAT(relative_error_percent(122.72, 118.64), Catch::Matchers::WithinAbs(3.44, 0.05));
  CHECK_THAT(relative_error_percent(192.47, 118.64), Catch::Matchers::WithinAbs(62.0, 0.5));
  CHECK_THROWS_AS(relative_error_percent(1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(relative_error_percent(1.0, -3.0), ValidationError);
}

TEST_CASE("scaling all records scales totals and keeps shares") {
  std::map<std::string, IpPowerRecord> records{{"a", rec("x", 30, 10)},
                                               {"b", rec("y", 70, 20)}};
  std::map<std::string, double> alphas{{"a", 0.3}, {"b", 0.8}};
  auto base = estimate_power(alphas, records);
  auto bb = power_breakdown(base);
  const double k = 3.5;
  for (auto& [id, r] : records) {
    r.p_active_mw *= k;
    r.p_idle_mw *= k;
  }
  auto scaled = estimate_power(alphas, records);
  CHECK_THAT(scaled.total_mw, Catch::Matchers::WithinRel(k * base.total_mw, 1e-12));
  auto sb = power_breakdown(scaled);
  for (std::size_t i = 0; i < bb.per_instance_share.size(); ++i)
    CHECK_THAT(sb.per_instance_share[i].second,
               Catch::Matchers::WithinAbs(bb.per_instance_share[i].second, 1e-12));
}

TEST_CASE("report serialization") {
  auto rep = estimate_power({{"a", 0.5}}, {{"a", rec("t", 100, 20)}}, "app_1");
  auto j = report_to_json(rep);
  CHECK(j["application"] == "app_1");
  CHECK(j["method"] == "activity_weighted");
  CHECK(j["total_mw"] == 60.0);
  const std::string csv = report_to_csv(rep);
  CHECK_THAT(csv, Catch::Matchers::ContainsSubstring(
                      "instance_id,alpha,p_active_mw,p_idle_mw,contribution_mw,share"));
  CHECK_THAT(csv, Catch::Matchers::ContainsSubstring("a,0.5,100,20,60,1"));
  const std::string bcsv = breakdown_to_csv(rep);
  CHECK_THAT(bcsv, Catch::Matchers::ContainsSubstring("block_type,contribution_mw,share"));
  CHECK_THAT(bcsv, Catch::Matchers::ContainsSubstring("t,60,1"));
}
