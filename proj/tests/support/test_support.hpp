#pragma once

#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "actisim/blocks.hpp"
#include "actisim/sim.hpp"

namespace actisim_test {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag = "work") {
    path = fs::temp_directory_path() /
           ("actisim_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

// ---------------------------------------------------------------------------
// Per-cycle brute-force reference engine. Same firing semantics as the event
// kernel, implemented as a naive cycle scan: at every cycle, deliver due
// tokens, then fire ready instances in declaration order until a fixpoint.
// Used as the independent activity/energy oracle for small systems.
// ---------------------------------------------------------------------------

struct StepperResult {
  std::map<std::string, std::uint64_t> active_cycles;
  std::map<std::string, std::vector<actisim::ActivityInterval>> firings;  // unmerged
  std::map<std::string, std::uint64_t> sink_items;
  actisim::Cycle t_sim = 0;
};

inline StepperResult step_simulate(const actisim::SystemModel& model,
                                   const actisim::SimOptions& opts,
                                   actisim::Cycle hard_cap = 10'000'000) {
  using namespace actisim;
  const auto& topo = model.topology;
  const std::size_t n = topo.instances.size();

  BlockEnv env{opts.seed};
  std::vector<std::unique_ptr<Block>> blocks;
  for (const auto& d : topo.instances) blocks.push_back(model.registry->make(d, env));

  struct Chan {
    std::deque<TokenPtr> visible;
    std::vector<std::pair<Cycle, TokenPtr>> in_flight;  // FIFO, nondecreasing cycles
    std::uint64_t committed = 0;
  };
  std::vector<Chan> chan(model.channels.size());
  std::vector<Cycle> next_ready(n, 0);
  std::vector<std::uint64_t> sink_items(n, 0);
  StepperResult res;
  for (const auto& d : topo.instances) res.firings[d.id] = {};

  auto quota_met = [&] {
    if (opts.stop.kind != StopCondition::Kind::sink_items) return false;
    for (std::size_t i = 0; i < n; ++i)
      if (model.is_sink[i] && sink_items[i] < opts.stop.value) return false;
    return true;
  };

  Cycle c = 0;
  for (;; ++c) {
    if (opts.stop.kind == StopCondition::Kind::cycles && c >= opts.stop.value) {
      res.t_sim = opts.stop.value;
      break;
    }
    if (c >= hard_cap) throw std::runtime_error("stepper: hard cycle cap reached");

    for (auto& ch : chan) {
      while (!ch.in_flight.empty() && ch.in_flight.front().first <= c) {
        ch.visible.push_back(std::move(ch.in_flight.front().second));
        ch.in_flight.erase(ch.in_flight.begin());
      }
    }

    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (c < next_ready[i]) continue;
        std::vector<std::deque<TokenPtr>> views;
        for (int chix : model.in_channels[i]) views.push_back(chan[chix].visible);
        auto plan = blocks[i]->plan(views);
        if (!plan) continue;
        bool blocked = false;
        for (std::size_t q = 0; q < model.out_channels[i].size(); ++q)
          if (chan[model.out_channels[i][q]].committed + plan->produce[q] >
              static_cast<std::uint64_t>(model.channels[model.out_channels[i][q]].capacity))
            blocked = true;
        if (blocked) continue;

        std::vector<std::vector<TokenPtr>> consumed(model.in_channels[i].size());
        std::uint64_t items_in = 0;
        for (std::size_t q = 0; q < model.in_channels[i].size(); ++q) {
          auto& ch = chan[model.in_channels[i][q]];
          for (std::size_t k = 0; k < plan->consume[q]; ++k) {
            items_in += payload_items(*ch.visible.front());
            consumed[q].push_back(std::move(ch.visible.front()));
            ch.visible.pop_front();
            ch.committed--;
          }
        }
        std::vector<std::vector<TokenPtr>> produced(model.out_channels[i].size());
        blocks[i]->fire(*plan, consumed, produced);
        const Cycle latency = plan->latency.value_or(topo.instances[i].latency_cycles);
        const Cycle ii = std::max<Cycle>(
            1, plan->initiation_interval.value_or(topo.instances[i].initiation_interval_cycles));
        for (std::size_t q = 0; q < model.out_channels[i].size(); ++q) {
          auto& ch = chan[model.out_channels[i][q]];
          for (auto& tok : produced[q]) {
            ch.committed++;
            if (latency == 0) ch.visible.push_back(std::move(tok));
            else ch.in_flight.emplace_back(c + latency, std::move(tok));
          }
        }
        res.firings[topo.instances[i].id].push_back({c, c + latency});
        next_ready[i] = c + ii;
        if (model.is_sink[i]) sink_items[i] += items_in;
        changed = true;
      }
    }

    if (quota_met()) {
      res.t_sim = c + 1;
      break;
    }
    if (opts.stop.kind == StopCondition::Kind::sink_items) {
      // nothing in flight and nothing fireable later: the state is frozen
      bool pending = false;
      for (const auto& ch : chan) pending |= !ch.in_flight.empty();
      for (std::size_t i = 0; i < n && !pending; ++i) pending |= next_ready[i] > c;
      if (!pending) throw actisim::DeadlockError("stepper: deadlock");
    }
  }

  // Per-cycle active flags from the recorded firings, clipped to t_sim.
  for (const auto& d : topo.instances) {
    std::vector<char> flags(res.t_sim, 0);
    for (const auto& f : res.firings[d.id])
      for (Cycle t = f.begin; t < std::min<Cycle>(f.end, res.t_sim); ++t) flags[t] = 1;
    std::uint64_t active = 0;
    for (char fl : flags) active += fl;
    res.active_cycles[d.id] = active;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (model.is_sink[i]) res.sink_items[topo.instances[i].id] = sink_items[i];
  return res;
}

// ---------------------------------------------------------------------------
// Random small systems over the generic worker/source/sink blocks: either a
// straight chain or a 2-way diamond, with random latencies, initiation
// intervals and channel capacities.
// ---------------------------------------------------------------------------

inline actisim::Topology random_system(std::mt19937_64& rng, int max_workers = 4) {
  using namespace actisim;
  auto ri = [&rng](int lo, int hi) {
    return static_cast<int>(lo + rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  Topology t;
  t.clock_mhz = 50;

  InstanceDesc src{"src", "token_source", {}, {}, static_cast<Cycle>(ri(0, 4)),
                   static_cast<Cycle>(ri(1, 4)), false};
  src.options["tokens"] = ParamValue(ri(1, 40));
  t.instances.push_back(src);

  const bool diamond = max_workers >= 4 && (rng() & 1u);
  auto worker = [&](const std::string& id, int in_ports, int out_ports) {
    InstanceDesc w{id, "worker", {}, {}, static_cast<Cycle>(ri(0, 20)),
                   static_cast<Cycle>(ri(1, 8)), true};
    if (in_ports != 1) w.options["in_ports"] = ParamValue(in_ports);
    if (out_ports != 1) w.options["out_ports"] = ParamValue(out_ports);
    t.instances.push_back(w);
  };
  auto wire = [&](const std::string& a, const std::string& ap, const std::string& b,
                  const std::string& bp) {
    t.channels.push_back({{a, ap}, {b, bp}, ri(1, 4)});
  };

  if (diamond) {
    worker("split", 1, 2);
    worker("left", 1, 1);
    worker("right", 1, 1);
    worker("join", 2, 1);
    wire("src", "out", "split", "in0");
    wire("split", "out0", "left", "in0");
    wire("split", "out1", "right", "in0");
    wire("left", "out0", "join", "in0");
    wire("right", "out0", "join", "in1");
    wire("join", "out0", "sink", "in");
  } else {
    const int k = ri(1, max_workers);
    for (int i = 0; i < k; ++i) worker("w" + std::to_string(i), 1, 1);
    wire("src", "out", "w0", "in0");
    for (int i = 1; i < k; ++i)
      wire("w" + std::to_string(i - 1), "out0", "w" + std::to_string(i), "in0");
    wire("w" + std::to_string(k - 1), "out0", "sink", "in");
  }
  InstanceDesc sink{"sink", "sink", {}, {}, 0, 1, false};
  t.instances.push_back(sink);
  return t;
}

// ---------------------------------------------------------------------------
// Quadrature oracle for the ergodic MISO capacity: E[log2(1 + gamma * X)]
// with X ~ Gamma(nt, 1), evaluated by composite Simpson over the density.
// Independent of the Monte Carlo implementation under test.
// ---------------------------------------------------------------------------

inline double gamma_capacity_quadrature(int nt, double gamma) {
  double factorial = 1;
  for (int i = 2; i < nt; ++i) factorial *= i;
  auto f = [&](double x) {
    return std::log2(1.0 + gamma * x) * std::pow(x, nt - 1) * std::exp(-x) / factorial;
  };
  const double a = 0.0, b = 70.0;
  const int n = 200000;  // even
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace actisim_test
