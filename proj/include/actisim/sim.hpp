#pragma once

#include <chrono>
#include <complex>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <variant>
#include <vector>

#include "actisim/common.hpp"
#include "actisim/lte.hpp"
#include "actisim/params.hpp"
#include "actisim/power_library.hpp"

namespace actisim {

using Cycle = std::uint64_t;

// ---------------------------------------------------------------------------
// Tokens: one token is an opaque batch of payload items moving over a
// channel. Channel occupancy is counted in tokens, not items.
// ---------------------------------------------------------------------------

using TokenPayload = std::variant<BitVec, CplxVec>;
using TokenPtr = std::shared_ptr<const TokenPayload>;

inline std::size_t payload_items(const TokenPayload& p) {
  return std::visit([](const auto& v) { return v.size(); }, p);
}

inline TokenPtr make_token(BitVec v) { return std::make_shared<TokenPayload>(std::move(v)); }
inline TokenPtr make_token(CplxVec v) { return std::make_shared<TokenPayload>(std::move(v)); }

inline void append_payload(TokenPayload& dst, const TokenPayload& src) {
  if (dst.index() != src.index())
    throw ValidationError("mixed payload types on one stream");
  std::visit(
      [&](auto& d) {
        using T = std::decay_t<decltype(d)>;
        const auto& s = std::get<T>(src);
        d.insert(d.end(), s.begin(), s.end());
      },
      dst);
}

// ---------------------------------------------------------------------------
// Topology description (what the topology JSON file carries)
// ---------------------------------------------------------------------------

inline constexpr int kDefaultChannelCapacity = 16;

struct PortRef {
  std::string instance;
  std::string port;
  std::string to_string() const { return instance + "." + port; }
};

struct ChannelDesc {
  PortRef src;
  PortRef dst;
  int capacity = kDefaultChannelCapacity;
  std::string name() const { return src.to_string() + "->" + dst.to_string(); }
};

struct InstanceDesc {
  std::string id;
  std::string block_type;
  Params parameters;      // characterization configuration; forms the IpConfigKey
  Params options;         // functional-only knobs, never part of the key
  Cycle latency_cycles = 0;
  Cycle initiation_interval_cycles = 1;
  bool powered = true;    // false for measurement plumbing (sources/sinks)

  IpConfigKey config_key() const { return IpConfigKey{block_type, parameters}; }
  // What blocks read: options shadow parameters.
  Params merged_params() const {
    Params m = parameters;
    for (const auto& [k, v] : options) m[k] = v;
    return m;
  }
};

struct Topology {
  std::vector<InstanceDesc> instances;   // declaration order = tie-break order
  std::vector<ChannelDesc> channels;
  double clock_mhz = 0;

  json to_json() const {
    json j = json::object();
    j["clock_mhz"] = clock_mhz;
    json insts = json::array();
    for (const auto& d : instances) {
      json ij = json::object();
      ij["instance_id"] = d.id;
      ij["block_type"] = d.block_type;
      ij["parameters"] = params_to_json(d.parameters);
      if (!d.options.empty()) ij["options"] = params_to_json(d.options);
      ij["latency_cycles"] = d.latency_cycles;
      ij["initiation_interval_cycles"] = d.initiation_interval_cycles;
      if (!d.powered) ij["powered"] = false;
      insts.push_back(std::move(ij));
    }
    j["instances"] = std::move(insts);
    json chans = json::array();
    for (const auto& c : channels) {
      json cj = json::object();
      cj["src"] = c.src.to_string();
      cj["dst"] = c.dst.to_string();
      cj["capacity"] = c.capacity;
      chans.push_back(std::move(cj));
    }
    j["channels"] = std::move(chans);
    return j;
  }

  static PortRef parse_port_ref(const std::string& s) {
    auto dot = s.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == s.size())
      throw ParseError("bad port reference (expected instance.port): " + s);
    return PortRef{s.substr(0, dot), s.substr(dot + 1)};
  }

  static Topology from_json(const json& j) {
    Topology t;
    t.clock_mhz = j.value("clock_mhz", 0.0);
    for (const auto& ij : j.at("instances")) {
      InstanceDesc d;
      d.id = ij.at("instance_id").get<std::string>();
      d.block_type = ij.at("block_type").get<std::string>();
      if (ij.contains("parameters")) d.parameters = params_from_json(ij["parameters"]);
      if (ij.contains("options")) d.options = params_from_json(ij["options"]);
      d.latency_cycles = ij.value("latency_cycles", 0ULL);
      d.initiation_interval_cycles = ij.value("initiation_interval_cycles", 1ULL);
      d.powered = ij.value("powered", true);
      t.instances.push_back(std::move(d));
    }
    for (const auto& cj : j.at("channels")) {
      ChannelDesc c;
      c.src = parse_port_ref(cj.at("src").get<std::string>());
      c.dst = parse_port_ref(cj.at("dst").get<std::string>());
      c.capacity = cj.value("capacity", kDefaultChannelCapacity);
      t.channels.push_back(std::move(c));
    }
    return t;
  }

  static Topology load(const fs::path& path) {
    try {
      return from_json(json::parse(read_file_text(path)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("topology file " + path.string() + ": " + e.what());
    }
  }
};

// ---------------------------------------------------------------------------
// Block behaviour interface
// ---------------------------------------------------------------------------

// A firing consumes plan.consume[i] tokens from each input port and emits
// plan.produce[j] tokens on each output port. The instance is ACTIVE during
// [t, t+latency) of each firing; emitted tokens become visible downstream at
// t+latency. latency/initiation_interval default to the instance values from
// the topology; blocks whose per-firing work varies may override them.
struct FiringPlan {
  std::vector<std::size_t> consume;
  std::vector<std::size_t> produce;
  std::optional<Cycle> latency;
  std::optional<Cycle> initiation_interval;
};

// plan() must be side-effect free; the kernel calls fire() immediately after
// a successful plan with exactly the planned tokens.
class Block {
 public:
  virtual ~Block() = default;
  virtual std::vector<std::string> input_ports() const = 0;
  virtual std::vector<std::string> output_ports() const = 0;
  virtual std::optional<FiringPlan> plan(
      const std::vector<std::deque<TokenPtr>>& inputs) const = 0;
  virtual void fire(const FiringPlan& plan,
                    std::vector<std::vector<TokenPtr>>& consumed,
                    std::vector<std::vector<TokenPtr>>& produced) = 0;
};

struct BlockEnv {
  std::uint64_t seed = 1;
};

using BlockFactory =
    std::function<std::unique_ptr<Block>(const InstanceDesc&, const BlockEnv&)>;

class BlockRegistry {
 public:
  void register_block(const std::string& type, BlockFactory factory) {
    factories_[type] = std::move(factory);
  }
  bool contains(const std::string& type) const { return factories_.count(type) != 0; }
  std::unique_ptr<Block> make(const InstanceDesc& desc, const BlockEnv& env) const {
    auto it = factories_.find(desc.block_type);
    if (it == factories_.end())
      throw NotFoundError("unknown block type: " + desc.block_type);
    return it->second(desc, env);
  }

 private:
  std::map<std::string, BlockFactory> factories_;
};

// ---------------------------------------------------------------------------
// Validated system
// ---------------------------------------------------------------------------

struct SystemModel {
  Topology topology;
  const BlockRegistry* registry = nullptr;
  double clock_mhz = 0;

  struct ChannelInfo {
    int src_instance, src_port;
    int dst_instance, dst_port;
    int capacity;
    std::string name;
  };
  std::vector<ChannelInfo> channels;
  // per instance, per port index -> channel index
  std::vector<std::vector<int>> in_channels;
  std::vector<std::vector<int>> out_channels;
  std::vector<std::vector<std::string>> in_port_names;
  std::vector<std::vector<std::string>> out_port_names;
  std::vector<bool> is_source, is_sink;

  int instance_index(const std::string& id) const {
    for (std::size_t i = 0; i < topology.instances.size(); ++i)
      if (topology.instances[i].id == id) return static_cast<int>(i);
    return -1;
  }
};

inline SystemModel build_system(const Topology& topo, const BlockRegistry& registry,
                                const PowerLibrary* library = nullptr) {
  SystemModel m;
  m.topology = topo;
  m.registry = &registry;
  m.clock_mhz = topo.clock_mhz;

  std::map<std::string, int> by_id;
  for (std::size_t i = 0; i < topo.instances.size(); ++i) {
    const auto& d = topo.instances[i];
    if (d.id.empty()) throw ValidationError("instance with empty id");
    if (!by_id.emplace(d.id, static_cast<int>(i)).second)
      throw ValidationError("duplicate instance id: " + d.id);
    if (d.initiation_interval_cycles < 1)
      throw ValidationError(d.id + ": initiation_interval_cycles must be >= 1");
    if (!registry.contains(d.block_type))
      throw NotFoundError("instance " + d.id + ": unknown block type '" + d.block_type + "'");
  }

  // Probe instances for port lists.
  BlockEnv probe_env;
  const std::size_t n = topo.instances.size();
  m.in_port_names.resize(n);
  m.out_port_names.resize(n);
  m.in_channels.resize(n);
  m.out_channels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto block = registry.make(topo.instances[i], probe_env);
    m.in_port_names[i] = block->input_ports();
    m.out_port_names[i] = block->output_ports();
    m.in_channels[i].assign(m.in_port_names[i].size(), -1);
    m.out_channels[i].assign(m.out_port_names[i].size(), -1);
  }

  auto port_index = [](const std::vector<std::string>& names, const std::string& port) {
    for (std::size_t p = 0; p < names.size(); ++p)
      if (names[p] == port) return static_cast<int>(p);
    return -1;
  };

  for (const auto& c : topo.channels) {
    if (c.capacity < 1)
      throw ValidationError("channel " + c.name() + ": capacity must be >= 1");
    auto endpoint = [&](const PortRef& ref, bool is_src) {
      auto it = by_id.find(ref.instance);
      if (it == by_id.end())
        throw ValidationError("dangling channel endpoint: instance '" + ref.instance +
                              "' is never declared (channel " + c.name() + ")");
      const int inst = it->second;
      const auto& names = is_src ? m.out_port_names[inst] : m.in_port_names[inst];
      const int port = port_index(names, ref.port);
      if (port < 0)
        throw ValidationError("dangling channel endpoint: " + ref.to_string() +
                              " names no " + (is_src ? std::string("output") : std::string("input")) +
                              " port of block type '" + topo.instances[inst].block_type + "'");
      return std::pair<int, int>(inst, port);
    };
    auto [si, sp] = endpoint(c.src, true);
    auto [di, dp] = endpoint(c.dst, false);
    if (m.out_channels[si][sp] != -1)
      throw ValidationError("output port " + c.src.to_string() + " wired twice");
    if (m.in_channels[di][dp] != -1)
      throw ValidationError("input port " + c.dst.to_string() + " wired twice");
    const int idx = static_cast<int>(m.channels.size());
    m.channels.push_back({si, sp, di, dp, c.capacity, c.name()});
    m.out_channels[si][sp] = idx;
    m.in_channels[di][dp] = idx;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = topo.instances[i];
    for (std::size_t p = 0; p < m.in_channels[i].size(); ++p)
      if (m.in_channels[i][p] == -1)
        throw ValidationError(d.id + ": input port '" + m.in_port_names[i][p] +
                              "' is not connected");
    for (std::size_t p = 0; p < m.out_channels[i].size(); ++p)
      if (m.out_channels[i][p] == -1)
        throw ValidationError(d.id + ": output port '" + m.out_port_names[i][p] +
                              "' is not connected");
    m.is_source.push_back(m.in_channels[i].empty());
    m.is_sink.push_back(m.out_channels[i].empty());
  }

  // Reachability: every instance on a path from some source to some sink.
  {
    std::vector<char> fwd(n, 0), bwd(n, 0);
    std::vector<int> stack;
    for (std::size_t i = 0; i < n; ++i)
      if (m.is_source[i]) {
        fwd[i] = 1;
        stack.push_back(static_cast<int>(i));
      }
    while (!stack.empty()) {
      int i = stack.back();
      stack.pop_back();
      for (int ch : m.out_channels[i])
        if (!fwd[m.channels[ch].dst_instance]) {
          fwd[m.channels[ch].dst_instance] = 1;
          stack.push_back(m.channels[ch].dst_instance);
        }
    }
    for (std::size_t i = 0; i < n; ++i)
      if (m.is_sink[i]) {
        bwd[i] = 1;
        stack.push_back(static_cast<int>(i));
      }
    while (!stack.empty()) {
      int i = stack.back();
      stack.pop_back();
      for (int ch : m.in_channels[i])
        if (!bwd[m.channels[ch].src_instance]) {
          bwd[m.channels[ch].src_instance] = 1;
          stack.push_back(m.channels[ch].src_instance);
        }
    }
    for (std::size_t i = 0; i < n; ++i)
      if (!fwd[i] || !bwd[i])
        throw ValidationError("instance " + topo.instances[i].id +
                              " is not on a source-to-sink path");
  }

  if (library) {
    for (const auto& d : topo.instances) {
      if (!d.powered) continue;
      const auto key = d.config_key();
      if (!library->contains(key))
        throw NotFoundError("instance " + d.id + ": unresolvable config key " +
                            key.to_string());
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

struct StopCondition {
  enum class Kind { cycles, sink_items };
  Kind kind = Kind::cycles;
  std::uint64_t value = 0;

  static StopCondition cycles(std::uint64_t n) { return {Kind::cycles, n}; }
  static StopCondition sink_items(std::uint64_t n) { return {Kind::sink_items, n}; }
};

struct SimOptions {
  StopCondition stop;
  std::uint64_t seed = 1;
};

struct ActivityInterval {
  Cycle begin = 0;
  Cycle end = 0;  // half-open [begin, end)
  friend bool operator==(const ActivityInterval& a, const ActivityInterval& b) {
    return a.begin == b.begin && a.end == b.end;
  }
};

struct ActivityTrace {
  std::vector<std::string> instance_order;
  std::map<std::string, std::vector<ActivityInterval>> intervals;
  Cycle t_sim_cycles = 0;
};

struct ChannelStats {
  std::uint64_t produced = 0;   // tokens that became visible
  std::uint64_t consumed = 0;   // tokens popped by the reader
  std::uint64_t occupancy = 0;  // visible tokens left at the end
};

struct SimulationResult {
  ActivityTrace trace;
  std::map<std::string, TokenPayload> outputs;       // per sink with data
  std::map<std::string, std::uint64_t> sink_items;   // per sink, payload items
  std::map<std::string, ChannelStats> token_counts;  // per channel name
  std::map<std::string, std::uint64_t> firings;
  double wall_time_s = 0;
};

namespace detail {

struct Event {
  Cycle cycle;
  std::uint64_t seq;
  enum class Kind { arrival, eval } kind;
  int target;  // channel index for arrival, instance index for eval
  TokenPtr payload;
};

struct EventOrder {
  bool operator()(const Event& a, const Event& b) const {
    if (a.cycle != b.cycle) return a.cycle > b.cycle;
    return a.seq > b.seq;
  }
};

}  // namespace detail

inline SimulationResult simulate(const SystemModel& model, const SimOptions& opts) {
  const auto wall_start = std::chrono::steady_clock::now();
  const auto& topo = model.topology;
  const std::size_t n = topo.instances.size();

  if (opts.stop.kind == StopCondition::Kind::sink_items) {
    bool any_sink = false;
    for (std::size_t i = 0; i < n; ++i) any_sink |= model.is_sink[i];
    if (!any_sink)
      throw ValidationError("sink_items stop condition on a system without sinks");
  }

  BlockEnv env{opts.seed};
  std::vector<std::unique_ptr<Block>> blocks;
  blocks.reserve(n);
  for (const auto& d : topo.instances) blocks.push_back(model.registry->make(d, env));

  struct RtChannel {
    std::deque<TokenPtr> visible;
    std::uint64_t committed = 0;  // visible + scheduled arrivals (capacity bound)
    ChannelStats stats;
  };
  std::vector<RtChannel> channels(model.channels.size());

  struct RtInstance {
    Cycle next_ready = 0;
    std::vector<ActivityInterval> intervals;
    std::uint64_t firings = 0;
    std::uint64_t sink_items = 0;
  };
  std::vector<RtInstance> inst(n);

  std::priority_queue<detail::Event, std::vector<detail::Event>, detail::EventOrder> queue;
  std::uint64_t seq = 0;
  for (std::size_t i = 0; i < n; ++i)
    queue.push({0, seq++, detail::Event::Kind::eval, static_cast<int>(i), nullptr});

  std::vector<TokenPayload> sink_payloads(n);
  std::vector<bool> sink_has_data(n, false);

  Cycle t_sim = 0;
  bool stopped = false;

  auto quota_met = [&] {
    if (opts.stop.kind != StopCondition::Kind::sink_items) return false;
    for (std::size_t i = 0; i < n; ++i)
      if (model.is_sink[i] && inst[i].sink_items < opts.stop.value) return false;
    return true;
  };

  auto record_interval = [&](std::size_t i, Cycle begin, Cycle end) {
    if (begin == end) return;
    auto& iv = inst[i].intervals;
    if (!iv.empty() && begin <= iv.back().end) {
      if (end > iv.back().end) iv.back().end = end;
    } else {
      iv.push_back({begin, end});
    }
  };

  auto describe_blocked = [&](Cycle at) {
    std::string msg = "deadlock: no schedulable event at cycle " + std::to_string(at) +
                      " and stop condition unmet;";
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::deque<TokenPtr>> views;
      for (int ch : model.in_channels[i]) views.push_back(channels[ch].visible);
      auto p = blocks[i]->plan(views);
      if (!p) {
        if (model.is_sink[i]) continue;
        msg += " " + topo.instances[i].id + " (cannot fire: ";
        if (model.in_channels[i].empty()) {
          msg += "source exhausted)";
        } else {
          for (std::size_t q = 0; q < model.in_channels[i].size(); ++q)
            msg += (q ? ", " : "") + std::string("in '") + model.in_port_names[i][q] + "'=" +
                   std::to_string(channels[model.in_channels[i][q]].visible.size()) + " tokens";
          msg += ")";
        }
        msg += ";";
      } else {
        for (std::size_t q = 0; q < model.out_channels[i].size(); ++q) {
          const auto& ch = channels[model.out_channels[i][q]];
          const auto cap = model.channels[model.out_channels[i][q]].capacity;
          if (ch.committed + p->produce[q] > static_cast<std::uint64_t>(cap))
            msg += " " + topo.instances[i].id + " (output '" + model.out_port_names[i][q] +
                   "' full: " + std::to_string(ch.committed) + "/" + std::to_string(cap) +
                   " tokens);";
        }
      }
    }
    return msg;
  };

  while (!stopped) {
    if (queue.empty()) {
      if (opts.stop.kind == StopCondition::Kind::cycles) {
        t_sim = opts.stop.value;
        break;
      }
      throw DeadlockError(describe_blocked(t_sim));
    }
    const Cycle c = queue.top().cycle;
    if (opts.stop.kind == StopCondition::Kind::cycles && c >= opts.stop.value) {
      t_sim = opts.stop.value;
      break;
    }
    // Apply every event scheduled for this cycle.
    while (!queue.empty() && queue.top().cycle == c) {
      detail::Event ev = queue.top();
      queue.pop();
      if (ev.kind == detail::Event::Kind::arrival) {
        channels[ev.target].visible.push_back(std::move(ev.payload));
        channels[ev.target].stats.produced++;
      }
    }
    t_sim = c;  // tracks the last processed cycle (for deadlock reporting)

    // Fire everything that can fire this cycle, in declaration order, until
    // no instance makes progress (same-cycle cascades with zero latency and
    // space freed by same-cycle consumption).
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (c < inst[i].next_ready) continue;
        std::vector<std::deque<TokenPtr>> views;
        views.reserve(model.in_channels[i].size());
        for (int ch : model.in_channels[i]) views.push_back(channels[ch].visible);
        auto plan = blocks[i]->plan(views);
        if (!plan) continue;
        if (plan->consume.size() != model.in_channels[i].size() ||
            plan->produce.size() != model.out_channels[i].size())
          throw Error("block " + topo.instances[i].id + ": malformed firing plan");
        bool blocked = false;
        for (std::size_t q = 0; q < model.in_channels[i].size(); ++q)
          if (plan->consume[q] > channels[model.in_channels[i][q]].visible.size())
            throw Error("block " + topo.instances[i].id + ": planned more tokens than visible");
        for (std::size_t q = 0; q < model.out_channels[i].size() && !blocked; ++q) {
          const auto cap = model.channels[model.out_channels[i][q]].capacity;
          if (channels[model.out_channels[i][q]].committed + plan->produce[q] >
              static_cast<std::uint64_t>(cap))
            blocked = true;
        }
        if (blocked) continue;

        // Consume.
        std::vector<std::vector<TokenPtr>> consumed(model.in_channels[i].size());
        std::uint64_t items_in = 0;
        for (std::size_t q = 0; q < model.in_channels[i].size(); ++q) {
          auto& ch = channels[model.in_channels[i][q]];
          for (std::size_t k = 0; k < plan->consume[q]; ++k) {
            TokenPtr tok = ch.visible.front();
            ch.visible.pop_front();
            ch.committed--;
            ch.stats.consumed++;
            items_in += payload_items(*tok);
            consumed[q].push_back(std::move(tok));
          }
        }
        std::vector<std::vector<TokenPtr>> produced(model.out_channels[i].size());
        blocks[i]->fire(*plan, consumed, produced);

        const Cycle latency =
            plan->latency.value_or(topo.instances[i].latency_cycles);
        const Cycle ii = std::max<Cycle>(
            1, plan->initiation_interval.value_or(topo.instances[i].initiation_interval_cycles));

        for (std::size_t q = 0; q < model.out_channels[i].size(); ++q) {
          if (produced[q].size() != plan->produce[q])
            throw Error("block " + topo.instances[i].id + ": produced token count differs from plan");
          auto& ch = channels[model.out_channels[i][q]];
          for (auto& tok : produced[q]) {
            ch.committed++;
            if (latency == 0) {
              ch.visible.push_back(std::move(tok));
              ch.stats.produced++;
            } else {
              queue.push({c + latency, seq++, detail::Event::Kind::arrival,
                          model.out_channels[i][q], std::move(tok)});
            }
          }
        }
        record_interval(i, c, c + latency);
        inst[i].firings++;
        inst[i].next_ready = c + ii;
        queue.push({c + ii, seq++, detail::Event::Kind::eval, static_cast<int>(i), nullptr});

        if (model.is_sink[i]) {
          inst[i].sink_items += items_in;
          for (auto& port_tokens : consumed)
            for (auto& tok : port_tokens) {
              if (!sink_has_data[i]) {
                sink_payloads[i] = *tok;
                sink_has_data[i] = true;
              } else {
                append_payload(sink_payloads[i], *tok);
              }
            }
        }
        changed = true;
      }
    }

    if (quota_met()) {
      t_sim = c + 1;
      stopped = true;
    }
  }

  // Assemble result; clip intervals to [0, t_sim).
  SimulationResult res;
  res.trace.t_sim_cycles = t_sim;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = topo.instances[i].id;
    res.trace.instance_order.push_back(id);
    std::vector<ActivityInterval> clipped;
    for (const auto& iv : inst[i].intervals) {
      if (iv.begin >= t_sim) break;
      clipped.push_back({iv.begin, std::min<Cycle>(iv.end, t_sim)});
    }
    res.trace.intervals[id] = std::move(clipped);
    res.firings[id] = inst[i].firings;
    if (model.is_sink[i]) {
      res.sink_items[id] = inst[i].sink_items;
      if (sink_has_data[i]) res.outputs[id] = std::move(sink_payloads[i]);
    }
  }
  for (std::size_t ci = 0; ci < channels.size(); ++ci) {
    auto st = channels[ci].stats;
    st.occupancy = channels[ci].visible.size();
    res.token_counts[model.channels[ci].name] = st;
  }
  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return res;
}

// ---------------------------------------------------------------------------
// Time-activity coefficients
// ---------------------------------------------------------------------------

inline std::map<std::string, double> activity_coefficients(const ActivityTrace& trace) {
  if (trace.t_sim_cycles == 0)
    throw ValidationError("activity coefficients undefined: t_sim_cycles = 0");
  std::map<std::string, double> alpha;
  for (const auto& [id, ivs] : trace.intervals) {
    std::uint64_t active = 0;
    for (const auto& iv : ivs) active += iv.end - iv.begin;
    alpha[id] = static_cast<double>(active) / static_cast<double>(trace.t_sim_cycles);
  }
  return alpha;
}

// CSV export: interval rows then one summary row per instance carrying alpha.
inline std::string trace_to_csv(const ActivityTrace& trace) {
  std::string out = "# t_sim_cycles=" + std::to_string(trace.t_sim_cycles) + "\n";
  out += "instance_id,t_start_cycles,t_end_cycles,alpha\n";
  const auto alpha = trace.t_sim_cycles
                         ? activity_coefficients(trace)
                         : std::map<std::string, double>{};
  for (const auto& id : trace.instance_order) {
    for (const auto& iv : trace.intervals.at(id))
      out += id + "," + std::to_string(iv.begin) + "," + std::to_string(iv.end) + ",\n";
  }
  for (const auto& id : trace.instance_order) {
    double a = alpha.count(id) ? alpha.at(id) : 0.0;
    out += id + ",,," + fmt_double(a) + "\n";
  }
  return out;
}

}  // namespace actisim
