#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "actisim/lte.hpp"
#include "actisim/sim.hpp"

namespace actisim {

// ---------------------------------------------------------------------------
// Built-in behavioural blocks.
//
// Fixed-work blocks (coder, mapper, alamouti, ifft, worker, sources, sinks)
// take latency/initiation interval from the topology. Blocks whose work
// varies per firing (grid mapper ingest vs emit, cyclic prefix 160 vs 144)
// override both per firing; everything else about their timing still models
// one payload item per cycle.
// ---------------------------------------------------------------------------

namespace blocks {

inline const BitVec& expect_bits(const TokenPayload& p, const char* who) {
  if (!std::holds_alternative<BitVec>(p))
    throw ValidationError(std::string(who) + ": expected a bit payload");
  return std::get<BitVec>(p);
}

inline const CplxVec& expect_samples(const TokenPayload& p, const char* who) {
  if (!std::holds_alternative<CplxVec>(p))
    throw ValidationError(std::string(who) + ": expected a complex-sample payload");
  return std::get<CplxVec>(p);
}

class BitSource : public Block {
 public:
  BitSource(const InstanceDesc& desc, const BlockEnv& env) {
    const Params p = desc.merged_params();
    block_bits_ = static_cast<std::size_t>(get_int_or(p, "block_bits", 1024));
    limit_ = static_cast<std::uint64_t>(get_int_or(p, "blocks", 0));  // 0 = unbounded
    rng_.seed(splitmix64(env.seed ^ fnv1a64(desc.id)));
  }
  std::vector<std::string> input_ports() const override { return {}; }
  std::vector<std::string> output_ports() const override { return {"out"}; }
  std::optional<FiringPlan> plan(const std::vector<std::deque<TokenPtr>>&) const override {
    if (limit_ != 0 && produced_ >= limit_) return std::nullopt;
    return FiringPlan{{}, {1}, std::nullopt, std::nullopt};
  }
  void fire(const FiringPlan&, std::vector<std::vector<TokenPtr>>&,
            std::vector<std::vector<TokenPtr>>& out) override {
    BitVec bits(block_bits_);
    std::uint64_t word = 0;
    int have = 0;
    for (auto& b : bits) {
      if (have == 0) {
        word = rng_();
        have = 64;
      }
      b = static_cast<std::uint8_t>(word & 1u);
      word >>= 1;
      --have;
    }
    out[0].push_back(make_token(std::move(bits)));
    ++produced_;
  }

 private:
  std::size_t block_bits_ = 1024;
  std::uint64_t limit_ = 0;
  std::uint64_t produced_ = 0;
  std::mt19937_64 rng_;
};

// Test/generic source: emits `tokens` tokens of `items` zero bits each.
class TokenSource : public Block {
 public:
  TokenSource(const InstanceDesc& desc, const BlockEnv&) {
    const Params p = desc.merged_params();
    tokens_ = static_cast<std::uint64_t>(get_int_or(p, "tokens", 1));
    items_ = static_cast<std::size_t>(get_int_or(p, "items", 1));
  }
  std::vector<std::string> input_ports() const override { return {}; }
  std::vector<std::string> output_ports() const override { return {"out"}; }
  std::optional<FiringPlan> plan(const std::vector<std::deque<TokenPtr>>&) const override {
    if (produced_ >= tokens_) return std::nullopt;
    return FiringPlan{{}, {1}, std::nullopt, std::nullopt};
  }
  void fire(const FiringPlan&, std::vector<std::vector<TokenPtr>>&,
            std::vector<std::vector<TokenPtr>>& out) override {
    out[0].push_back(make_token(BitVec(items_, 0)));
    ++produced_;
  }

 private:
  std::uint64_t tokens_ = 1;
  std::size_t items_ = 1;
  std::uint64_t produced_ = 0;
};

class ChannelCoder : public Block {
 public:
  ChannelCoder(const InstanceDesc& desc, const BlockEnv&) {
    block_ = static_cast<std::size_t>(get_int_or(desc.merged_params(), "code_block_size", 1024));
  }
  std::vector<std::string> input_ports() const override { return {"in"}; }
  std::vector<std::string> output_ports() const override { return {"out"}; }
  std::optional<FiringPlan> plan(const std::vector<std::deque<TokenPtr>>& in) const override {
    if (in[0].empty()) return std::nullopt;
    return FiringPlan{{1}, {1}, std::nullopt, std::nullopt};
  }
  void fire(const FiringPlan&, std::vector<std::vector<TokenPtr>>& consumed,
            std::vector<std::vector<TokenPtr>>& out) override {
    const BitVec& bits = expect_bits(*consumed[0][0], "channel_coder");
    out[0].push_back(make_token(encode_channel(bits, block_)));
  }

 private:
  std::size_t block_ = 1024;
};

class QamMapper : public Block {
 public:
  QamMapper(const InstanceDesc& desc, const BlockEnv&) {
    const Params p = desc.merged_params();
    mod_ = modulation_from_string(get_string_or(p, "modulation", "QPSK"));
    if (auto q = get_int(p, "quantization_bits"); q && *q > 0) q_bits_ = static_cast<int>(*q);
  }
  std::vector<std::string> input_ports() const override { return {"in"}; }
  std::vector<std::string> output_ports() const override { return {"out"}; }
  std::optional<FiringPlan> plan(const std::vector<std::deque<TokenPtr>>& in) const override {
    if (in[0].empty()) return std::nullopt;
    return FiringPlan{{1}, {1}, std::nullopt, std::nullopt};
  }
  void fire(const FiringPlan&, std::vector<std::vector<TokenPtr>>& consumed,
            std::vector<std::vector<TokenPtr>>& out) override {
    const BitVec& bits = expect_bits(*consumed[0][0], "qam_mapper");
    CplxVec symbols = map_qam(bits, mod_);
    if (q_bits_) symbols = quantize(symbols, *q_bits_).samples;
    out[0].push_back(make_token(std::move(symbols)));
  }

 private:
  Modulation mod_ = Modulation::qpsk;
  std::optional<int> q_bits_;
};

class Alamouti : public Block {
 public:
  Alamouti(const InstanceDesc&, const BlockEnv&) {}
  std::vector<std::string> input_ports() const override { return {"in"}; }
  std::vector<std::string> output_ports() const override { return {"ant0", "ant1"}; }
  std::optional<FiringPlan> plan(const std::vector<std::deque<TokenPtr>>& in) const override {
    if (in[0].empty()) return std::nullopt;
    return FiringPlan{{1}, {1, 1}, std::nullopt, std::nullopt};
  }
  void fire(const FiringPlan&, std::vector<std::vector<TokenPtr>>& consumed,
            std::vector<std::vector<TokenPtr>>& out) override {
    const CplxVec& symbols = expect_samples(*consumed[0][0], "alamouti");
    AlamoutiOutput enc = alamouti_encode(symbols);
    out[0].push_back(make_token(std::move(enc.ant0)));
    out[1].push_back(make_token(std::move(enc.ant1)));
  }
};

// Streams data symbols into whole grid columns following the frame plan;
// pilot columns are emitted without consuming data. Ingesting a symbol batch
// takes one cycle per symbol, emitting a column one cycle per subcarrier.
class GridMapper : public Block {
 public:
  GridMapper(const InstanceDesc& desc, const BlockEnv&) {
    const Params p = desc.merged_params();
    ofdm_ = ofdm_params_for_fft(static_cast<int>(require_int(p, "fft_size", "grid_mapper")));
    plan_ = FramePlan::with_period(static_cast<int>(get_int_or(p, "pilot_period", 11)));
    if (auto q = get_int(p, "quantization_bits"); q && *q > 0) {
      plan_.pilot_value = Cplx(quantize_component(plan_.pilot_value.real(), static_cast<int>(*q)),
                               quantize_component(plan_.pilot_value.imag(), static_cast<int>(*q)));
    }
  }
  std::vector<std::string> input_ports() const override { return {"in"}; }
  std::vector<std::string> output_ports() const override { return {"out"}; }
  std::optional<FiringPlan> plan(const std::vector<std::deque<TokenPtr>>& in) const override {
    const Cycle used = static_cast<Cycle>(ofdm_.used_subcarriers);
    if (plan_.is_pilot(col_) || buffer_.size() >= static_cast<std::size_t>(used))
      return FiringPlan{{0}, {1}, used, used};
    if (!in[0].empty()) {
      const Cycle items = payload_items(*in[0].front());
      return FiringPlan{{1}, {0}, items, items};
    }
    return std::nullopt;
  }
  void fire(const FiringPlan& plan, std::vector<std::vector<TokenPtr>>& consumed,
            std::vector<std::vector<TokenPtr>>& out) override {
    if (plan.consume[0] == 1) {
      const CplxVec& symbols = expect_samples(*consumed[0][0], "grid_mapper");
      buffer_.insert(buffer_.end(), symbols.begin(), symbols.end());
      return;
    }
    CplxVec column;
    column.reserve(ofdm_.used_subcarriers);
    if (plan_.is_pilot(col_)) {
      column.assign(ofdm_.used_subcarriers, plan_.pilot_value);
    } else {
      for (int i = 0; i < ofdm_.used_subcarriers; ++i) {
        column.push_back(buffer_.front());
        buffer_.pop_front();
      }
    }
    ++col_;
    out[0].push_back(make_token(std::move(column)));
  }

 private:
  OfdmParams ofdm_;
  FramePlan plan_;
  std::deque<Cplx> buffer_;
  std::int64_t col_ = 0;
};

class Ifft : public Block {
 public:
  Ifft(const InstanceDesc& desc, const BlockEnv&) {
    const Params p = desc.merged_params();
    fft_size_ = static_cast<int>(require_int(p, "fft_size", "ifft"));
    if (auto q = get_int(p, "quantization_bits"); q && *q > 0) q_bits_ = static_cast<int>(*q);
    const std::string s = get_string_or(p, "scaling", "unitary");
    if (s == "unitary") scaling_ = IfftScaling::unitary;
    else if (s == "recip_n") scaling_ = IfftScaling::recip_n;
    else throw ValidationError("ifft: unknown scaling '" + s + "'");
  }
  std::vector<std::string> input_ports() const override { return {"in"}; }
  std::vector<std::string> output_ports() const override { return {"out"}; }
  std::optional<FiringPlan> plan(const std::vector<std::deque<TokenPtr>>& in) const override {
    if (in[0].empty()) return std::nullopt;
    return FiringPlan{{1}, {1}, std::nullopt, std::nullopt};
  }
  void fire(const FiringPlan&, std::vector<std::vector<TokenPtr>>& consumed,
            std::vector<std::vector<TokenPtr>>& out) override {
    const CplxVec& column = expect_samples(*consumed[0][0], "ifft");
    CplxVec body = fft_inverse(map_subcarriers(column, fft_size_));
    const double scale = scaling_ == IfftScaling::unitary
                             ? 1.0 / std::sqrt(static_cast<double>(fft_size_))
                             : 1.0 / static_cast<double>(fft_size_);
    for (auto& v : body) v *= scale;
    if (q_bits_) body = quantize(body, *q_bits_).samples;
    out[0].push_back(make_token(std::move(body)));
  }

 private:
  int fft_size_ = 0;
  std::optional<int> q_bits_;
  IfftScaling scaling_ = IfftScaling::unitary;
};

// Prepends the position-dependent cyclic prefix; emits at one sample per
// cycle, so latency varies between the first and later symbols of a slot.
class CpInserter : public Block {
 public:
  CpInserter(const InstanceDesc& desc, const BlockEnv&) {
    const Params p = desc.merged_params();
    fft_size_ = static_cast<int>(require_int(p, "fft_size", "cp_inserter"));
    mode_ = cp_mode_from_string(get_string_or(p, "cp_mode", "normal"));
    symbols_per_slot_ = mode_ == CpMode::normal ? 7 : 6;
  }
  std::vector<std::string> input_ports() const override { return {"in"}; }
  std::vector<std::string> output_ports() const override { return {"out"}; }
  std::optional<FiringPlan> plan(const std::vector<std::deque<TokenPtr>>& in) const override {
    if (in[0].empty()) return std::nullopt;
    const Cycle len =
        static_cast<Cycle>(fft_size_ + cp_length(fft_size_, mode_, sym_in_slot_));
    return FiringPlan{{1}, {1}, len, len};
  }
  void fire(const FiringPlan&, std::vector<std::vector<TokenPtr>>& consumed,
            std::vector<std::vector<TokenPtr>>& out) override {
    const CplxVec& body = expect_samples(*consumed[0][0], "cp_inserter");
    if (static_cast<int>(body.size()) != fft_size_)
      throw ValidationError("cp_inserter: body length " + std::to_string(body.size()) +
                            " != fft_size " + std::to_string(fft_size_));
    out[0].push_back(
        make_token(prepend_cyclic_prefix(body, cp_length(fft_size_, mode_, sym_in_slot_))));
    sym_in_slot_ = (sym_in_slot_ + 1) % symbols_per_slot_;
  }

 private:
  int fft_size_ = 0;
  CpMode mode_ = CpMode::normal;
  int symbols_per_slot_ = 7;
  int sym_in_slot_ = 0;
};

class Sink : public Block {
 public:
  Sink(const InstanceDesc& desc, const BlockEnv&) {
    max_items_ = static_cast<std::uint64_t>(get_int_or(desc.merged_params(), "max_items", 0));
  }
  std::vector<std::string> input_ports() const override { return {"in"}; }
  std::vector<std::string> output_ports() const override { return {}; }
  std::optional<FiringPlan> plan(const std::vector<std::deque<TokenPtr>>& in) const override {
    if (in[0].empty()) return std::nullopt;
    if (max_items_ != 0 && received_ >= max_items_) return std::nullopt;
    return FiringPlan{{1}, {}, 0, 1};
  }
  void fire(const FiringPlan&, std::vector<std::vector<TokenPtr>>& consumed,
            std::vector<std::vector<TokenPtr>>&) override {
    received_ += payload_items(*consumed[0][0]);
  }

 private:
  std::uint64_t max_items_ = 0;
  std::uint64_t received_ = 0;
};

// Generic n-in/n-out relay for tests and synthetic systems: one token per
// port per firing, first input forwarded to every output.
class Worker : public Block {
 public:
  Worker(const InstanceDesc& desc, const BlockEnv&) {
    const Params p = desc.merged_params();
    n_in_ = static_cast<int>(get_int_or(p, "in_ports", 1));
    n_out_ = static_cast<int>(get_int_or(p, "out_ports", 1));
    if (n_in_ < 1) throw ValidationError("worker: in_ports must be >= 1");
    if (n_out_ < 0) throw ValidationError("worker: out_ports must be >= 0");
  }
  std::vector<std::string> input_ports() const override { return numbered("in", n_in_); }
  std::vector<std::string> output_ports() const override { return numbered("out", n_out_); }
  std::optional<FiringPlan> plan(const std::vector<std::deque<TokenPtr>>& in) const override {
    for (const auto& q : in)
      if (q.empty()) return std::nullopt;
    FiringPlan p;
    p.consume.assign(n_in_, 1);
    p.produce.assign(n_out_, 1);
    return p;
  }
  void fire(const FiringPlan&, std::vector<std::vector<TokenPtr>>& consumed,
            std::vector<std::vector<TokenPtr>>& out) override {
    for (int j = 0; j < n_out_; ++j) out[j].push_back(consumed[0][0]);
  }

 private:
  static std::vector<std::string> numbered(const std::string& stem, int n) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back(stem + std::to_string(i));
    return v;
  }
  int n_in_ = 1;
  int n_out_ = 1;
};

}  // namespace blocks

namespace detail {
template <class T>
void register_block_type(BlockRegistry& r, const std::string& name) {
  r.register_block(name, [](const InstanceDesc& d, const BlockEnv& e) {
    return std::unique_ptr<Block>(new T(d, e));
  });
}
}  // namespace detail

inline const BlockRegistry& builtin_registry() {
  static const BlockRegistry reg = [] {
    BlockRegistry r;
    detail::register_block_type<blocks::BitSource>(r, "bit_source");
    detail::register_block_type<blocks::TokenSource>(r, "token_source");
    detail::register_block_type<blocks::ChannelCoder>(r, "channel_coder");
    detail::register_block_type<blocks::QamMapper>(r, "qam_mapper");
    detail::register_block_type<blocks::Alamouti>(r, "alamouti");
    detail::register_block_type<blocks::GridMapper>(r, "grid_mapper");
    detail::register_block_type<blocks::Ifft>(r, "ifft");
    detail::register_block_type<blocks::CpInserter>(r, "cp_inserter");
    detail::register_block_type<blocks::Sink>(r, "sink");
    detail::register_block_type<blocks::Worker>(r, "worker");
    return r;
  }();
  return reg;
}

// ---------------------------------------------------------------------------
// LTE downlink PDSCH transmitter, MISO 2x1 with Alamouti encoding:
// source -> coder -> QAM mapper -> alamouti -> 2x (grid mapper -> IFFT ->
// cyclic prefix -> sink). Per-firing latencies model one payload item per
// cycle; the IFFT takes one cycle per point.
// ---------------------------------------------------------------------------

struct LteAppConfig {
  OfdmParams ofdm;
  Modulation modulation = Modulation::qpsk;
  int code_block_size = 1024;
  std::optional<int> q_bits = 14;
  int pilot_period = 11;
  double clock_mhz = 50.0;
  int tx_antennas = 2;
};

inline Topology build_lte_topology(const LteAppConfig& cfg,
                                   std::uint64_t sink_quota_items = 0) {
  if (cfg.tx_antennas != 2)
    throw ValidationError("the LTE chain is fixed at tx_antennas = 2 (MISO 2x1)");
  Topology t;
  t.clock_mhz = cfg.clock_mhz;

  const Cycle block = static_cast<Cycle>(cfg.code_block_size);
  const Cycle coded_bits = block * 3;
  const Cycle symbols = coded_bits / bits_per_symbol(cfg.modulation);
  const Cycle used = static_cast<Cycle>(cfg.ofdm.used_subcarriers);
  const Cycle fft = static_cast<Cycle>(cfg.ofdm.fft_size);
  const Cycle cp_common = fft + cp_length(cfg.ofdm.fft_size, cfg.ofdm.cp_mode, 1);

  Params common;
  common["clock_mhz"] = ParamValue(cfg.clock_mhz);
  auto with = [&common](std::initializer_list<std::pair<std::string, ParamValue>> kv) {
    Params p = common;
    for (const auto& [k, v] : kv) p[k] = v;
    return p;
  };
  const ParamValue q_bits = cfg.q_bits ? ParamValue(*cfg.q_bits) : ParamValue(0);

  InstanceDesc src{"src", "bit_source", {}, {}, block, block, false};
  src.options["block_bits"] = ParamValue(static_cast<std::int64_t>(block));

  InstanceDesc coder{"coder",
                     "channel_coder",
                     with({{"code_block_size", ParamValue(cfg.code_block_size)},
                           {"coding_rate", ParamValue("1/3")}}),
                     {},
                     block,
                     block,
                     true};
  InstanceDesc qam{"qam",
                   "qam_mapper",
                   with({{"modulation", ParamValue(to_string(cfg.modulation))},
                         {"quantization_bits", q_bits}}),
                   {},
                   symbols,
                   symbols,
                   true};
  InstanceDesc alam{"alamouti",
                    "alamouti",
                    with({{"quantization_bits", q_bits}}),
                    {},
                    symbols,
                    symbols,
                    true};
  t.instances = {src, coder, qam, alam};

  for (int a = 0; a < 2; ++a) {
    const std::string s = std::to_string(a);
    InstanceDesc grid{"grid" + s,
                      "grid_mapper",
                      with({{"fft_size", ParamValue(cfg.ofdm.fft_size)},
                            {"pilot_period", ParamValue(cfg.pilot_period)},
                            {"quantization_bits", q_bits}}),
                      {},
                      used,
                      used,
                      true};
    InstanceDesc ifft{"ifft" + s,
                      "ifft",
                      with({{"fft_size", ParamValue(cfg.ofdm.fft_size)},
                            {"quantization_bits", q_bits}}),
                      {},
                      fft,
                      fft,
                      true};
    if (cfg.q_bits) ifft.options["scaling"] = ParamValue("recip_n");
    InstanceDesc cp{"cp" + s,
                    "cp_inserter",
                    with({{"fft_size", ParamValue(cfg.ofdm.fft_size)},
                          {"cp_mode", ParamValue(to_string(cfg.ofdm.cp_mode))},
                          {"quantization_bits", q_bits}}),
                    {},
                    cp_common,
                    cp_common,
                    true};
    InstanceDesc sink{"sink" + s, "sink", {}, {}, 0, 1, false};
    if (sink_quota_items != 0)
      sink.options["max_items"] = ParamValue(static_cast<std::int64_t>(sink_quota_items));
    t.instances.push_back(grid);
    t.instances.push_back(ifft);
    t.instances.push_back(cp);
    t.instances.push_back(sink);
  }

  auto wire = [&t](const std::string& a, const std::string& ap, const std::string& b,
                   const std::string& bp) {
    t.channels.push_back({{a, ap}, {b, bp}, kDefaultChannelCapacity});
  };
  wire("src", "out", "coder", "in");
  wire("coder", "out", "qam", "in");
  wire("qam", "out", "alamouti", "in");
  for (int a = 0; a < 2; ++a) {
    const std::string s = std::to_string(a);
    wire("alamouti", "ant" + s, "grid" + s, "in");
    wire("grid" + s, "out", "ifft" + s, "in");
    wire("ifft" + s, "out", "cp" + s, "in");
    wire("cp" + s, "out", "sink" + s, "in");
  }
  return t;
}

}  // namespace actisim
