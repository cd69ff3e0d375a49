#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "actisim/common.hpp"
#include "actisim/fft.hpp"

namespace actisim {

using BitVec = std::vector<std::uint8_t>;

// ---------------------------------------------------------------------------
// OFDM numerology
// ---------------------------------------------------------------------------

enum class CpMode { normal, extended };

inline std::string to_string(CpMode m) { return m == CpMode::normal ? "normal" : "extended"; }

inline CpMode cp_mode_from_string(const std::string& s) {
  if (s == "normal") return CpMode::normal;
  if (s == "extended") return CpMode::extended;
  throw ValidationError("unknown cp_mode: " + s + " (expected normal|extended)");
}

struct OfdmParams {
  double bandwidth_mhz = 0;
  int fft_size = 0;
  int used_subcarriers = 0;
  int resource_blocks = 0;
  int subcarrier_spacing_khz = 15;
  CpMode cp_mode = CpMode::normal;

  double sampling_rate_hz() const { return fft_size * 15000.0; }
  int symbols_per_slot() const { return cp_mode == CpMode::normal ? 7 : 6; }
};

namespace detail {
struct OfdmRow {
  double bw;
  int fft, used, rb;
};
inline constexpr std::array<OfdmRow, 6> kOfdmRows = {{{1.4, 128, 72, 6},
                                                      {3, 256, 180, 12},
                                                      {5, 512, 300, 25},
                                                      {10, 1024, 600, 50},
                                                      {15, 1536, 900, 75},
                                                      {20, 2048, 1200, 100}}};
}  // namespace detail

inline OfdmParams derive_ofdm_params(double bandwidth_mhz, CpMode cp = CpMode::normal) {
  for (const auto& row : detail::kOfdmRows) {
    if (row.bw == bandwidth_mhz)
      return OfdmParams{row.bw, row.fft, row.used, row.rb, 15, cp};
  }
  throw ValidationError("unsupported bandwidth_mhz: " + fmt_double(bandwidth_mhz) +
                        " (expected one of 1.4, 3, 5, 10, 15, 20)");
}

inline OfdmParams ofdm_params_for_fft(int fft_size, CpMode cp = CpMode::normal) {
  for (const auto& row : detail::kOfdmRows) {
    if (row.fft == fft_size) return OfdmParams{row.bw, row.fft, row.used, row.rb, 15, cp};
  }
  throw ValidationError("unsupported fft_size: " + std::to_string(fft_size) +
                        " (expected one of 128, 256, 512, 1024, 1536, 2048)");
}

// Cyclic prefix length in samples for the given symbol position in its slot.
inline int cp_length(int fft_size, CpMode mode, int symbol_index_in_slot) {
  if (mode == CpMode::extended) return 512 * fft_size / 2048;
  return (symbol_index_in_slot == 0 ? 160 : 144) * fft_size / 2048;
}

// Samples per 0.5 ms slot (identical for both CP modes).
inline std::int64_t slot_samples(int fft_size, CpMode mode) {
  std::int64_t total = 0;
  const int nsym = mode == CpMode::normal ? 7 : 6;
  for (int s = 0; s < nsym; ++s) total += fft_size + cp_length(fft_size, mode, s);
  return total;
}

// ---------------------------------------------------------------------------
// Channel coding: rate-1/3 systematic encoder.
//
// Two recursive convolutional parity streams (feedback 1+D^2+D^3, output
// 1+D+D^3), the second over a quadratic permutation pi(i) = (31*i + 64*i^2)
// mod K of the block. State is reset per block and there is no trellis
// termination, so output length is exactly 3x the input. Output ordering per
// input bit k: [systematic, parity1, parity2].
// ---------------------------------------------------------------------------

namespace detail {

inline BitVec rsc_parity(const BitVec& bits) {
  BitVec out(bits.size());
  unsigned s1 = 0, s2 = 0, s3 = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    unsigned a = (bits[i] ^ s2 ^ s3) & 1u;
    out[i] = static_cast<std::uint8_t>((a ^ s1 ^ s3) & 1u);
    s3 = s2;
    s2 = s1;
    s1 = a;
  }
  return out;
}

inline std::vector<std::size_t> quadratic_permutation(std::size_t k) {
  std::vector<std::size_t> perm(k);
  for (std::size_t i = 0; i < k; ++i) perm[i] = (31 * i + 64 * i * i) % k;
  // Guaranteed bijective for power-of-two K; verify for anything else.
  std::vector<std::uint8_t> seen(k, 0);
  for (std::size_t p : perm) {
    if (seen[p]) throw ValidationError("code_block_size " + std::to_string(k) +
                                       ": quadratic permutation is not bijective");
    seen[p] = 1;
  }
  return perm;
}

}  // namespace detail

inline BitVec encode_channel(const BitVec& bits, std::size_t code_block_size = 1024) {
  if (code_block_size == 0) throw ValidationError("code_block_size must be positive");
  if (bits.size() % code_block_size != 0)
    throw ValidationError("input length " + std::to_string(bits.size()) +
                          " is not a multiple of code_block_size " +
                          std::to_string(code_block_size));
  const auto perm = detail::quadratic_permutation(code_block_size);
  BitVec out;
  out.reserve(bits.size() * 3);
  for (std::size_t b = 0; b < bits.size(); b += code_block_size) {
    BitVec block(bits.begin() + b, bits.begin() + b + code_block_size);
    BitVec interleaved(code_block_size);
    for (std::size_t i = 0; i < code_block_size; ++i) interleaved[i] = block[perm[i]];
    BitVec p1 = detail::rsc_parity(block);
    BitVec p2 = detail::rsc_parity(interleaved);
    for (std::size_t i = 0; i < code_block_size; ++i) {
      out.push_back(block[i]);
      out.push_back(p1[i]);
      out.push_back(p2[i]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// QAM mapping (3GPP constellations, unit average symbol energy)
// ---------------------------------------------------------------------------

enum class Modulation { qpsk, qam16 };

inline Modulation modulation_from_string(const std::string& s) {
  if (s == "QPSK" || s == "qpsk") return Modulation::qpsk;
  if (s == "16QAM" || s == "16qam" || s == "QAM16") return Modulation::qam16;
  throw ValidationError("unknown modulation: " + s + " (expected QPSK|16QAM)");
}

inline std::string to_string(Modulation m) { return m == Modulation::qpsk ? "QPSK" : "16QAM"; }

inline int bits_per_symbol(Modulation m) { return m == Modulation::qpsk ? 2 : 4; }

inline CplxVec map_qam(const BitVec& bits, Modulation mod) {
  const int bps = bits_per_symbol(mod);
  if (bits.size() % static_cast<std::size_t>(bps) != 0)
    throw ValidationError("bit count " + std::to_string(bits.size()) +
                          " not divisible by bits per symbol " + std::to_string(bps));
  CplxVec out;
  out.reserve(bits.size() / bps);
  if (mod == Modulation::qpsk) {
    const double a = 1.0 / std::sqrt(2.0);
    for (std::size_t i = 0; i < bits.size(); i += 2) {
      out.emplace_back((1 - 2 * bits[i]) * a, (1 - 2 * bits[i + 1]) * a);
    }
  } else {
    const double a = 1.0 / std::sqrt(10.0);
    for (std::size_t i = 0; i < bits.size(); i += 4) {
      const int i0 = bits[i], q0 = bits[i + 1], i1 = bits[i + 2], q1 = bits[i + 3];
      const double re = (1 - 2 * i0) * (2 - (1 - 2 * i1)) * a;
      const double im = (1 - 2 * q0) * (2 - (1 - 2 * q1)) * a;
      out.emplace_back(re, im);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Alamouti space-time block code (2 TX antennas)
// ---------------------------------------------------------------------------

struct AlamoutiOutput {
  CplxVec ant0;
  CplxVec ant1;
};

// Consumes symbols in pairs (s1, s2); antenna 0 emits (s1, -s2*) and
// antenna 1 emits (s2, s1*) over the two symbol periods.
inline AlamoutiOutput alamouti_encode(const CplxVec& symbols) {
  if (symbols.size() % 2 != 0)
    throw ValidationError("alamouti: odd number of symbols at flush (" +
                          std::to_string(symbols.size()) + ")");
  AlamoutiOutput out;
  out.ant0.reserve(symbols.size());
  out.ant1.reserve(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); i += 2) {
    const Cplx s1 = symbols[i], s2 = symbols[i + 1];
    out.ant0.push_back(s1);
    out.ant0.push_back(-std::conj(s2));
    out.ant1.push_back(s2);
    out.ant1.push_back(std::conj(s1));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Frame plan and resource grid
// ---------------------------------------------------------------------------

// Repeating column pattern: within each period of `period` OFDM symbols the
// listed columns are whole pilot symbols, the rest carry data. period = 0
// disables pilots. The default is one pilot symbol per ten data symbols.
struct FramePlan {
  int period = 11;
  std::vector<int> pilot_columns = {0};
  Cplx pilot_value = Cplx(1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2);

  bool is_pilot(std::int64_t column) const {
    if (period <= 0) return false;
    const int pos = static_cast<int>(column % period);
    return std::find(pilot_columns.begin(), pilot_columns.end(), pos) != pilot_columns.end();
  }

  static FramePlan with_period(int period) {
    FramePlan p;
    p.period = period;
    p.pilot_columns = period > 0 ? std::vector<int>{0} : std::vector<int>{};
    return p;
  }
  static FramePlan none() { return with_period(0); }
};

struct ResourceGrid {
  int used_subcarriers = 0;
  int n_symbols = 0;
  CplxVec cells;                        // column-major: cells[col * used + row]
  std::vector<std::uint8_t> pilot_mask; // same shape
  std::size_t data_symbols_used = 0;
  bool underrun = false;                // fewer data symbols than data cells

  Cplx at(int row, int col) const { return cells[static_cast<std::size_t>(col) * used_subcarriers + row]; }
};

// Fills `n_symbols` columns from a per-antenna data symbol stream in
// subcarrier-major order; pilot columns carry the plan's pilot point; any
// unfilled data cell stays exactly zero (underrun is flagged, not an error).
inline ResourceGrid build_resource_grid(const CplxVec& symbols, const OfdmParams& params,
                                        const FramePlan& plan, int n_symbols,
                                        std::int64_t first_column = 0) {
  ResourceGrid g;
  g.used_subcarriers = params.used_subcarriers;
  g.n_symbols = n_symbols;
  g.cells.assign(static_cast<std::size_t>(params.used_subcarriers) * n_symbols, Cplx(0, 0));
  g.pilot_mask.assign(g.cells.size(), 0);
  std::size_t next = 0;
  for (int col = 0; col < n_symbols; ++col) {
    const std::size_t base = static_cast<std::size_t>(col) * params.used_subcarriers;
    if (plan.is_pilot(first_column + col)) {
      for (int row = 0; row < params.used_subcarriers; ++row) {
        g.cells[base + row] = plan.pilot_value;
        g.pilot_mask[base + row] = 1;
      }
    } else {
      for (int row = 0; row < params.used_subcarriers && next < symbols.size(); ++row)
        g.cells[base + row] = symbols[next++];
    }
  }
  g.data_symbols_used = next;
  // Count how many data cells the plan wanted.
  std::size_t data_cells = 0;
  for (int col = 0; col < n_symbols; ++col)
    if (!plan.is_pilot(first_column + col)) data_cells += params.used_subcarriers;
  g.underrun = next < data_cells;
  if (g.underrun)
    log(LogLevel::warn, "resource grid underrun: " + std::to_string(next) + " of " +
                            std::to_string(data_cells) + " data cells filled");
  return g;
}

// ---------------------------------------------------------------------------
// OFDM modulation
// ---------------------------------------------------------------------------

enum class IfftScaling { unitary, recip_n };  // 1/sqrt(N) vs 1/N

// Places `used` subcarriers symmetrically around DC (DC itself unused):
// column index i < used/2 maps to negative frequencies, the rest to positive.
inline CplxVec map_subcarriers(const CplxVec& column, int fft_size) {
  const int used = static_cast<int>(column.size());
  if (used >= fft_size)
    throw ValidationError("used_subcarriers must be smaller than fft_size");
  CplxVec bins(static_cast<std::size_t>(fft_size), Cplx(0, 0));
  const int half = used / 2;
  for (int i = 0; i < used; ++i) {
    const int f = i < half ? i - half : i - half + 1;
    const int bin = f < 0 ? fft_size + f : f;
    bins[bin] = column[i];
  }
  return bins;
}

// IFFT body only (no cyclic prefix).
inline CplxVec ofdm_modulate_body(const CplxVec& column, const OfdmParams& params,
                                  IfftScaling scaling = IfftScaling::unitary) {
  if (static_cast<int>(column.size()) != params.used_subcarriers)
    throw ValidationError("grid column length " + std::to_string(column.size()) +
                          " != used_subcarriers " + std::to_string(params.used_subcarriers));
  CplxVec bins = map_subcarriers(column, params.fft_size);
  CplxVec body = fft_inverse(bins);
  const double scale = scaling == IfftScaling::unitary
                           ? 1.0 / std::sqrt(static_cast<double>(params.fft_size))
                           : 1.0 / static_cast<double>(params.fft_size);
  for (auto& v : body) v *= scale;
  return body;
}

inline CplxVec prepend_cyclic_prefix(const CplxVec& body, int cp_len) {
  CplxVec out;
  out.reserve(body.size() + cp_len);
  out.insert(out.end(), body.end() - cp_len, body.end());
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

// One grid column -> one time-domain OFDM symbol of fft_size + cp samples.
inline CplxVec ofdm_modulate(const CplxVec& column, const OfdmParams& params,
                             int symbol_index_in_slot,
                             IfftScaling scaling = IfftScaling::unitary) {
  CplxVec body = ofdm_modulate_body(column, params, scaling);
  return prepend_cyclic_prefix(body, cp_length(params.fft_size, params.cp_mode,
                                               symbol_index_in_slot));
}

// ---------------------------------------------------------------------------
// Fixed-point quantization: signed fractional format, step 2^-(q_bits-1),
// round to nearest (ties to even), symmetric saturation at +/-(1 - step).
// step is a power of two, so x/step and code*step are exact and the
// half-LSB bound |q(x) - x| <= step/2 holds exactly inside the range.
// Saturation is silent and counted.
// ---------------------------------------------------------------------------

struct QuantizeResult {
  CplxVec samples;
  std::size_t saturated = 0;  // per-component saturation events
};

// Block-floating alternative to the fixed 1/N scaling (off by default):
// one shared exponent per block, mantissas normalized into (-1, 1) with the
// peak component in [0.5, 1).
struct BlockFloatResult {
  CplxVec mantissas;
  int exponent = 0;  // x = mantissa * 2^exponent
};

inline BlockFloatResult block_floating_normalize(const CplxVec& x) {
  double peak = 0;
  for (const Cplx& v : x)
    peak = std::max({peak, std::fabs(v.real()), std::fabs(v.imag())});
  BlockFloatResult r;
  if (peak > 0) std::frexp(peak, &r.exponent);
  const double scale = std::ldexp(1.0, -r.exponent);
  r.mantissas.reserve(x.size());
  for (const Cplx& v : x) r.mantissas.push_back(v * scale);
  return r;
}

inline double quantize_component(double x, int q_bits, std::size_t* saturated = nullptr) {
  const double step = std::ldexp(1.0, 1 - q_bits);
  const double max_code = static_cast<double>((1LL << (q_bits - 1)) - 1);
  double code = std::nearbyint(x / step);
  if (code > max_code) {
    code = max_code;
    if (saturated) ++*saturated;
  } else if (code < -max_code) {
    code = -max_code;
    if (saturated) ++*saturated;
  }
  return code * step;
}

inline QuantizeResult quantize(const CplxVec& x, int q_bits) {
  if (q_bits < 2 || q_bits > 32)
    throw ValidationError("q_bits out of range [2,32]: " + std::to_string(q_bits));
  QuantizeResult r;
  r.samples.reserve(x.size());
  for (const Cplx& v : x) {
    double re = quantize_component(v.real(), q_bits, &r.saturated);
    double im = quantize_component(v.imag(), q_bits, &r.saturated);
    r.samples.emplace_back(re, im);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Reference chain: coded bits through to per-antenna time-domain samples.
// Mirrors the streaming blocks exactly; used for functional cross-checks and
// for the fixed-point error-growth measurement (quantization is applied at
// the mapper output, the IFFT output and the CP output).
// ---------------------------------------------------------------------------

struct ChainConfig {
  OfdmParams ofdm;
  Modulation modulation = Modulation::qpsk;
  std::size_t code_block_size = 1024;
  FramePlan plan;
  std::optional<int> q_bits;  // nullopt = double-precision path
  IfftScaling scaling = IfftScaling::unitary;
};

struct ChainOutput {
  CplxVec ant0;
  CplxVec ant1;
  int n_columns = 0;
  std::size_t saturated = 0;
};

inline ChainOutput lte_chain_reference(const BitVec& info_bits, const ChainConfig& cfg,
                                       int n_columns) {
  ChainOutput out;
  out.n_columns = n_columns;
  BitVec coded = encode_channel(info_bits, cfg.code_block_size);
  CplxVec symbols = map_qam(coded, cfg.modulation);
  if (cfg.q_bits) {
    auto q = quantize(symbols, *cfg.q_bits);
    symbols = std::move(q.samples);
    out.saturated += q.saturated;
  }
  AlamoutiOutput ants = alamouti_encode(symbols);
  FramePlan plan = cfg.plan;
  if (cfg.q_bits)
    plan.pilot_value = Cplx(quantize_component(plan.pilot_value.real(), *cfg.q_bits),
                            quantize_component(plan.pilot_value.imag(), *cfg.q_bits));
  for (int ant = 0; ant < 2; ++ant) {
    const CplxVec& stream = ant == 0 ? ants.ant0 : ants.ant1;
    ResourceGrid grid = build_resource_grid(stream, cfg.ofdm, plan, n_columns);
    CplxVec& samples = ant == 0 ? out.ant0 : out.ant1;
    for (int col = 0; col < n_columns; ++col) {
      CplxVec column(grid.cells.begin() + static_cast<std::size_t>(col) * cfg.ofdm.used_subcarriers,
                     grid.cells.begin() +
                         static_cast<std::size_t>(col + 1) * cfg.ofdm.used_subcarriers);
      CplxVec body = ofdm_modulate_body(column, cfg.ofdm, cfg.scaling);
      if (cfg.q_bits) {
        auto q = quantize(body, *cfg.q_bits);
        body = std::move(q.samples);
        out.saturated += q.saturated;
      }
      CplxVec sym = prepend_cyclic_prefix(
          body, cp_length(cfg.ofdm.fft_size, cfg.ofdm.cp_mode,
                          col % cfg.ofdm.symbols_per_slot()));
      if (cfg.q_bits) {
        auto q = quantize(sym, *cfg.q_bits);
        sym = std::move(q.samples);
        out.saturated += q.saturated;
      }
      samples.insert(samples.end(), sym.begin(), sym.end());
    }
  }
  return out;
}

}  // namespace actisim
