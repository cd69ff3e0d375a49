#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "actisim/common.hpp"
#include "actisim/fft.hpp"
#include "actisim/params.hpp"

namespace actisim {

// ---------------------------------------------------------------------------
// MISO ergodic capacity and energy efficiency:
//   C  = W * E[ log2(1 + ||h||^2 * Pt * G / Nt) ],  G = PL / (N0 * W)
//   EE = C / (Pt + Pcircuit)   [bit/J]
// Fading entries are i.i.d. CN(0,1) (unit-variance Rayleigh magnitude) and
// ||h||^2 sums the per-antenna gains.
// ---------------------------------------------------------------------------

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double watt_to_dbm(double w) {
  if (!(w > 0)) throw ValidationError("watt_to_dbm needs positive power");
  return 30.0 + 10.0 * std::log10(w);
}

struct EeParams {
  double w_hz = 0;
  int nt = 2;
  double n0_dbm_hz = -174.0;
  double pl_db = 0.0;       // path loss (positive dB = attenuation)
  bool normalized = true;   // PL/(N0*W) = 1

  double gain() const {
    if (normalized) return 1.0;
    const double n0_w_hz = dbm_to_watt(n0_dbm_hz);
    return std::pow(10.0, -pl_db / 10.0) / (n0_w_hz * w_hz);
  }
};

struct FadingSample {
  std::vector<Cplx> h;
  double norm_sq() const {
    double s = 0;
    for (const auto& c : h) s += std::norm(c);
    return s;
  }
};

// Deterministic across platforms: Box-Muller over mt19937_64 draws rather
// than std::normal_distribution (whose algorithm is implementation-defined).
inline std::vector<FadingSample> sample_channel(int nt, std::size_t n, std::uint64_t seed) {
  if (nt < 1) throw ValidationError("nt must be >= 1");
  if (n < 1) throw ValidationError("need at least one fading sample");
  std::mt19937_64 rng(seed);
  auto u_open = [&rng] {  // (0, 1]
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
  };
  auto u_half = [&rng] {  // [0, 1)
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  std::vector<FadingSample> samples(n);
  const double two_pi = 2.0 * std::numbers::pi;
  for (auto& s : samples) {
    s.h.resize(nt);
    for (auto& c : s.h) {
      const double r = std::sqrt(-2.0 * std::log(u_open()));
      const double phi = two_pi * u_half();
      // scale by 1/sqrt(2): unit variance per complex entry
      c = Cplx(r * std::cos(phi) * std::numbers::sqrt2 / 2.0,
               r * std::sin(phi) * std::numbers::sqrt2 / 2.0);
    }
  }
  return samples;
}

inline double average_capacity(const EeParams& params, double pt_w,
                               const std::vector<FadingSample>& samples) {
  if (samples.empty()) throw ValidationError("average_capacity: empty sample set");
  if (pt_w < 0) throw ValidationError("average_capacity: negative transmit power");
  if (!(params.w_hz > 0)) throw ValidationError("average_capacity: bandwidth must be positive");
  const double g = params.gain() * pt_w / static_cast<double>(params.nt);
  double acc = 0;
  for (const auto& s : samples) acc += std::log2(1.0 + s.norm_sq() * g);
  return params.w_hz * acc / static_cast<double>(samples.size());
}

inline double energy_efficiency(double capacity_bps, double pt_w, double p_circuit_w) {
  const double total = pt_w + p_circuit_w;
  if (!(total > 0)) throw ValidationError("energy efficiency undefined for zero total power");
  return capacity_bps / total;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct EePoint {
  double pt_dbm = 0;
  double pt_w = 0;
  double p_circuit_w = 0;
  double p_total_w = 0;
  double p_total_dbm = 0;
  double capacity_bps = 0;
  double ee_bit_per_joule = 0;
};

struct EeCurve {
  std::string application;
  std::string mode;  // without_circuit | with_circuit
  std::vector<EePoint> points;
};

struct EeSweepEntry {
  std::string application;
  double w_hz = 0;
  double p_circuit_mw = 0;
};

// "a:b:s" inclusive range, or a single value.
inline std::vector<double> parse_pt_range(const std::string& spec) {
  std::vector<double> out;
  const auto c1 = spec.find(':');
  if (c1 == std::string::npos) {
    out.push_back(ParamValue::parse(spec).as_double());
    return out;
  }
  const auto c2 = spec.find(':', c1 + 1);
  if (c2 == std::string::npos)
    throw ParseError("bad pt range '" + spec + "' (expected start:stop:step)");
  const double start = ParamValue::parse(spec.substr(0, c1)).as_double();
  const double stop = ParamValue::parse(spec.substr(c1 + 1, c2 - c1 - 1)).as_double();
  const double step = ParamValue::parse(spec.substr(c2 + 1)).as_double();
  if (!(step > 0) || stop < start)
    throw ParseError("bad pt range '" + spec + "' (need stop >= start, step > 0)");
  for (double v = start; v <= stop + 1e-9; v += step) out.push_back(v);
  return out;
}

// One common fading block for every curve and every point: fair comparison
// across applications/modes and exact monotonicity in pt.
inline std::vector<EeCurve> ee_sweep(const std::vector<EeSweepEntry>& entries,
                                     const std::vector<double>& pt_dbm,
                                     const EeParams& base, std::size_t n_samples,
                                     std::uint64_t seed) {
  if (pt_dbm.empty()) throw ValidationError("ee_sweep: empty pt range");
  const auto samples = sample_channel(base.nt, n_samples, seed);
  std::vector<EeCurve> curves;
  for (const auto& entry : entries) {
    EeParams params = base;
    params.w_hz = entry.w_hz;
    for (const bool with_circuit : {false, true}) {
      EeCurve curve;
      curve.application = entry.application;
      curve.mode = with_circuit ? "with_circuit" : "without_circuit";
      for (double dbm : pt_dbm) {
        EePoint pt;
        pt.pt_dbm = dbm;
        pt.pt_w = dbm_to_watt(dbm);
        pt.p_circuit_w = with_circuit ? entry.p_circuit_mw / 1000.0 : 0.0;
        pt.p_total_w = pt.pt_w + pt.p_circuit_w;
        pt.p_total_dbm = watt_to_dbm(pt.p_total_w);
        pt.capacity_bps = average_capacity(params, pt.pt_w, samples);
        pt.ee_bit_per_joule = energy_efficiency(pt.capacity_bps, pt.pt_w, pt.p_circuit_w);
        curve.points.push_back(pt);
      }
      curves.push_back(std::move(curve));
    }
  }
  return curves;
}

inline std::string ee_curves_to_csv(const std::vector<EeCurve>& curves) {
  std::string out = "application,mode,pt_dbm,p_circuit_mw,p_total_dbm,capacity_bps,ee\n";
  for (const auto& c : curves)
    for (const auto& p : c.points)
      out += c.application + "," + c.mode + "," + fmt_double(p.pt_dbm) + "," +
             fmt_double(p.p_circuit_w * 1000.0) + "," + fmt_double(p.p_total_dbm) + "," +
             fmt_double(p.capacity_bps) + "," + fmt_double(p.ee_bit_per_joule) + "\n";
  return out;
}

inline EeParams ee_params_from_json(const json& j, const std::string& where = "<ee-params>") {
  EeParams p;
  try {
    p.nt = j.value("nt", 2);
    p.n0_dbm_hz = j.value("n0_dbm_hz", -174.0);
    p.pl_db = j.value("pl_db", 0.0);
    p.normalized = j.value("normalized", true);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
  if (p.nt < 1) throw ValidationError(where + ": nt must be >= 1");
  return p;
}

}  // namespace actisim
