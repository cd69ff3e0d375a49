#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>

#include "actisim/common.hpp"
#include "json.hpp"

namespace actisim {

using json = nlohmann::ordered_json;

// A configuration parameter value. Numbers with an exact integer value are
// canonicalized to int64 so that e.g. clock_mhz=50 and clock_mhz=50.0 form
// the same key.
class ParamValue {
 public:
  ParamValue() : v_(std::int64_t{0}) {}
  ParamValue(std::int64_t i) : v_(i) {}
  ParamValue(int i) : v_(static_cast<std::int64_t>(i)) {}
  ParamValue(double d) { assign(d); }
  ParamValue(std::string s) : v_(std::move(s)) {}
  ParamValue(const char* s) : v_(std::string(s)) {}

  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_double() const { return std::holds_alternative<double>(v_); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_number() const { return !is_string(); }

  std::int64_t as_int() const {
    if (is_int()) return std::get<std::int64_t>(v_);
    throw ValidationError("parameter value is not an integer: " + to_string());
  }
  double as_double() const {
    if (is_int()) return static_cast<double>(std::get<std::int64_t>(v_));
    if (is_double()) return std::get<double>(v_);
    throw ValidationError("parameter value is not numeric: " + to_string());
  }
  const std::string& as_string() const {
    if (is_string()) return std::get<std::string>(v_);
    throw ValidationError("parameter value is not a string: " + to_string());
  }

  std::string to_string() const {
    if (is_int()) return std::to_string(std::get<std::int64_t>(v_));
    if (is_double()) return fmt_double(std::get<double>(v_));
    return std::get<std::string>(v_);
  }

  json to_json() const {
    if (is_int()) return json(std::get<std::int64_t>(v_));
    if (is_double()) return json(std::get<double>(v_));
    return json(std::get<std::string>(v_));
  }

  static ParamValue from_json(const json& j) {
    if (j.is_string()) return ParamValue(j.get<std::string>());
    if (j.is_number_integer()) return ParamValue(j.get<std::int64_t>());
    if (j.is_number_unsigned()) {
      auto u = j.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(INT64_MAX))
        throw ParseError("parameter value out of range: " + j.dump());
      return ParamValue(static_cast<std::int64_t>(u));
    }
    if (j.is_number_float()) return ParamValue(j.get<double>());
    if (j.is_boolean()) return ParamValue(std::string(j.get<bool>() ? "true" : "false"));
    throw ParseError("parameter value must be a string or a number, got: " + j.dump());
  }

  // For `k=v` lists: integer, then double, then verbatim string.
  static ParamValue parse(std::string_view text) {
    {
      std::int64_t i = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
      if (ec == std::errc() && p == text.data() + text.size()) return ParamValue(i);
    }
    {
      std::string tmp(text);
      char* end = nullptr;
      double d = std::strtod(tmp.c_str(), &end);
      if (end == tmp.c_str() + tmp.size() && !tmp.empty()) return ParamValue(d);
    }
    return ParamValue(std::string(text));
  }

  friend bool operator==(const ParamValue& a, const ParamValue& b) { return a.v_ == b.v_; }
  friend bool operator<(const ParamValue& a, const ParamValue& b) { return a.v_ < b.v_; }

 private:
  void assign(double d) {
    if (std::isfinite(d) && std::nearbyint(d) == d && std::fabs(d) <= 9007199254740992.0) {
      v_ = static_cast<std::int64_t>(d);
    } else {
      v_ = d;
    }
  }
  std::variant<std::int64_t, double, std::string> v_;
};

// Sorted by name, so equality is order-insensitive by construction.
using Params = std::map<std::string, ParamValue>;

inline json params_to_json(const Params& p) {
  json j = json::object();
  for (const auto& [k, v] : p) j[k] = v.to_json();
  return j;
}

inline Params params_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("parameters must be a JSON object, got: " + j.dump());
  Params p;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!p.emplace(it.key(), ParamValue::from_json(it.value())).second)
      throw ParseError("duplicate parameter name: " + it.key());
  }
  return p;
}

// `k=v;k=v` form used by the characterization CSV.
inline std::string format_params_kv(const Params& p) {
  std::string out;
  for (const auto& [k, v] : p) {
    if (!out.empty()) out += ';';
    out += k;
    out += '=';
    out += v.to_string();
  }
  return out;
}

inline Params parse_params_kv(std::string_view text) {
  Params p;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find(';', pos);
    std::string_view item = text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    if (!item.empty()) {
      std::size_t eq = item.find('=');
      if (eq == std::string_view::npos)
        throw ParseError("malformed parameter item (expected k=v): " + std::string(item));
      std::string name(item.substr(0, eq));
      if (name.empty()) throw ParseError("empty parameter name in: " + std::string(item));
      if (!p.emplace(name, ParamValue::parse(item.substr(eq + 1))).second)
        throw ParseError("duplicate parameter name: " + name);
    }
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Typed accessors used by blocks and the scenario layer
// ---------------------------------------------------------------------------

inline std::optional<std::int64_t> get_int(const Params& p, const std::string& name) {
  auto it = p.find(name);
  if (it == p.end()) return std::nullopt;
  return it->second.as_int();
}

inline std::int64_t get_int_or(const Params& p, const std::string& name, std::int64_t dflt) {
  return get_int(p, name).value_or(dflt);
}

inline std::int64_t require_int(const Params& p, const std::string& name, const std::string& who) {
  auto v = get_int(p, name);
  if (!v) throw ValidationError(who + ": missing required integer parameter '" + name + "'");
  return *v;
}

inline std::optional<double> get_double(const Params& p, const std::string& name) {
  auto it = p.find(name);
  if (it == p.end()) return std::nullopt;
  return it->second.as_double();
}

inline std::optional<std::string> get_string(const Params& p, const std::string& name) {
  auto it = p.find(name);
  if (it == p.end()) return std::nullopt;
  return it->second.as_string();
}

inline std::string get_string_or(const Params& p, const std::string& name, const std::string& dflt) {
  return get_string(p, name).value_or(dflt);
}

}  // namespace actisim
