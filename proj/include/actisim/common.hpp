#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace actisim {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input files (JSON/CSV/scenario/topology).
struct ParseError : Error {
  using Error::Error;
};

// Violated preconditions or structural invariants.
struct ValidationError : Error {
  using Error::Error;
};

// A lookup that names exactly what is missing.
struct NotFoundError : Error {
  using Error::Error;
};

struct DuplicateKeyError : Error {
  using Error::Error;
};

// Simulation cannot make progress and the stop condition is unmet.
struct DeadlockError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Logging (verbosity from ACTISIM_LOG: error|warn|info|debug or 0..3)
// ---------------------------------------------------------------------------

enum class LogLevel : int { error = 0, warn = 1, info = 2, debug = 3 };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("ACTISIM_LOG");
    if (!env) return LogLevel::warn;
    std::string_view v(env);
    if (v == "error" || v == "0") return LogLevel::error;
    if (v == "warn" || v == "1") return LogLevel::warn;
    if (v == "info" || v == "2") return LogLevel::info;
    if (v == "debug" || v == "3") return LogLevel::debug;
    return LogLevel::warn;
  }();
  return level;
}

inline void log(LogLevel lvl, std::string_view msg) {
  if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
  static std::mutex mu;
  static constexpr const char* names[] = {"error", "warn", "info", "debug"};
  std::lock_guard<std::mutex> lock(mu);
  std::fprintf(stderr, "[actisim][%s] %.*s\n", names[static_cast<int>(lvl)],
               static_cast<int>(msg.size()), msg.data());
}

// ---------------------------------------------------------------------------
// Small utilities
// ---------------------------------------------------------------------------

inline std::string read_file_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed: " + path.string());
}

// Shortest round-trip decimal representation.
inline std::string fmt_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Per-application seed derivation; stable across run orderings.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  return splitmix64(root ^ splitmix64(stream));
}

}  // namespace actisim
