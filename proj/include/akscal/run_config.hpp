#pragma once

// Validated command-line configuration.

#include "akscal/error.hpp"

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace akscal::cli {

inline constexpr int kMinN = 4;
inline constexpr int kMaxN = 32;
inline constexpr std::uint64_t kDefaultSeed = 20240601;

struct RunConfig {
  std::string subcommand;
  std::vector<std::string> inputs;  // files that must exist
  int n = 8;
  double d = 1.0;
  double eps = 0.1;
  double p = 2.0;
  int budget = 2000;
  int jobs = 1;
  std::string outDir;  // empty: current directory
  bool exact = false;
  std::uint64_t seed = kDefaultSeed;
};

/// Output directory: an explicit flag wins, then AKSCAL_OUT, then ".".
inline std::string resolveOutDir(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("AKSCAL_OUT"); env && *env) return env;
  return ".";
}

/// Path for an artifact: absolute paths are kept, relative ones land in outDir.
inline std::string artifactPath(const RunConfig& c, const std::string& name) {
  const std::filesystem::path p(name);
  if (p.is_absolute() || c.outDir.empty()) return p.string();
  return (std::filesystem::path(c.outDir) / p).string();
}

inline void validate(const RunConfig& c) {
  for (const auto& path : c.inputs)
    if (!std::filesystem::is_regular_file(path)) throw Error("cli", "input", "no such file '" + path + "'");
  if (c.n < kMinN || c.n > kMaxN)
    throw Error("cli", "range", "N must lie in [" + std::to_string(kMinN) + ", " + std::to_string(kMaxN) + "]");
  if (!(c.d > 0.0)) throw Error("cli", "range", "d must be positive");
  if (!(c.eps > 0.0)) throw Error("cli", "range", "eps must be positive");
  if (!(c.p > 1.0)) throw Error("cli", "range", "p must exceed 1");
  if (c.budget < 1) throw Error("cli", "range", "budget must be positive");
  if (c.jobs < 1) throw Error("cli", "range", "jobs must be positive");
  if (!c.outDir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(c.outDir, ec);
    if (!std::filesystem::is_directory(c.outDir))
      throw Error("cli", "output", "cannot create output directory '" + c.outDir + "'");
  }
}

}  // namespace akscal::cli
