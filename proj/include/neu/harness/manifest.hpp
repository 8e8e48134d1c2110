#pragma once

#include <Eigen/Core>
#include <boost/version.hpp>
#include <cstdint>
#include <string>

#include "neu/reconfig/chain_json.hpp"

namespace neu::harness {

using reconfig::json;

inline constexpr const char* kLibraryVersion = "0.1.0";

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xF];
  return s;
}

/// Run manifest: the effective configuration, its hash and the library
/// versions. `timings` is attached only when non-null.
inline json run_manifest(const std::string& command, const json& config, std::uint64_t seed,
                         const json& timings = nullptr) {
  json m = {{"command", command},
            {"config", config},
            {"config_hash", hex64(fnv1a(config.dump()))},
            {"seed", seed},
            {"versions",
             {{"neu", kLibraryVersion},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) +
                            "." + std::to_string(BOOST_VERSION % 100)},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
  if (!timings.is_null()) m["timings"] = timings;
  return m;
}

}  // namespace neu::harness
