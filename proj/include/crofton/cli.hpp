#pragma once

// Command-line front end. Commands: forward, zonoid, reconstruct, verify,
// calibrate. Configuration comes from an optional JSON file (--config) and
// every key can be overridden by a flag of the same name, e.g. --band_limit 8.
//
// Exit codes: 0 success, 1 verification or data failure, 2 usage or
// configuration error.

#include "crofton/harness.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace crofton::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::runtime_error("config key '" + key + "': " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class Format { Csv, Json };

struct RunConfig {
  // metric source
  SyntheticDensitySpec density;
  int forward_order = kDefaultForwardOrder;
  double odd_contamination = 0.0;  // adds eps <Omega, u> to the synthetic metric
  std::string metric_input;        // sampled-metric CSV; empty means synthetic

  ReconstructionConfig reconstruction;

  // forward
  std::vector<Vec3> points{Vec3::Zero()};
  int grid_band_limit = 4;
  // zonoid
  Vec3 point = Vec3::Zero();
  // reconstruct
  std::vector<PlaneCoords> planes;
  int plane_count = 10;  // random planes used when `planes` is empty
  bool disc_oracle = false;
  // verify
  std::string suite = "identities";
  int oracle_plane_count = 20;

  std::uint64_t seed = 1;
  unsigned threads = 0;
  Format format = Format::Csv;
  std::string output = "-";

  nlohmann::json to_json() const;
  /// Keys missing from `j` keep their defaults; unknown keys and bad values
  /// raise ConfigError naming the key.
  static RunConfig from_json(const nlohmann::json& j);
};

/// Names of all configuration keys, in output order.
const std::vector<std::string>& config_keys();

/// Entry point used by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Formats a double with 17 significant digits.
std::string format_number(double v);
/// RFC 4180 field quoting.
std::string csv_field(const std::string& s);

}  // namespace crofton::cli
