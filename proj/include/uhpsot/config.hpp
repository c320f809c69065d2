#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "uhpsot/bgmotion.hpp"
#include "uhpsot/dcf.hpp"
#include "uhpsot/fusion.hpp"
#include "uhpsot/trajectory.hpp"

namespace uhpsot {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every tunable of the tracker. Defaults reproduce the full tracker; turning
/// off both enable_background and enable_trajectory gives the plain
/// spatial-temporal regularised filter.
struct Config {
  DcfParams dcf;
  BackgroundParams background;
  TrajectoryParams trajectory;
  FusionParams fusion;

  bool enable_background = true;
  bool enable_trajectory = true;
  bool use_color = true;
  /// Updates are skipped when the box moved less than this and kept its size.
  double min_motion_px = 1.0;
  std::filesystem::path cn_table = std::filesystem::path(UHPSOT_DATA_DIR) / "cn_table.bin";

  bool baseline() const { return !enable_background && !enable_trajectory; }

  /// Applies one "key = value" assignment. Unknown keys return false;
  /// malformed or out-of-range values throw ConfigError.
  bool set(const std::string& key, const std::string& value);

  /// Reads a flat key = value file ('#' starts a comment). Unknown keys are
  /// reported through `warnings` and otherwise ignored.
  static Config load(const std::filesystem::path& file, std::vector<std::string>* warnings = nullptr);

  /// Every key with its current value, one "key = value" line each.
  std::string dump() const;

  static std::vector<std::string> keys();
};

}  // namespace uhpsot
