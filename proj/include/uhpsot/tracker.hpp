#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "uhpsot/config.hpp"
#include "uhpsot/eval.hpp"
#include "uhpsot/fusion.hpp"

namespace uhpsot {

/// Loads the configured color-name table, or returns nullptr when color is
/// disabled. Throws FeatureError when the file is missing.
std::shared_ptr<const CNTable> load_cn_table(const Config& config);

/// Plain spatial-temporal regularised filter: take the appearance proposal,
/// learn with the fixed temporal coefficient every frame.
class StrcfTracker {
 public:
  StrcfTracker(const Config& config, std::shared_ptr<const CNTable> cn, bool color);

  BoundingBox initialize(const Frame& frame, const BoundingBox& box);
  BoundingBox track(const Frame& frame);
  BoundingBox track(const FramePlanes& planes);

  const AppearanceModel& model() const { return model_; }

 private:
  double mu_;
  AppearanceModel model_;
  BoundingBox previous_;
  int frame_index_ = 0;
};

/// What happened on one frame, for logging and tests.
struct StepLog {
  int frame = 0;
  AppearanceProposal appearance;
  Proposals proposals;
  SimilarityScores scores;
  QualityFlags flags;
  FusionDecision decision;
  bool model_updated = false;
  bool anchor_refreshed = false;
  bool degraded = false;
};

/// Everything carried from one frame to the next.
struct TrackerState {
  ModelBank bank;
  TrackHistory history;
  BoundingBox previous;
  int frame_index = 0;
  Plane previous_gray;
  std::vector<Eigen::Vector2d> background_centers;
  int disagreement_streak = 0;
};

class Tracker {
 public:
  /// `color` selects RGB features and the color half of occlusion detection;
  /// it is ignored when the config disables color.
  Tracker(Config config, std::shared_ptr<const CNTable> cn, bool color);

  /// Learns the first filter; returns `box` unchanged.
  BoundingBox initialize(const Frame& frame, const BoundingBox& box);

  /// Advances exactly one frame and returns the fused box.
  BoundingBox step(const Frame& frame);

  const TrackerState& state() const { return state_; }
  const StepLog& last_log() const { return log_; }
  const Config& config() const { return config_; }
  bool color() const { return color_; }

 private:
  BoundingBox full_step(const Frame& frame, const FramePlanes& planes);

  Config config_;
  bool color_;
  AppearanceModel model_;
  std::optional<StrcfTracker> baseline_;
  TrackerState state_;
  StepLog log_;
};

/// Mean RGB (or replicated gray) inside a box, clamped to the frame.
Eigen::Vector3d mean_color(const Frame& frame, const BoundingBox& box);

struct TrackRun {
  std::vector<BoundingBox> boxes;  // annotation coordinates
  EvalResult result;
  double seconds = 0.0;
};

/// One-pass evaluation: initialise from the first ground-truth box, track every
/// frame, write <out_dir>/<name>.txt when out_dir is set, and score against the
/// ground truth. Annotation files are 1-based; the tracker works 0-based.
TrackRun run_track(const Config& config, const Sequence& seq, const std::optional<std::filesystem::path>& out_dir,
                   std::shared_ptr<const CNTable> cn, bool force_gray = false);

}  // namespace uhpsot
