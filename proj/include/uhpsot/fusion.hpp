#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

#include <Eigen/Core>

#include "uhpsot/box.hpp"
#include "uhpsot/dcf.hpp"
#include "uhpsot/trajectory.hpp"

namespace uhpsot {

enum class Source { appearance = 0, trajectory = 1, background = 2 };

/// Good/bad flag per proposal. case_id() packs them as 4*app + 2*trj + bgd.
struct QualityFlags {
  bool app = false;
  bool trj = false;
  bool bgd = false;

  int case_id() const { return 4 * int(app) + 2 * int(trj) + int(bgd); }
  static QualityFlags from_case(int id) { return {bool(id & 4), bool(id & 2), bool(id & 1)}; }
  friend bool operator==(const QualityFlags&, const QualityFlags&) = default;
};

/// The three box proposals of one frame, indexed by Source.
struct Proposals {
  std::array<BoundingBox, 3> boxes;
  /// Background motion may yield nothing for a frame.
  bool has_background = true;

  const BoundingBox& operator[](Source s) const { return boxes[std::size_t(s)]; }
  BoundingBox& operator[](Source s) { return boxes[std::size_t(s)]; }
};

/// Scores of (latest, anchor) filters against (app, trj, bgd) proposals:
/// index 3 * model + source.
struct SimilarityScores {
  std::array<double, 6> values{};

  double latest(Source s) const { return values[std::size_t(s)]; }
  double anchor(Source s) const { return values[3 + std::size_t(s)]; }
  double best(Source s) const { return std::max(latest(s), anchor(s)); }
};

/// Latest filter plus the anchor filter from the last frame where all three
/// proposals agreed.
struct ModelBank {
  Template latest;
  Template anchor;
  int anchor_frame = 1;
};

struct FusionParams {
  double sim_threshold = 0.08;
  double robustness_px = 30.0;
  double bgd_std_px = 30.0;
  std::size_t bgd_std_window = 10;
  double iou_threshold = 0.5;
  double mu_alone = 15.0;
  double mu_merge = 10.0;
  double mu_override = 5.0;
  double mu_agree = 0.0;
  int agreement_streak = 3;
  double occlusion_ratio = 0.5;
  double occlusion_color = 20.0;
  std::size_t occlusion_window = 5;
  double anchor_center_px = 3.0;
  double anchor_iou = 0.7;
};

struct FusionDecision {
  BoundingBox box;
  int case_id = 0;
  double mu_selected = 15.0;
  bool update_model = true;
  bool occluded = false;
  /// Proposals that make up the box (merged ones all set).
  std::array<bool, 3> used{};
};

SimilarityScores similarity_scores(const ModelBank& bank, const Proposals& proposals, const FramePlanes& frame,
                                   const AppearanceModel& model);

QualityFlags assess_quality(const SimilarityScores& scores, const Proposals& proposals, const BoundingBox& prev_box,
                            std::span<const Eigen::Vector2d> bgd_centers, const FusionParams& params = {});

/// Sudden similarity drop together with a jump of the in-box mean color
/// (infinity norm), both against the mean of the last occlusion_window
/// non-occluded frames. Without a color (grayscale input) the score test
/// decides alone.
bool detect_occlusion(const TrackHistory& hist, double current_score, const std::optional<Eigen::Vector3d>& current_color,
                      const FusionParams& params = {});

/// Rule table over the eight flag states.
FusionDecision fuse(const QualityFlags& flags, const Proposals& proposals, const SimilarityScores& scores,
                    const BoundingBox& prev_box, bool occluded, int disagreement_streak, const FusionParams& params = {});

/// All pairwise centre distances within anchor_center_px and IoUs at least
/// anchor_iou.
bool proposals_agree(const Proposals& proposals, const FusionParams& params = {});

std::string_view source_name(Source s);

}  // namespace uhpsot
