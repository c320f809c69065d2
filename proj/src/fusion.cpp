#include "uhpsot/fusion.hpp"

#include <cmath>

namespace uhpsot {

std::string_view source_name(Source s) {
  switch (s) {
    case Source::appearance: return "app";
    case Source::trajectory: return "trj";
    case Source::background: return "bgd";
  }
  return "?";
}

SimilarityScores similarity_scores(const ModelBank& bank, const Proposals& proposals, const FramePlanes& frame,
                                   const AppearanceModel& model) {
  SimilarityScores out;
  for (int s = 0; s < 3; ++s) {
    const auto src = Source(s);
    if (src == Source::background && !proposals.has_background) continue;
    out.values[std::size_t(s)] = model.similarity(bank.latest, frame, proposals[src]);
    out.values[std::size_t(3 + s)] = model.similarity(bank.anchor, frame, proposals[src]);
  }
  return out;
}

QualityFlags assess_quality(const SimilarityScores& scores, const Proposals& proposals, const BoundingBox& prev_box,
                            std::span<const Eigen::Vector2d> bgd_centers, const FusionParams& params) {
  auto similar = [&](Source s) { return scores.best(s) > params.sim_threshold; };
  auto steady = [&](Source s) { return center_error(proposals[s], prev_box) <= params.robustness_px; };

  QualityFlags f;
  f.app = similar(Source::appearance) && steady(Source::appearance);
  f.trj = similar(Source::trajectory) && steady(Source::trajectory);
  if (proposals.has_background && similar(Source::background) && !bgd_centers.empty()) {
    const auto recent = bgd_centers.last(std::min(bgd_centers.size(), params.bgd_std_window));
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& c : recent) mean += c;
    mean /= double(recent.size());
    Eigen::Vector2d var = Eigen::Vector2d::Zero();
    for (const auto& c : recent) var += (c - mean).cwiseAbs2();
    const Eigen::Vector2d sd = (var / double(recent.size())).cwiseSqrt();
    f.bgd = sd.x() <= params.bgd_std_px && sd.y() <= params.bgd_std_px;
  }
  return f;
}

bool detect_occlusion(const TrackHistory& hist, double current_score, const std::optional<Eigen::Vector3d>& current_color,
                      const FusionParams& params) {
  const std::size_t n = params.occlusion_window;
  if (n == 0 || hist.scores().size() < n) return false;
  double mean_score = 0;
  for (auto it = hist.scores().end() - std::ptrdiff_t(n); it != hist.scores().end(); ++it) mean_score += *it;
  mean_score /= double(n);
  if (!(current_score < params.occlusion_ratio * mean_score)) return false;
  if (!current_color || hist.color_means().size() < n) return true;

  Eigen::Vector3d mean_color = Eigen::Vector3d::Zero();
  for (auto it = hist.color_means().end() - std::ptrdiff_t(n); it != hist.color_means().end(); ++it) mean_color += *it;
  mean_color /= double(n);
  return (*current_color - mean_color).cwiseAbs().maxCoeff() > params.occlusion_color;
}

namespace {

FusionDecision take(Source s, const Proposals& p, double mu) {
  FusionDecision d;
  d.box = p[s];
  d.mu_selected = mu;
  d.used[std::size_t(s)] = true;
  return d;
}

FusionDecision merge(std::initializer_list<Source> sources, const Proposals& p, double mu) {
  std::vector<BoundingBox> boxes;
  FusionDecision d;
  for (Source s : sources) {
    boxes.push_back(p[s]);
    d.used[std::size_t(s)] = true;
  }
  d.box = min_cover(std::span<const BoundingBox>(boxes));
  d.mu_selected = mu;
  return d;
}

}  // namespace

FusionDecision fuse(const QualityFlags& flags, const Proposals& proposals, const SimilarityScores& scores,
                    const BoundingBox& prev_box, bool occluded, int disagreement_streak, const FusionParams& params) {
  using enum Source;
  const auto displacement = [&](Source s) { return center_error(proposals[s], prev_box); };
  const auto overlap = [&](Source a, Source b) { return iou(proposals[a], proposals[b]) >= params.iou_threshold; };
  // Robustness: the smaller displacement wins; exact ties keep the earlier source.
  const auto more_robust = [&](Source a, Source b) { return displacement(b) < displacement(a) ? b : a; };
  const auto mu_for = [&](Source s) { return s == appearance ? params.mu_alone : params.mu_override; };

  FusionDecision d;
  if (occluded) {
    d.box = prev_box;
    d.mu_selected = params.mu_alone;
    d.update_model = false;
    d.occluded = true;
  } else {
    switch (flags.case_id()) {
      case 7:
        if (overlap(appearance, trajectory) && overlap(appearance, background) && overlap(trajectory, background)) {
          d = merge({appearance, trajectory, background}, proposals,
                    disagreement_streak >= params.agreement_streak ? params.mu_agree : params.mu_merge);
        } else {
          d = take(appearance, proposals, params.mu_alone);
        }
        break;
      case 6:
      case 5:
      case 3: {
        const Source a = flags.app ? appearance : trajectory;
        const Source b = flags.bgd ? background : trajectory;
        if (overlap(a, b)) {
          d = merge({a, b}, proposals, a == appearance ? params.mu_merge : params.mu_override);
        } else {
          const Source w = more_robust(a, b);
          d = take(w, proposals, mu_for(w));
        }
        break;
      }
      case 4:
        d = take(appearance, proposals, params.mu_alone);
        break;
      case 2:
      case 1: {
        const Source s = flags.trj ? trajectory : background;
        const bool better = scores.best(s) > scores.best(appearance) || displacement(s) < displacement(appearance);
        d = better ? take(s, proposals, params.mu_override) : take(appearance, proposals, params.mu_alone);
        break;
      }
      default:
        d = take(appearance, proposals, params.mu_alone);
        break;
    }
  }
  d.case_id = flags.case_id();
  return d;
}

bool proposals_agree(const Proposals& proposals, const FusionParams& params) {
  if (!proposals.has_background) return false;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const auto& a = proposals[Source(i)];
      const auto& b = proposals[Source(j)];
      if (center_error(a, b) > params.anchor_center_px || iou(a, b) < params.anchor_iou) return false;
    }
  return true;
}

}  // namespace uhpsot
