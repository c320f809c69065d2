#include "uhpsot/trajectory.hpp"

#include <cmath>

namespace uhpsot {

void TrackHistory::push(const BoundingBox& box, double score, const Eigen::Vector3d& color_mean) {
  push_box(box);
  scores_.push_back(score);
  colors_.push_back(color_mean);
  if (scores_.size() > capacity_) scores_.pop_front();
  if (colors_.size() > capacity_) colors_.pop_front();
}

void TrackHistory::push_box(const BoundingBox& box) {
  boxes_.push_back(box);
  if (boxes_.size() > capacity_) boxes_.pop_front();
}

namespace {

Eigen::MatrixX2d steps(const TrackHistory& hist, bool sizes) {
  const auto& b = hist.boxes();
  Eigen::MatrixX2d out(b.size() > 0 ? b.size() - 1 : 0, 2);
  for (std::size_t i = 1; i < b.size(); ++i) {
    const Eigen::Vector2d d = sizes ? Eigen::Vector2d(b[i].size() - b[i - 1].size()) : Eigen::Vector2d(b[i].center() - b[i - 1].center());
    out.row(Eigen::Index(i - 1)) = d.transpose();
  }
  return out;
}

}  // namespace

std::optional<Eigen::Vector2d> predict_center(const TrackHistory& hist, const TrajectoryParams& params) {
  if (hist.empty()) return std::nullopt;
  return Eigen::Vector2d(hist.last().center() + extrapolate_step(steps(hist, false), params.min_pca_samples));
}

Eigen::Vector2d predict_size(const TrackHistory& hist, const TrajectoryParams& params) {
  if (hist.empty()) return Eigen::Vector2d::Zero();
  const Eigen::Vector2d last = hist.last().size();
  const Eigen::Vector2d next = last + extrapolate_step(steps(hist, true), params.min_pca_samples);
  const Eigen::Vector2d lo = last * (1 - params.size_clamp), hi = last * (1 + params.size_clamp);
  return next.cwiseMax(lo).cwiseMin(hi);
}

std::optional<Eigen::Vector2d> filter_size_estimate(const Eigen::Vector2d& raw, const TrackHistory& hist,
                                                    const TrajectoryParams& params) {
  if (hist.empty() || !(raw.x() > 0 && raw.y() > 0)) return std::nullopt;
  const Eigen::Vector2d last = hist.last().size();
  const Eigen::Vector2d step = raw - last;

  // No trajectory to deviate from yet.
  const Eigen::MatrixX2d s = steps(hist, true);
  if (std::size_t(s.rows()) < params.min_pca_samples) return std::nullopt;
  const Eigen::Vector2d mean = s.colwise().mean().transpose();
  const Eigen::Vector2d sd =
      ((s.rowwise() - mean.transpose()).array().square().colwise().sum() / double(s.rows())).sqrt().matrix().transpose().cwiseMax(params.std_floor);
  for (int k = 0; k < 2; ++k)
    if (std::abs(step(k) - mean(k)) > params.reject_sigma * sd(k)) return std::nullopt;

  const double aspect_change = (raw.x() / raw.y()) / (last.x() / last.y());
  if (std::abs(aspect_change - 1.0) > params.aspect_reject) return std::nullopt;
  return raw;
}

}  // namespace uhpsot
