#pragma once

#include <cstddef>
#include <deque>
#include <optional>

#include <Eigen/Dense>

#include "uhpsot/box.hpp"

namespace uhpsot {

struct TrajectoryParams {
  std::size_t history = 20;
  /// Largest per-frame relative size change of the predicted size.
  double size_clamp = 0.2;
  /// Size estimates outside mean +/- reject_sigma * std of past size steps
  /// are rejected (inclusive bound).
  double reject_sigma = 3.0;
  /// Largest accepted one-frame relative change of the aspect ratio.
  double aspect_reject = 0.25;
  /// Lower bound on the step standard deviation, in pixels.
  double std_floor = 1.0;
  /// Below this many displacement samples prediction uses the mean step.
  std::size_t min_pca_samples = 4;
};

/// Ring buffers of the last N predicted boxes and, separately, the last N
/// similarity scores and mean colors of frames that were not occluded.
class TrackHistory {
 public:
  TrackHistory() = default;
  explicit TrackHistory(std::size_t capacity) : capacity_(capacity) {}

  void push(const BoundingBox& box, double score, const Eigen::Vector3d& color_mean);
  void push_box(const BoundingBox& box);

  std::size_t count() const { return boxes_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return boxes_.empty(); }
  const std::deque<BoundingBox>& boxes() const { return boxes_; }
  const std::deque<double>& scores() const { return scores_; }
  const std::deque<Eigen::Vector3d>& color_means() const { return colors_; }
  const BoundingBox& last() const { return boxes_.back(); }

 private:
  std::size_t capacity_ = 20;
  std::deque<BoundingBox> boxes_;
  std::deque<double> scores_;
  std::deque<Eigen::Vector3d> colors_;
};

/// Value-semantics append.
inline TrackHistory push(TrackHistory hist, const BoundingBox& box, double score, const Eigen::Vector3d& color_mean) {
  hist.push(box, score, color_mean);
  return hist;
}

/// Next step of a sequence of 2-D steps: the mean step plus the line-fit
/// extrapolation of the first principal-component coefficient; the second
/// component is dropped. Rows of `steps` are in chronological order. With
/// fewer than min_pca_samples rows only the mean is used.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 2, 1> extrapolate_step(const Eigen::MatrixBase<Derived>& steps,
                                                               std::size_t min_pca_samples = 4) {
  using Scalar = typename Derived::Scalar;
  using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
  const Eigen::Index m = steps.rows();
  if (m == 0) return Vec2::Zero();
  const Vec2 mean = steps.colwise().mean().transpose();
  if (std::size_t(m) < min_pca_samples) return mean;

  const Eigen::Matrix<Scalar, Eigen::Dynamic, 2> centred = steps.rowwise() - mean.transpose();
  const Eigen::Matrix<Scalar, 2, 2> cov = centred.transpose() * centred / Scalar(m);

  // Closed-form symmetric 2x2 eigenvector of the largest eigenvalue; equal
  // eigenvalues pick the x axis.
  Vec2 pc1(1, 0);
  const Scalar a = cov(0, 0), b = cov(0, 1), d = cov(1, 1);
  const Scalar disc = std::sqrt((a - d) * (a - d) / 4 + b * b);
  const Scalar scale = std::max({std::abs(a), std::abs(d), Scalar(1e-300)});
  if (disc > Scalar(1e-12) * scale) {
    const Scalar lambda = (a + d) / 2 + disc;
    pc1 = std::abs(b) > Scalar(1e-14) * scale ? Vec2(b, lambda - a) : (a >= d ? Vec2(1, 0) : Vec2(0, 1));
    pc1.normalize();
  }

  // Least-squares line through (i, coefficient_i), evaluated at i = m.
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coeff = centred * pc1;
  const Scalar t_mean = Scalar(m - 1) / 2;
  Scalar sxy = 0, sxx = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    sxy += (Scalar(i) - t_mean) * coeff(i);
    sxx += (Scalar(i) - t_mean) * (Scalar(i) - t_mean);
  }
  const Scalar slope = sxx > 0 ? sxy / sxx : Scalar(0);
  const Scalar next = coeff.mean() + slope * (Scalar(m) - t_mean);
  return mean + next * pc1;
}

/// Predicted centre for the next frame, or nullopt for an empty history.
std::optional<Eigen::Vector2d> predict_center(const TrackHistory& hist, const TrajectoryParams& params = {});

/// Predicted (w, h), clamped to +/- size_clamp of the last size.
Eigen::Vector2d predict_size(const TrackHistory& hist, const TrajectoryParams& params = {});

/// Accepts a raw (w, h) estimate when its implied per-frame size step lies
/// within the historical step distribution and the aspect ratio changes by at
/// most aspect_reject.
std::optional<Eigen::Vector2d> filter_size_estimate(const Eigen::Vector2d& raw, const TrackHistory& hist,
                                                    const TrajectoryParams& params = {});

}  // namespace uhpsot
