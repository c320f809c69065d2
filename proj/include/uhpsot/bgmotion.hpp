#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "uhpsot/box.hpp"
#include "uhpsot/image.hpp"

namespace uhpsot {

class MotionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Six-parameter map of background points between consecutive frames:
///   x' = a0 + a1 x + a2 y,   y' = b0 + b1 x + b2 y.
template <typename Scalar>
struct Affine {
  Scalar a0 = 0, a1 = 1, a2 = 0;
  Scalar b0 = 0, b1 = 0, b2 = 1;

  static Affine identity() { return {}; }

  Eigen::Matrix<Scalar, 2, 1> operator()(const Eigen::Matrix<Scalar, 2, 1>& p) const {
    return {a0 + a1 * p.x() + a2 * p.y(), b0 + b1 * p.x() + b2 * p.y()};
  }

  bool is_finite() const {
    return std::isfinite(a0) && std::isfinite(a1) && std::isfinite(a2) && std::isfinite(b0) && std::isfinite(b1) &&
           std::isfinite(b2);
  }

  /// Inverse map, or nullopt when the linear part is singular.
  std::optional<Affine> inverse() const {
    const Scalar det = a1 * b2 - a2 * b1;
    if (std::abs(det) < Scalar(1e-12)) return std::nullopt;
    Affine inv;
    inv.a1 = b2 / det;
    inv.a2 = -a2 / det;
    inv.b1 = -b1 / det;
    inv.b2 = a1 / det;
    inv.a0 = -(inv.a1 * a0 + inv.a2 * b0);
    inv.b0 = -(inv.b1 * a0 + inv.b2 * b0);
    return inv;
  }
};

using AffineModel = Affine<double>;

template <typename Scalar>
struct PointPair {
  Eigen::Matrix<Scalar, 2, 1> from;
  Eigen::Matrix<Scalar, 2, 1> to;
};

using Correspondence = PointPair<double>;
using Correspondences = std::vector<Correspondence>;

namespace detail {

// Least-squares fit of both rows of the model; throws on rank deficiency.
template <typename Scalar>
Affine<Scalar> solve_affine(std::span<const PointPair<Scalar>> pairs) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, 3>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = Eigen::Index(pairs.size());
  if (n < 3) throw MotionError("insufficient correspondences");
  // Centre the sources so the rank test is independent of image offset.
  Eigen::Matrix<Scalar, 2, 1> mean = Eigen::Matrix<Scalar, 2, 1>::Zero();
  for (const auto& p : pairs) mean += p.from;
  mean /= Scalar(n);
  Mat A(n, 3);
  Vec bx(n), by(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = pairs[std::size_t(i)];
    A.row(i) << Scalar(1), p.from.x() - mean.x(), p.from.y() - mean.y();
    bx(i) = p.to.x();
    by(i) = p.to.y();
  }
  Eigen::ColPivHouseholderQR<Mat> qr(A);
  qr.setThreshold(Scalar(1e-9));
  if (qr.rank() < 3) throw MotionError("degenerate geometry");
  const Eigen::Matrix<Scalar, 3, 1> cx = qr.solve(bx), cy = qr.solve(by);
  Affine<Scalar> m;
  m.a1 = cx(1);
  m.a2 = cx(2);
  m.a0 = cx(0) - m.a1 * mean.x() - m.a2 * mean.y();
  m.b1 = cy(1);
  m.b2 = cy(2);
  m.b0 = cy(0) - m.b1 * mean.x() - m.b2 * mean.y();
  return m;
}

}  // namespace detail

/// Linear least-squares affine fit followed by one refit without pairs whose
/// residual exceeds inlier_px. The refit is skipped when fewer than three
/// inliers remain or they are degenerate.
template <typename Scalar>
Affine<Scalar> fit_affine(std::span<const PointPair<Scalar>> pairs, Scalar inlier_px = Scalar(3)) {
  const Affine<Scalar> first = detail::solve_affine(pairs);
  std::vector<PointPair<Scalar>> inliers;
  inliers.reserve(pairs.size());
  for (const auto& p : pairs)
    if ((first(p.from) - p.to).norm() <= inlier_px) inliers.push_back(p);
  if (inliers.size() == pairs.size() || inliers.size() < 3) return first;
  try {
    return detail::solve_affine(std::span<const PointPair<Scalar>>(inliers));
  } catch (const MotionError&) {
    return first;
  }
}

template <typename Scalar>
Affine<Scalar> fit_affine(const std::vector<PointPair<Scalar>>& pairs, Scalar inlier_px = Scalar(3)) {
  return fit_affine(std::span<const PointPair<Scalar>>(pairs), inlier_px);
}

/// Root-mean-square distance between model(from) and to.
template <typename Scalar>
Scalar mapping_rms(const Affine<Scalar>& m, std::span<const PointPair<Scalar>> pairs) {
  Scalar s = 0;
  for (const auto& p : pairs) s += (m(p.from) - p.to).squaredNorm();
  return pairs.empty() ? Scalar(0) : std::sqrt(s / Scalar(pairs.size()));
}

struct MatchParams {
  int max_points = 50;
  int window = 21;
  int search = 20;
  /// Largest accepted mean absolute difference per pixel (gray levels).
  double max_error = 10.0;
  double harris_k = 0.04;
  /// Corners weaker than this fraction of the strongest are ignored.
  double quality = 0.01;
  int grid = 6;
};

/// Harris corners on `prev` (outside `exclude`, when given) matched into
/// `cur` by exhaustive SAD window search. Throws MotionError with
/// "insufficient correspondences" when fewer than three matches survive.
Correspondences build_correspondences(const Plane& prev, const Plane& cur, const std::optional<BoundingBox>& exclude,
                                      const MatchParams& params = {});

/// Harris response with a 5x5 box-summed structure tensor.
Plane harris_response(const Plane& gray, double k);

/// Residual = warped(prev) - cur; zero where the warp samples outside prev.
Plane residual_map(const Plane& prev, const Plane& cur, const AffineModel& model);

struct ResidualProposal {
  std::optional<BoundingBox> box;
  /// Width and height from the thresholded projections.
  std::optional<Eigen::Vector2d> size;
};

/// Column and row sums of |residual| inside a window twice the size of
/// prev_box; the extent is the span of sums at or above cut * max, and the box
/// is centred on the residual centroid. Empty when the window's mean absolute
/// residual is at most energy_floor.
ResidualProposal propose_box_from_residual(const Plane& residual, const BoundingBox& prev_box, double cut = 0.1,
                                           double energy_floor = 1e-9);

struct BackgroundParams {
  MatchParams match;
  double inlier_px = 3.0;
  int max_dim = 480;
  double cut = 0.1;
  double energy_floor = 1.0;
};

struct BackgroundProposal {
  std::optional<BoundingBox> box;
  std::optional<Eigen::Vector2d> size;
  AffineModel model;
  bool identity_fallback = false;
};

/// Full background-motion proposal at frame resolution: estimation runs on
/// frames downscaled to at most max_dim and geometry is mapped back.
BackgroundProposal propose_background(const Plane& prev_gray, const Plane& cur_gray, const BoundingBox& prev_box,
                                      const BackgroundParams& params = {});

}  // namespace uhpsot
