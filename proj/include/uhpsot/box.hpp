#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <span>

#include <Eigen/Core>

namespace uhpsot {

/// Axis-aligned box, top-left corner plus extent, in pixel units.
template <typename Scalar>
struct Box {
  Scalar x = 0;
  Scalar y = 0;
  Scalar w = 0;
  Scalar h = 0;

  static Box from_center(const Eigen::Matrix<Scalar, 2, 1>& c, Scalar w, Scalar h) {
    return {c.x() - w / 2, c.y() - h / 2, w, h};
  }

  Eigen::Matrix<Scalar, 2, 1> center() const { return {x + w / 2, y + h / 2}; }
  Eigen::Matrix<Scalar, 2, 1> size() const { return {w, h}; }
  Scalar right() const { return x + w; }
  Scalar bottom() const { return y + h; }
  Scalar area() const { return w * h; }
  bool valid() const { return std::isfinite(x) && std::isfinite(y) && w > 0 && h > 0; }

  friend bool operator==(const Box&, const Box&) = default;
};

using BoundingBox = Box<double>;

/// Intersection over union; zero for disjoint or degenerate boxes.
template <typename Scalar>
Scalar iou(const Box<Scalar>& a, const Box<Scalar>& b) {
  const Scalar iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const Scalar ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0 || ih <= 0) return 0;
  const Scalar inter = iw * ih;
  const Scalar uni = a.area() + b.area() - inter;
  return uni > 0 ? std::clamp(inter / uni, Scalar(0), Scalar(1)) : Scalar(0);
}

/// Euclidean distance between box centers.
template <typename Scalar>
Scalar center_error(const Box<Scalar>& a, const Box<Scalar>& b) {
  return (a.center() - b.center()).norm();
}

/// Smallest axis-aligned rectangle containing every input box.
template <typename Scalar>
Box<Scalar> min_cover(std::span<const Box<Scalar>> boxes) {
  Scalar x0 = boxes.front().x, y0 = boxes.front().y;
  Scalar x1 = boxes.front().right(), y1 = boxes.front().bottom();
  for (const auto& b : boxes.subspan(1)) {
    x0 = std::min(x0, b.x);
    y0 = std::min(y0, b.y);
    x1 = std::max(x1, b.right());
    y1 = std::max(y1, b.bottom());
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

template <typename Scalar>
Box<Scalar> min_cover(std::initializer_list<Box<Scalar>> boxes) {
  return min_cover(std::span<const Box<Scalar>>(boxes.begin(), boxes.size()));
}

/// Clamp a box so that it lies inside a width x height frame with at least
/// one pixel of extent.
template <typename Scalar>
Box<Scalar> clamp_to_frame(Box<Scalar> b, Scalar width, Scalar height) {
  b.w = std::clamp(b.w, Scalar(1), width);
  b.h = std::clamp(b.h, Scalar(1), height);
  b.x = std::clamp(b.x, Scalar(0), width - b.w);
  b.y = std::clamp(b.y, Scalar(0), height - b.h);
  return b;
}

}  // namespace uhpsot
