#include "uhpsot/bgmotion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uhpsot {

Plane harris_response(const Plane& gray, double k) {
  const Eigen::Index h = gray.rows(), w = gray.cols();
  Plane ixx = Plane::Zero(h, w), iyy = Plane::Zero(h, w), ixy = Plane::Zero(h, w);
  for (Eigen::Index y = 1; y + 1 < h; ++y)
    for (Eigen::Index x = 1; x + 1 < w; ++x) {
      const double gx = 0.5 * (gray(y, x + 1) - gray(y, x - 1));
      const double gy = 0.5 * (gray(y + 1, x) - gray(y - 1, x));
      ixx(y, x) = gx * gx;
      iyy(y, x) = gy * gy;
      ixy(y, x) = gx * gy;
    }
  Plane r = Plane::Zero(h, w);
  constexpr int kRad = 2;
  for (Eigen::Index y = kRad; y + kRad < h; ++y)
    for (Eigen::Index x = kRad; x + kRad < w; ++x) {
      const double a = ixx.block(y - kRad, x - kRad, 2 * kRad + 1, 2 * kRad + 1).sum();
      const double b = iyy.block(y - kRad, x - kRad, 2 * kRad + 1, 2 * kRad + 1).sum();
      const double c = ixy.block(y - kRad, x - kRad, 2 * kRad + 1, 2 * kRad + 1).sum();
      r(y, x) = a * b - c * c - k * (a + b) * (a + b);
    }
  return r;
}

namespace {

struct Corner {
  int x, y;
  double score;
};

std::vector<Corner> select_corners(const Plane& prev, const std::optional<BoundingBox>& exclude, const MatchParams& p) {
  const Plane r = harris_response(prev, p.harris_k);
  const int h = int(r.rows()), w = int(r.cols());
  const int margin = p.window / 2 + 1;
  const double peak = r.maxCoeff();
  if (!(peak > 1e-9)) return {};
  const double floor = p.quality * peak;

  // Local maxima in a 5x5 neighbourhood, bucketed on a coarse grid so that
  // points spread over the frame.
  const int g = std::max(1, p.grid);
  std::vector<std::vector<Corner>> buckets(std::size_t(g) * g);
  for (int y = margin; y < h - margin; ++y)
    for (int x = margin; x < w - margin; ++x) {
      const double v = r(y, x);
      if (v <= floor) continue;
      if (exclude && x >= exclude->x && x < exclude->right() && y >= exclude->y && y < exclude->bottom()) continue;
      bool is_max = true;
      for (int dy = -2; dy <= 2 && is_max; ++dy)
        for (int dx = -2; dx <= 2; ++dx) {
          if ((dx || dy) && (r(y + dy, x + dx) > v || (r(y + dy, x + dx) == v && (dy < 0 || (dy == 0 && dx < 0))))) {
            is_max = false;
            break;
          }
        }
      if (!is_max) continue;
      const int by = std::min(g - 1, y * g / h), bx = std::min(g - 1, x * g / w);
      buckets[std::size_t(by) * g + bx].push_back({x, y, v});
    }
  for (auto& b : buckets)
    std::sort(b.begin(), b.end(), [](const Corner& a, const Corner& c) {
      return a.score != c.score ? a.score > c.score : (a.y != c.y ? a.y < c.y : a.x < c.x);
    });

  std::vector<Corner> out;
  for (std::size_t round = 0; int(out.size()) < p.max_points; ++round) {
    bool any = false;
    for (const auto& b : buckets) {
      if (round < b.size()) {
        out.push_back(b[round]);
        any = true;
        if (int(out.size()) >= p.max_points) break;
      }
    }
    if (!any) break;
  }
  return out;
}

}  // namespace

Correspondences build_correspondences(const Plane& prev, const Plane& cur, const std::optional<BoundingBox>& exclude,
                                      const MatchParams& params) {
  if (prev.rows() != cur.rows() || prev.cols() != cur.cols()) throw MotionError("frame sizes differ");
  const int h = int(prev.rows()), w = int(prev.cols());
  const int half = params.window / 2;
  Correspondences out;
  for (const Corner& c : select_corners(prev, exclude, params)) {
    const auto ref = prev.block(c.y - half, c.x - half, params.window, params.window);
    double best = std::numeric_limits<double>::infinity();
    int bx = 0, by = 0;
    for (int dy = -params.search; dy <= params.search; ++dy) {
      const int ty = c.y + dy;
      if (ty - half < 0 || ty + half >= h) continue;
      for (int dx = -params.search; dx <= params.search; ++dx) {
        const int tx = c.x + dx;
        if (tx - half < 0 || tx + half >= w) continue;
        const double sad = (cur.block(ty - half, tx - half, params.window, params.window) - ref).abs().sum();
        // Ties resolve toward the smallest displacement.
        if (sad < best || (sad == best && dx * dx + dy * dy < bx * bx + by * by)) {
          best = sad;
          bx = dx;
          by = dy;
        }
      }
    }
    const double mean_err = best / double(params.window * params.window);
    if (mean_err > params.max_error) continue;
    out.push_back({Eigen::Vector2d(c.x, c.y), Eigen::Vector2d(c.x + bx, c.y + by)});
  }
  if (out.size() < 3) throw MotionError("insufficient correspondences");
  return out;
}

Plane residual_map(const Plane& prev, const Plane& cur, const AffineModel& model) {
  const Eigen::Index h = cur.rows(), w = cur.cols();
  Plane out = Plane::Zero(h, w);
  const AffineModel inv = model.inverse().value_or(AffineModel::identity());
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      const Eigen::Vector2d src = inv(Eigen::Vector2d(double(x), double(y)));
      if (src.x() < 0 || src.y() < 0 || src.x() > double(prev.cols() - 1) || src.y() > double(prev.rows() - 1)) continue;
      out(y, x) = sample_bilinear(prev, src.x(), src.y()) - cur(y, x);
    }
  return out;
}

ResidualProposal propose_box_from_residual(const Plane& residual, const BoundingBox& prev_box, double cut, double energy_floor) {
  ResidualProposal out;
  const Eigen::Vector2d c = prev_box.center();
  const int x0 = std::max(0, int(std::floor(c.x() - prev_box.w)));
  const int y0 = std::max(0, int(std::floor(c.y() - prev_box.h)));
  const int x1 = std::min(int(residual.cols()), int(std::ceil(c.x() + prev_box.w)));
  const int y1 = std::min(int(residual.rows()), int(std::ceil(c.y() + prev_box.h)));
  if (x1 <= x0 || y1 <= y0) return out;

  const Plane a = residual.block(y0, x0, y1 - y0, x1 - x0).abs();
  const double total = a.sum();
  if (!(total / double(a.size()) > energy_floor)) return out;

  const Eigen::ArrayXd cols = a.colwise().sum().transpose();
  const Eigen::ArrayXd rows = a.rowwise().sum();
  auto extent = [cut](const Eigen::ArrayXd& s) {
    const double t = cut * s.maxCoeff();
    Eigen::Index lo = 0, hi = s.size() - 1;
    while (s(lo) < t) ++lo;
    while (s(hi) < t) --hi;
    // Ends are pixel boundaries: the run [lo, hi] spans hi + 1 - lo pixels.
    return std::pair<double, double>(double(lo), double(hi + 1));
  };
  const auto [xmin, xmax] = extent(cols);
  const auto [ymin, ymax] = extent(rows);
  const Eigen::Vector2d size(xmax - xmin, ymax - ymin);

  // Pixel centres sit at integer coordinates, hence the +0.5 to box space.
  const Eigen::ArrayXd xs = Eigen::ArrayXd::LinSpaced(cols.size(), x0 + 0.5, x0 + cols.size() - 0.5);
  const Eigen::ArrayXd ys = Eigen::ArrayXd::LinSpaced(rows.size(), y0 + 0.5, y0 + rows.size() - 0.5);
  const Eigen::Vector2d centroid((cols * xs).sum() / total, (rows * ys).sum() / total);

  out.size = size;
  out.box = BoundingBox::from_center(centroid, size.x(), size.y());
  return out;
}

BackgroundProposal propose_background(const Plane& prev_gray, const Plane& cur_gray, const BoundingBox& prev_box,
                                      const BackgroundParams& params) {
  const double factor = std::max(1.0, double(std::max(prev_gray.rows(), prev_gray.cols())) / params.max_dim);
  const Plane prev = downscale(prev_gray, factor);
  const Plane cur = downscale(cur_gray, factor);
  const double sx = double(prev.cols()) / prev_gray.cols(), sy = double(prev.rows()) / prev_gray.rows();
  const BoundingBox small{prev_box.x * sx, prev_box.y * sy, prev_box.w * sx, prev_box.h * sy};

  BackgroundProposal out;
  try {
    const Correspondences pairs = build_correspondences(prev, cur, small, params.match);
    out.model = fit_affine(pairs, params.inlier_px);
  } catch (const MotionError&) {
    out.model = AffineModel::identity();
    out.identity_fallback = true;
  }

  const Plane res = residual_map(prev, cur, out.model);
  const ResidualProposal p = propose_box_from_residual(res, small, params.cut, params.energy_floor);
  if (p.box) out.box = BoundingBox{p.box->x / sx, p.box->y / sy, p.box->w / sx, p.box->h / sy};
  if (p.size) out.size = Eigen::Vector2d(p.size->x() / sx, p.size->y() / sy);
  return out;
}

}  // namespace uhpsot
