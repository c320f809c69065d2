#include "uhpsot/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace uhpsot {

Plane Patch::gray() const {
  if (planes.size() == 1) return planes.front();
  return 0.299 * planes[0] + 0.587 * planes[1] + 0.114 * planes[2];
}

bool FeatureMap::all_finite() const {
  return std::all_of(channels.begin(), channels.end(), [](const Plane& c) { return c.isFinite().all(); });
}

double FeatureMap::squared_norm() const {
  double s = 0;
  for (const auto& c : channels) s += c.square().sum();
  return s;
}

Patch extract_patch(const std::vector<Plane>& planes, const BoundingBox& box, double pad, int out_w, int out_h) {
  if (!(box.w >= 1.0) || !(box.h >= 1.0)) throw FeatureError("degenerate box");
  if (!(pad >= 1.0)) throw FeatureError("padding factor must be >= 1");
  if (out_w < 1 || out_h < 1) throw FeatureError("output patch size must be positive");

  const Eigen::Vector2d src(pad * box.w, pad * box.h);
  Patch patch;
  patch.origin = box.center() - src / 2;
  patch.scale = {src.x() / out_w, src.y() / out_h};

  // Supersample when shrinking so that large regions do not alias.
  const int kx = std::max(1, int(std::lround(patch.scale.x())));
  const int ky = std::max(1, int(std::lround(patch.scale.y())));
  std::vector<double> xs(std::size_t(out_w) * kx), ys(std::size_t(out_h) * ky);
  for (int i = 0; i < out_w; ++i)
    for (int j = 0; j < kx; ++j) xs[std::size_t(i) * kx + j] = patch.origin.x() + (i + (j + 0.5) / kx) * patch.scale.x() - 0.5;
  for (int i = 0; i < out_h; ++i)
    for (int j = 0; j < ky; ++j) ys[std::size_t(i) * ky + j] = patch.origin.y() + (i + (j + 0.5) / ky) * patch.scale.y() - 0.5;

  const double inv = 1.0 / (kx * ky);
  for (const auto& plane : planes) {
    Plane out(out_h, out_w);
    for (int y = 0; y < out_h; ++y)
      for (int x = 0; x < out_w; ++x) {
        double acc = 0;
        for (int sy = 0; sy < ky; ++sy)
          for (int sx = 0; sx < kx; ++sx)
            acc += sample_bilinear(plane, xs[std::size_t(x) * kx + sx], ys[std::size_t(y) * ky + sy]);
        out(y, x) = acc * inv;
      }
    patch.planes.push_back(std::move(out));
  }
  return patch;
}

Patch extract_patch(const Frame& frame, const BoundingBox& box, double pad, int out_w, int out_h) {
  return extract_patch(frame.planes(), box, pad, out_w, out_h);
}

std::vector<Plane> orientation_histogram(const Plane& gray, int cell_size) {
  const int h = int(gray.rows()), w = int(gray.cols());
  if (cell_size < 1 || h < cell_size || w < cell_size) throw FeatureError("patch smaller than one cell");
  const int ny = h / cell_size, nx = w / cell_size;
  constexpr int kBins = 2 * kHogOrientations;
  std::vector<Plane> hist(kBins, Plane::Zero(ny, nx));

  const double bin_width = 2 * std::numbers::pi / kBins;
  const double norm = 1.0 / (255.0 * cell_size * cell_size);
  for (int y = 0; y < h; ++y) {
    const int yp = std::max(y - 1, 0), yn = std::min(y + 1, h - 1);
    const double ry = (yn - yp) == 2 ? 0.5 : 1.0;
    const double yc = (y + 0.5) / cell_size - 0.5;
    const int y0 = int(std::floor(yc));
    const double fy = yc - y0;
    for (int x = 0; x < w; ++x) {
      const int xp = std::max(x - 1, 0), xn = std::min(x + 1, w - 1);
      const double rx = (xn - xp) == 2 ? 0.5 : 1.0;
      const double gx = (gray(y, xn) - gray(y, xp)) * rx;
      const double gy = (gray(yn, x) - gray(yp, x)) * ry;
      const double mag = std::hypot(gx, gy) * norm;
      if (mag == 0) continue;
      double angle = std::atan2(gy, gx);
      if (angle < 0) angle += 2 * std::numbers::pi;
      const double o = angle / bin_width;
      const int o0 = int(std::floor(o)) % kBins, o1 = (o0 + 1) % kBins;
      const double fo = o - std::floor(o);

      const double xc = (x + 0.5) / cell_size - 0.5;
      const int x0 = int(std::floor(xc));
      const double fx = xc - x0;
      const double wy[2] = {1 - fy, fy}, wx[2] = {1 - fx, fx};
      for (int dy = 0; dy < 2; ++dy) {
        const int cy = y0 + dy;
        if (cy < 0 || cy >= ny) continue;
        for (int dx = 0; dx < 2; ++dx) {
          const int cx = x0 + dx;
          if (cx < 0 || cx >= nx) continue;
          const double m = mag * wy[dy] * wx[dx];
          hist[o0](cy, cx) += m * (1 - fo);
          hist[o1](cy, cx) += m * fo;
        }
      }
    }
  }
  return hist;
}

FeatureMap compute_hog(const Plane& gray, int cell_size) {
  constexpr double kClip = 0.2;
  constexpr double kTexture = 0.2357;
  constexpr double kEps = 1e-10;

  const auto sensitive = orientation_histogram(gray, cell_size);
  const int ny = int(sensitive.front().rows()), nx = int(sensitive.front().cols());
  std::vector<Plane> insensitive(kHogOrientations);
  Plane energy = Plane::Zero(ny, nx);
  for (int o = 0; o < kHogOrientations; ++o) {
    insensitive[o] = sensitive[o] + sensitive[o + kHogOrientations];
    energy += insensitive[o].square();
  }

  // Four normalisers per cell: one per 2x2 block containing it, with cell
  // indices clamped at the grid border.
  auto e = [&](int y, int x) { return energy(std::clamp(y, 0, ny - 1), std::clamp(x, 0, nx - 1)); };
  std::array<Plane, 4> block_norm;
  for (int k = 0; k < 4; ++k) {
    const int oy = (k / 2) - 1, ox = (k % 2) - 1;
    block_norm[k].resize(ny, nx);
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        const int by = y + oy, bx = x + ox;
        const double s = e(by, bx) + e(by + 1, bx) + e(by, bx + 1) + e(by + 1, bx + 1);
        block_norm[k](y, x) = 1.0 / std::sqrt(s + kEps);
      }
  }

  FeatureMap out;
  out.cell_size = cell_size;
  out.channels.assign(kHogChannels, Plane::Zero(ny, nx));
  for (int k = 0; k < 4; ++k) {
    const Plane& n = block_norm[k];
    for (int o = 0; o < 2 * kHogOrientations; ++o) {
      const Plane t = (sensitive[o] * n).min(kClip);
      out.channels[o] += 0.5 * t;
      out.channels[27 + k] += kTexture * t;
    }
    for (int o = 0; o < kHogOrientations; ++o)
      out.channels[18 + o] += 0.5 * (insensitive[o] * n).min(kClip);
  }
  return out;
}

FeatureMap compute_cn(const Patch& patch, const CNTable& table, int cell_size) {
  if (!patch.is_color()) throw FeatureError("color names need an RGB patch");
  const int h = patch.height(), w = patch.width();
  if (cell_size < 1 || h < cell_size || w < cell_size) throw FeatureError("patch smaller than one cell");
  const int ny = h / cell_size, nx = w / cell_size;
  FeatureMap out;
  out.cell_size = cell_size;
  out.channels.assign(kCnChannels, Plane::Zero(ny, nx));
  auto quant = [](double v) { return std::uint8_t(std::clamp(std::lround(v), 0L, 255L)); };
  const double inv = 1.0 / (cell_size * cell_size);
  for (int y = 0; y < ny * cell_size; ++y)
    for (int x = 0; x < nx * cell_size; ++x) {
      const auto& row = table.lookup(quant(patch.planes[0](y, x)), quant(patch.planes[1](y, x)), quant(patch.planes[2](y, x)));
      for (int c = 0; c < kCnChannels; ++c) out.channels[c](y / cell_size, x / cell_size) += row[c] * inv;
    }
  return out;
}

FeatureMap compute_gray_mean(const Plane& gray, int cell_size) {
  const int h = int(gray.rows()), w = int(gray.cols());
  if (cell_size < 1 || h < cell_size || w < cell_size) throw FeatureError("patch smaller than one cell");
  const int ny = h / cell_size, nx = w / cell_size;
  Plane m(ny, nx);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) m(y, x) = gray.block(y * cell_size, x * cell_size, cell_size, cell_size).mean() / 255.0 - 0.5;
  FeatureMap out;
  out.cell_size = cell_size;
  out.channels.push_back(std::move(m));
  return out;
}

Plane hann_window(int rows, int cols) {
  auto hann = [](int n) {
    Eigen::ArrayXd v(n);
    if (n == 1) {
      v(0) = 1;
      return v;
    }
    for (int i = 0; i < n; ++i) v(i) = 0.5 * (1 - std::cos(2 * std::numbers::pi * i / (n - 1)));
    return v;
  };
  const Eigen::ArrayXd wy = hann(rows), wx = hann(cols);
  return (wy.matrix() * wx.matrix().transpose()).array();
}

FeatureMap apply_window(const FeatureMap& fmap, const Plane& window) {
  if (window.rows() != fmap.rows() || window.cols() != fmap.cols()) throw FeatureError("window size does not match feature map");
  FeatureMap out = fmap;
  for (auto& c : out.channels) c *= window;
  return out;
}

FeatureMap concat(std::vector<FeatureMap> parts) {
  FeatureMap out;
  if (parts.empty()) return out;
  out.cell_size = parts.front().cell_size;
  out.origin = parts.front().origin;
  const auto rows = parts.front().rows(), cols = parts.front().cols();
  for (auto& p : parts) {
    if (p.rows() != rows || p.cols() != cols) throw FeatureError("feature grids disagree");
    for (auto& c : p.channels) out.channels.push_back(std::move(c));
  }
  return out;
}

FeatureExtractor::FeatureExtractor(int cell_size, std::shared_ptr<const CNTable> cn) : cell_size_(cell_size), cn_(std::move(cn)) {
  if (cell_size_ < 1) throw FeatureError("cell size must be positive");
}

FeatureMap FeatureExtractor::operator()(const Patch& patch) const {
  const Plane gray = patch.gray();
  std::vector<FeatureMap> parts;
  parts.push_back(compute_hog(gray, cell_size_));
  if (patch.is_color() && cn_) parts.push_back(compute_cn(patch, *cn_, cell_size_));
  parts.push_back(compute_gray_mean(gray, cell_size_));
  FeatureMap out = concat(std::move(parts));
  out.origin = patch.origin;
  return out;
}

}  // namespace uhpsot
