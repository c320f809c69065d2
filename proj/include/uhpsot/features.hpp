#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "uhpsot/box.hpp"
#include "uhpsot/image.hpp"

namespace uhpsot {

class FeatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Resampled image region: one plane for grayscale, three for RGB.
struct Patch {
  std::vector<Plane> planes;
  /// Top-left of the covered source region and source pixels per patch pixel.
  Eigen::Vector2d origin{0, 0};
  Eigen::Vector2d scale{1, 1};

  int width() const { return planes.empty() ? 0 : int(planes.front().cols()); }
  int height() const { return planes.empty() ? 0 : int(planes.front().rows()); }
  bool is_color() const { return planes.size() == 3; }
  Plane gray() const;
};

/// D-channel spatial feature grid. Every channel is rows (y) by cols (x).
struct FeatureMap {
  std::vector<Plane> channels;
  int cell_size = 1;
  Eigen::Vector2d origin{0, 0};

  int rows() const { return channels.empty() ? 0 : int(channels.front().rows()); }
  int cols() const { return channels.empty() ? 0 : int(channels.front().cols()); }
  int depth() const { return int(channels.size()); }
  bool all_finite() const;
  double squared_norm() const;
};

inline constexpr int kHogChannels = 31;
inline constexpr int kHogOrientations = 9;
inline constexpr int kCnChannels = 10;
inline constexpr int kCnRows = 32768;

/// Color-name lookup: RGB quantised to 5 bits per channel, ten probabilities
/// per row. On disk: row-major 32768 x 10 little-endian float32, row index
/// r/8 + 32*(g/8) + 1024*(b/8).
class CNTable {
 public:
  using Row = std::array<float, kCnChannels>;

  explicit CNTable(std::vector<Row> rows);

  static CNTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  /// Deterministic soft assignment of every quantised color to ten color-name
  /// prototypes; used when no learned table is available.
  static CNTable synthesize();

  static int index(std::uint8_t r, std::uint8_t g, std::uint8_t b) { return (r >> 3) + 32 * (g >> 3) + 1024 * (b >> 3); }
  const Row& row(int i) const { return rows_[std::size_t(i)]; }
  const Row& lookup(std::uint8_t r, std::uint8_t g, std::uint8_t b) const { return rows_[std::size_t(index(r, g, b))]; }

 private:
  std::vector<Row> rows_;
};

/// Crops a region centred on `box` spanning pad * (w, h) source pixels and
/// resamples it bilinearly to out_w x out_h. Out-of-frame samples replicate
/// the nearest edge pixel.
Patch extract_patch(const Frame& frame, const BoundingBox& box, double pad, int out_w, int out_h);
Patch extract_patch(const std::vector<Plane>& planes, const BoundingBox& box, double pad, int out_w, int out_h);

/// Felzenszwalb 31-channel HOG: 18 contrast-sensitive orientations, 9
/// contrast-insensitive, 4 texture-energy channels. Output grid is
/// (h / cell) x (w / cell).
FeatureMap compute_hog(const Plane& gray, int cell_size);

/// Unnormalised 18-bin orientation histogram per cell (soft-binned in angle
/// and space). Exposed for testing.
std::vector<Plane> orientation_histogram(const Plane& gray, int cell_size);

/// Per-cell average of the color-name rows of every pixel.
FeatureMap compute_cn(const Patch& patch, const CNTable& table, int cell_size);

/// Per-cell mean intensity mapped to [-0.5, 0.5].
FeatureMap compute_gray_mean(const Plane& gray, int cell_size);

/// Raised-cosine window with zero endpoints.
Plane hann_window(int rows, int cols);

FeatureMap apply_window(const FeatureMap& fmap, const Plane& window);

/// Channel-wise concatenation; grids must agree.
FeatureMap concat(std::vector<FeatureMap> parts);

/// HOG + color names (when color is available) + gray mean for one patch.
class FeatureExtractor {
 public:
  FeatureExtractor(int cell_size, std::shared_ptr<const CNTable> cn);

  FeatureMap operator()(const Patch& patch) const;
  int cell_size() const { return cell_size_; }
  int depth(bool color) const { return kHogChannels + (color && cn_ ? kCnChannels : 0) + 1; }

 private:
  int cell_size_;
  std::shared_ptr<const CNTable> cn_;
};

}  // namespace uhpsot
