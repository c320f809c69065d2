#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace uhpsot {

/// Single-channel image plane; rows index y, columns index x.
using Plane = Eigen::ArrayXXd;

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A decoded video frame with interleaved 8-bit samples (1 or 3 channels).
struct Frame {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<std::uint8_t> pixels;
  int index = 1;
  std::string path;

  Frame() = default;
  Frame(int w, int h, int c);

  std::uint8_t& at(int x, int y, int c) { return pixels[(std::size_t(y) * width + x) * channels + c]; }
  std::uint8_t at(int x, int y, int c) const { return pixels[(std::size_t(y) * width + x) * channels + c]; }

  bool is_color() const { return channels == 3; }
  /// True when every pixel has identical R, G and B samples.
  bool has_equal_channels() const;

  /// Luma with fixed ITU-R BT.601 weights, values in [0, 255].
  Plane gray() const;
  /// One plane per channel, values in [0, 255].
  std::vector<Plane> planes() const;
};

/// Decodes PNG or JPEG by file signature.
Frame load_image(const std::filesystem::path& path);
void save_png(const std::filesystem::path& path, const Frame& frame);

/// Bilinear sample with edge replication.
double sample_bilinear(const Plane& p, double x, double y);

/// Area-average downscale by a real factor; returns the input when
/// factor <= 1.
Plane downscale(const Plane& p, double factor);

}  // namespace uhpsot
