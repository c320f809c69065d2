#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "uhpsot/box.hpp"

namespace uhpsot {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One benchmark sequence in OTB-style layout. Boxes keep the coordinates of
/// the annotation file.
struct Sequence {
  std::string name;
  std::vector<std::filesystem::path> frames;
  std::vector<BoundingBox> ground_truth;
  /// False where the target is absent, invisible or unannotated; such frames
  /// are tracked but left out of the metrics.
  std::vector<bool> visible;
  BoundingBox init_box;
  std::vector<std::string> attributes;

  std::size_t size() const { return frames.size(); }
};

/// Parses one "x,y,w,h" line (commas, tabs or spaces). NaN fields give an
/// invalid box. Throws DatasetError mentioning `line_no` on malformed input.
BoundingBox parse_box_line(const std::string& line, std::size_t line_no);

std::vector<BoundingBox> read_boxes(const std::filesystem::path& file);
void write_boxes(const std::filesystem::path& file, std::span<const BoundingBox> boxes);

/// Loads a sequence directory: images from img/ (or the directory itself),
/// ground truth from groundtruth_rect.txt, groundtruth.txt or *_gt.txt, and
/// optional full_occlusion.txt / out_of_view.txt visibility flags.
Sequence load_sequence(const std::filesystem::path& root);

/// Sequence directories under a dataset root, sorted by name.
std::vector<std::filesystem::path> list_sequences(const std::filesystem::path& root);

inline constexpr int kSuccessPoints = 21;    // IoU 0:0.05:1
inline constexpr int kPrecisionPoints = 51;  // 0:1:50 pixels

struct EvalResult {
  std::vector<double> ious;
  std::vector<double> center_errors;
  std::vector<double> success;
  std::vector<double> precision;
  double auc = 0.0;
  double dp20 = 0.0;
  double fps = 0.0;
};

/// success(t) = share of frames with IoU > t, precision(p) = share with
/// centre error <= p, auc = mean success, dp20 = precision(20).
EvalResult summarize(std::span<const double> ious, std::span<const double> errors);

/// Per-frame IoU/centre error against ground truth over visible frames.
EvalResult evaluate(std::span<const BoundingBox> predicted, const Sequence& seq);

double success_threshold(int i);

}  // namespace uhpsot
