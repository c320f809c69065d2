#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "uhpsot/eval.hpp"

namespace uhpsot {

/// Per-sequence line of a benchmark summary.
struct SequenceReport {
  std::string name;
  std::size_t frames = 0;
  double seconds = 0.0;
  double auc = 0.0;
  double dp20 = 0.0;
  double fps = 0.0;
  std::vector<double> success;
  std::vector<double> precision;
  /// Known hard sequences whose scores swing with small feature changes.
  bool fragile = false;
};

bool is_fragile_sequence(const std::string& name);

SequenceReport make_report(const std::string& name, const EvalResult& result, std::size_t frames, double seconds);

struct Summary {
  std::vector<SequenceReport> sequences;
  double mean_auc = 0.0;
  double mean_dp20 = 0.0;
  double mean_fps = 0.0;
  std::vector<double> success;    // frame-unweighted mean over sequences
  std::vector<double> precision;
};

/// Sorts by name and averages the curves.
Summary aggregate(std::vector<SequenceReport> sequences);

void write_summary(const std::filesystem::path& file, const Summary& summary);
Summary read_summary(const std::filesystem::path& file);

/// success.csv and precision.csv: one column per sequence plus "mean".
void write_curve_csv(const std::filesystem::path& dir, const Summary& summary);

/// Line plot of one curve family. `success` picks the IoU axis, otherwise the
/// pixel-threshold axis.
std::string render_svg(const Summary& summary, bool success);

/// Writes success.svg, precision.svg and both CSV files into `dir`.
void write_plots(const std::filesystem::path& dir, const Summary& summary);

}  // namespace uhpsot
