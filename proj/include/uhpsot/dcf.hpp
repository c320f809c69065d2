#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "uhpsot/box.hpp"
#include "uhpsot/features.hpp"
#include "uhpsot/fft.hpp"

namespace uhpsot {

/// Ridge added to every per-frequency division. It is part of the learning
/// objective, so closed forms and the iterative solver agree on it.
inline constexpr double kFilterRidge = 1e-4;

/// Splitting-scheme settings for filter learning. The defaults run the fixed
/// two-iteration schedule used for online tracking; a positive tolerance turns
/// the loop into a converge-until-stable solve.
struct AdmmOptions {
  int iterations = 2;
  double penalty_init = 1.0;
  double penalty_growth = 10.0;
  double penalty_max = 0.1;
  double tolerance = 0.0;
};

/// Frequency-domain multi-channel filter together with the label, spatial
/// weight and temporal coefficient it was learned with.
struct Template {
  std::vector<SpectrumPlane> f_hat;
  SpectrumPlane label_hat;
  Plane spatial_weight;
  double mu = 0.0;
  int frame_learned = 0;

  int rows() const { return f_hat.empty() ? 0 : int(f_hat.front().rows()); }
  int cols() const { return f_hat.empty() ? 0 : int(f_hat.front().cols()); }
  int depth() const { return int(f_hat.size()); }
  /// Spatial filter, one real plane per channel.
  std::vector<Plane> spatial() const;
  double squared_norm() const;
};

/// Sub-grid peak: offsets are signed circular shifts in bins.
struct Peak {
  double dx = 0.0;
  double dy = 0.0;
  double score = 0.0;
};

struct ResponseMap {
  Plane values;
  Peak peak;
};

/// Circularly centred Gaussian with value 1 at the zero-shift bin.
template <typename Scalar = double>
Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> make_gaussian_label(int rows, int cols, Scalar sigma) {
  Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> y(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const Scalar dr = Scalar(std::min(r, rows - r));
    for (int c = 0; c < cols; ++c) {
      const Scalar dc = Scalar(std::min(c, cols - c));
      y(r, c) = std::exp(-(dr * dr + dc * dc) / (2 * sigma * sigma));
    }
  }
  return y;
}

/// Minimises
///   1/2 |sum_d x_d (*) f_d - y|^2 + 1/2 sum_d |w . f_d|^2
///     + mu/2 |f - f_prev|^2 + ridge/2 |f|^2
/// where (*) is the circular correlation used by correlate(). Without a
/// previous filter the temporal term is dropped.
Template learn_template(const FeatureMap& x, const Plane& label, const Plane& weight, double mu,
                        const Template* previous, const AdmmOptions& options = {});

/// The objective above evaluated in the spatial domain for filter `f`.
double filter_objective(const FeatureMap& x, const Plane& label, const Plane& weight, double mu,
                        const Template* previous, const std::vector<Plane>& f);

/// Response = real(IDFT(sum_d conj(f_hat_d) * DFT(z_d))), with the peak
/// located by locate().
ResponseMap correlate(const Template& tmpl, const FeatureMap& z, int newton_iterations = 5);

/// Spectrum of the response without the inverse transform.
SpectrumPlane response_spectrum(const Template& tmpl, const FeatureMap& z);

/// Integer arg-max (first in row-major order on ties) refined by Newton steps
/// on the trigonometric interpolant of the map.
Peak locate(const Plane& response, int newton_iterations = 5);

/// Value of the trigonometric interpolant of a map at fractional (row, col).
double interpolate_response(const SpectrumPlane& spectrum, double row, double col);

// ---------------------------------------------------------------------------
// Appearance model: search-region geometry around a box plus the learned
// filter.

struct DcfParams {
  int cell_size = 4;
  double padding = 5.0;
  int template_max_px = 200;
  int template_min_px = 100;
  double output_sigma_factor = 1.0 / 16.0;
  double reg_window_min = 1e-3;
  double reg_window_max = 1e4;
  int scale_count = 5;
  double scale_step = 1.02;
  double scale_damping = 0.995;
  double mu = 15.0;
  AdmmOptions admm;
  int newton_iterations = 5;
  /// Radius in cells around the proposal centre searched by similarity().
  int similarity_radius = 1;
};

struct AppearanceProposal {
  BoundingBox box;
  double score = 0.0;
  double scale = 1.0;
  int correlations = 0;
};

/// Prepared image planes for one frame (RGB or gray only).
struct FramePlanes {
  std::vector<Plane> channels;
  int width = 0;
  int height = 0;

  static FramePlanes from(const Frame& frame, bool use_color);
  bool is_color() const { return channels.size() == 3; }
};

class AppearanceModel {
 public:
  AppearanceModel(DcfParams params, std::shared_ptr<const CNTable> cn, bool use_color);

  /// Fixes the template grid from the first box and learns the initial filter.
  void initialize(const FramePlanes& frame, const BoundingBox& box);

  /// Windowed features of the square search region around `box`, enlarged by
  /// `scale`.
  FeatureMap features_at(const FramePlanes& frame, const BoundingBox& box, double scale = 1.0) const;

  /// Multi-scale search around prev_box with the latest filter.
  AppearanceProposal propose(const FramePlanes& frame, const BoundingBox& prev_box) const;

  /// Filter learned at `box` with temporal coefficient mu against `previous`.
  Template learn(const FramePlanes& frame, const BoundingBox& box, double mu, const Template& previous, int frame_index) const;

  /// Normalised correlation between a filter and the region at `box`:
  /// max response within similarity_radius cells of zero shift divided by
  /// |f| |z|. Zero for degenerate boxes.
  double similarity(const Template& tmpl, const FramePlanes& frame, const BoundingBox& box) const;

  const Template& latest() const { return latest_; }
  void set_latest(Template t) { latest_ = std::move(t); }

  const DcfParams& params() const { return params_; }
  std::vector<double> scales() const;
  int grid() const { return grid_; }
  int template_px() const { return template_px_; }
  const Plane& label() const { return label_; }
  const Plane& weight() const { return weight_; }
  const Plane& window() const { return window_; }

 private:
  double region_side(const BoundingBox& box, double scale) const;

  DcfParams params_;
  FeatureExtractor extractor_;
  int grid_ = 0;
  int template_px_ = 0;
  Plane label_;
  Plane weight_;
  Plane window_;
  Template latest_;
};

/// Standalone five-scale appearance proposal for a learned model.
inline AppearanceProposal propose_appearance(const FramePlanes& frame, const BoundingBox& prev_box, const AppearanceModel& model) {
  return model.propose(frame, prev_box);
}

}  // namespace uhpsot
