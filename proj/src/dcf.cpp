#include "uhpsot/dcf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace uhpsot {

namespace {

using Spectra = std::vector<SpectrumPlane>;

Spectra transform(const std::vector<Plane>& planes) {
  Spectra out;
  out.reserve(planes.size());
  for (const auto& p : planes) out.push_back(fft2(p));
  return out;
}

std::vector<Plane> inverse_real(const Spectra& spectra) {
  std::vector<Plane> out;
  out.reserve(spectra.size());
  for (const auto& s : spectra) out.push_back(ifft2_real(s));
  return out;
}

void check_inputs(const FeatureMap& x, const Plane& label, const Plane& weight, double mu, const Template* previous) {
  if (x.depth() == 0) throw std::invalid_argument("empty feature map");
  if (label.rows() != x.rows() || label.cols() != x.cols() || weight.rows() != x.rows() || weight.cols() != x.cols())
    throw std::invalid_argument("label, weight and features must share a grid");
  if (!x.all_finite() || !label.isFinite().all() || !weight.isFinite().all() || !std::isfinite(mu))
    throw std::invalid_argument("non-finite input to filter learning");
  if ((weight < 0).any() || mu < 0) throw std::invalid_argument("weight and mu must be non-negative");
  if (previous && (previous->depth() != x.depth() || previous->rows() != x.rows() || previous->cols() != x.cols()))
    throw std::invalid_argument("previous filter does not match the feature grid");
}

// Solves (rho I + X X^H) F = b per frequency by Sherman-Morrison.
Spectra solve_rank_one(const Spectra& X, const SpectrumPlane& xhx, const Spectra& b, double rho) {
  SpectrumPlane xhb = SpectrumPlane::Zero(xhx.rows(), xhx.cols());
  for (std::size_t d = 0; d < X.size(); ++d) xhb += X[d].conjugate() * b[d];
  const SpectrumPlane coeff = xhb / (xhx + rho);
  Spectra f(X.size());
  for (std::size_t d = 0; d < X.size(); ++d) f[d] = (b[d] - X[d] * coeff) / rho;
  return f;
}

double sum_squares(const std::vector<Plane>& v) {
  double s = 0;
  for (const auto& p : v) s += p.square().sum();
  return s;
}

}  // namespace

std::vector<Plane> Template::spatial() const { return inverse_real(f_hat); }

double Template::squared_norm() const {
  // Parseval: spatial energy = spectral energy / N.
  double s = 0;
  for (const auto& f : f_hat) s += f.abs2().sum();
  return f_hat.empty() ? 0.0 : s / double(rows() * cols());
}

Template learn_template(const FeatureMap& x, const Plane& label, const Plane& weight, double mu, const Template* previous,
                        const AdmmOptions& options) {
  check_inputs(x, label, weight, mu, previous);
  if (!previous) mu = 0.0;

  const Spectra X = transform(x.channels);
  const SpectrumPlane Y = fft2(label);
  const SpectrumPlane Yc = Y.conjugate();
  SpectrumPlane xhx = SpectrumPlane::Zero(x.rows(), x.cols());
  for (const auto& xd : X) xhx += xd.abs2().cast<std::complex<double>>();

  const auto data_rhs = [&](Spectra& b) {
    for (std::size_t d = 0; d < X.size(); ++d) {
      b[d] = X[d] * Yc;
      if (previous && mu > 0) b[d] += mu * previous->f_hat[d];
    }
  };

  Template out;
  out.label_hat = Y;
  out.spatial_weight = weight;
  out.mu = mu;
  Spectra b(X.size());

  if ((weight == 0).all()) {
    // No spatial coupling: every frequency decouples and the solve is exact.
    data_rhs(b);
    out.f_hat = solve_rank_one(X, xhx, b, mu + kFilterRidge);
    return out;
  }

  const Plane w2 = weight.square();
  const int depth = x.depth();
  std::vector<Plane> g = previous ? previous->spatial() : std::vector<Plane>(depth, Plane::Zero(x.rows(), x.cols()));
  std::vector<Plane> s(depth, Plane::Zero(x.rows(), x.cols()));
  Spectra G = transform(g);
  Spectra S(depth, SpectrumPlane::Zero(x.rows(), x.cols()));
  std::vector<Plane> f_last;

  double gamma = options.penalty_init;
  for (int it = 0; it < options.iterations; ++it) {
    // Filter step: data + temporal + ridge + augmented penalty, per frequency.
    data_rhs(b);
    for (int d = 0; d < depth; ++d) b[d] += gamma * (G[d] - S[d]);
    out.f_hat = solve_rank_one(X, xhx, b, mu + gamma + kFilterRidge);
    std::vector<Plane> f = inverse_real(out.f_hat);

    // Spatial step: elementwise shrinkage by the regularisation weight.
    double primal = 0, change = 0;
    for (int d = 0; d < depth; ++d) {
      g[d] = gamma * (f[d] + s[d]) / (w2 + gamma);
      s[d] += f[d] - g[d];
      primal += (f[d] - g[d]).square().sum();
      if (!f_last.empty()) change += (f[d] - f_last[d]).square().sum();
    }
    G = transform(g);
    S = transform(s);

    if (options.tolerance > 0 && !f_last.empty()) {
      const double scale = std::max(sum_squares(f), 1e-300);
      if (std::sqrt(primal / scale) < options.tolerance && std::sqrt(change / scale) < options.tolerance) break;
    }
    f_last = std::move(f);
    gamma = std::min(gamma * options.penalty_growth, options.penalty_max);
  }
  return out;
}

double filter_objective(const FeatureMap& x, const Plane& label, const Plane& weight, double mu, const Template* previous,
                        const std::vector<Plane>& f) {
  check_inputs(x, label, weight, mu, previous);
  if (int(f.size()) != x.depth()) throw std::invalid_argument("filter depth mismatch");
  SpectrumPlane r_hat = SpectrumPlane::Zero(x.rows(), x.cols());
  for (int d = 0; d < x.depth(); ++d) r_hat += fft2(f[d]).conjugate() * fft2(x.channels[d]);
  const Plane r = ifft2_real(r_hat);
  double e = 0.5 * (r - label).square().sum();
  for (int d = 0; d < x.depth(); ++d) {
    e += 0.5 * (weight * f[d]).square().sum();
    e += 0.5 * kFilterRidge * f[d].square().sum();
  }
  if (previous && mu > 0) {
    const auto fp = previous->spatial();
    for (int d = 0; d < x.depth(); ++d) e += 0.5 * mu * (f[d] - fp[d]).square().sum();
  }
  return e;
}

SpectrumPlane response_spectrum(const Template& tmpl, const FeatureMap& z) {
  if (z.depth() != tmpl.depth() || z.rows() != tmpl.rows() || z.cols() != tmpl.cols())
    throw std::invalid_argument("feature map does not match the filter");
  SpectrumPlane r = SpectrumPlane::Zero(z.rows(), z.cols());
  for (int d = 0; d < z.depth(); ++d) r += tmpl.f_hat[d].conjugate() * fft2(z.channels[d]);
  return r;
}

ResponseMap correlate(const Template& tmpl, const FeatureMap& z, int newton_iterations) {
  ResponseMap out;
  out.values = ifft2_real(response_spectrum(tmpl, z));
  out.peak = locate(out.values, newton_iterations);
  return out;
}

namespace {

// One axis of the trigonometric interpolant: basis value and first two
// derivatives for bin k evaluated at position t. The Nyquist bin of an even
// length uses cos so the interpolant stays real and symmetric.
struct AxisBasis {
  std::vector<std::complex<double>> v, d1, d2;
};

AxisBasis axis_basis(Eigen::Index n, double t) {
  AxisBasis b;
  b.v.resize(n);
  b.d1.resize(n);
  b.d2.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (n % 2 == 0 && k == n / 2) {
      const double a = std::numbers::pi;
      b.v[k] = std::cos(a * t);
      b.d1[k] = -a * std::sin(a * t);
      b.d2[k] = -a * a * std::cos(a * t);
    } else {
      const double a = 2 * std::numbers::pi * signed_frequency(k, n) / double(n);
      const std::complex<double> e = std::polar(1.0, a * t);
      b.v[k] = e;
      b.d1[k] = std::complex<double>(0, a) * e;
      b.d2[k] = -a * a * e;
    }
  }
  return b;
}

struct Taylor2 {
  double value, gr, gc, hrr, hrc, hcc;
};

Taylor2 evaluate(const SpectrumPlane& spec, double row, double col) {
  const AxisBasis br = axis_basis(spec.rows(), row), bc = axis_basis(spec.cols(), col);
  std::complex<double> v = 0, gr = 0, gc = 0, hrr = 0, hrc = 0, hcc = 0;
  for (Eigen::Index c = 0; c < spec.cols(); ++c) {
    std::complex<double> s0 = 0, s1 = 0, s2 = 0;
    for (Eigen::Index r = 0; r < spec.rows(); ++r) {
      s0 += spec(r, c) * br.v[r];
      s1 += spec(r, c) * br.d1[r];
      s2 += spec(r, c) * br.d2[r];
    }
    v += s0 * bc.v[c];
    gr += s1 * bc.v[c];
    gc += s0 * bc.d1[c];
    hrr += s2 * bc.v[c];
    hrc += s1 * bc.d1[c];
    hcc += s0 * bc.d2[c];
  }
  const double n = double(spec.size());
  return {v.real() / n, gr.real() / n, gc.real() / n, hrr.real() / n, hrc.real() / n, hcc.real() / n};
}

double wrap(double pos, Eigen::Index n) {
  pos = std::fmod(pos, double(n));
  if (pos < 0) pos += double(n);
  return pos > double(n) / 2 ? pos - double(n) : pos;
}

}  // namespace

double interpolate_response(const SpectrumPlane& spectrum, double row, double col) { return evaluate(spectrum, row, col).value; }

Peak locate(const Plane& response, int newton_iterations) {
  if (response.size() == 0) throw std::invalid_argument("empty response map");
  Eigen::Index best_r = 0, best_c = 0;
  double best = response(0, 0);
  for (Eigen::Index r = 0; r < response.rows(); ++r)
    for (Eigen::Index c = 0; c < response.cols(); ++c)
      if (response(r, c) > best) {
        best = response(r, c);
        best_r = r;
        best_c = c;
      }

  double row = double(best_r), col = double(best_c), score = best;
  if (newton_iterations > 0 && response.rows() > 1 && response.cols() > 1) {
    const SpectrumPlane spec = fft2(response);
    for (int it = 0; it < newton_iterations; ++it) {
      const Taylor2 t = evaluate(spec, row, col);
      const double det = t.hrr * t.hcc - t.hrc * t.hrc;
      // Only step inside a concave neighbourhood.
      if (!(t.hrr < 0 && det > 0)) break;
      double step_r = -(t.hcc * t.gr - t.hrc * t.gc) / det;
      double step_c = -(t.hrr * t.gc - t.hrc * t.gr) / det;
      const double len = std::hypot(step_r, step_c);
      if (len > 0.5) {
        step_r *= 0.5 / len;
        step_c *= 0.5 / len;
      }
      const double v = evaluate(spec, row + step_r, col + step_c).value;
      if (v < score) break;
      row += step_r;
      col += step_c;
      score = v;
      if (len < 1e-10) break;
    }
  }
  return {wrap(col, response.cols()), wrap(row, response.rows()), score};
}

// ---------------------------------------------------------------------------

FramePlanes FramePlanes::from(const Frame& frame, bool use_color) {
  FramePlanes out;
  out.width = frame.width;
  out.height = frame.height;
  if (use_color && frame.is_color()) {
    out.channels = frame.planes();
  } else {
    out.channels.push_back(frame.gray());
  }
  return out;
}

AppearanceModel::AppearanceModel(DcfParams params, std::shared_ptr<const CNTable> cn, bool use_color)
    : params_(params), extractor_(params.cell_size, use_color ? std::move(cn) : nullptr) {
  if (params_.scale_count < 1) throw std::invalid_argument("scale_count must be >= 1");
  if (params_.padding < 1) throw std::invalid_argument("padding must be >= 1");
}

std::vector<double> AppearanceModel::scales() const {
  std::vector<double> out;
  const int half = params_.scale_count / 2;
  for (int k = -half; k <= params_.scale_count - 1 - half; ++k) out.push_back(std::pow(params_.scale_step, k));
  return out;
}

double AppearanceModel::region_side(const BoundingBox& box, double scale) const {
  return params_.padding * std::sqrt(box.w * box.h) * scale;
}

void AppearanceModel::initialize(const FramePlanes& frame, const BoundingBox& box) {
  if (!(box.w >= 1 && box.h >= 1)) throw FeatureError("degenerate box");
  const int cell = params_.cell_size;
  const double side = region_side(box, 1.0);
  const double clamped = std::clamp(side, double(params_.template_min_px), double(params_.template_max_px));
  grid_ = std::max(2, int(std::lround(clamped / cell)));
  template_px_ = grid_ * cell;

  // Target extent in cells, centred in the grid.
  const double to_cells = template_px_ / side / cell;
  const double tw = box.w * to_cells, th = box.h * to_cells;
  const double sigma = std::sqrt(tw * th) * params_.output_sigma_factor;
  label_ = make_gaussian_label(grid_, grid_, std::max(sigma, 1e-3));

  weight_ = Plane::Constant(grid_, grid_, params_.reg_window_max);
  const double cy = (grid_ - 1) / 2.0, cx = (grid_ - 1) / 2.0;
  for (int r = 0; r < grid_; ++r)
    for (int c = 0; c < grid_; ++c)
      if (std::abs(r - cy) <= th / 2 && std::abs(c - cx) <= tw / 2) weight_(r, c) = params_.reg_window_min;
  window_ = hann_window(grid_, grid_);

  latest_ = learn_template(features_at(frame, box), label_, weight_, 0.0, nullptr, params_.admm);
  latest_.frame_learned = 1;
}

FeatureMap AppearanceModel::features_at(const FramePlanes& frame, const BoundingBox& box, double scale) const {
  const double s = std::sqrt(box.w * box.h) * scale;
  const BoundingBox square = BoundingBox::from_center(box.center(), s, s);
  const Patch patch = extract_patch(frame.channels, square, params_.padding, template_px_, template_px_);
  return apply_window(extractor_(patch), window_);
}

AppearanceProposal AppearanceModel::propose(const FramePlanes& frame, const BoundingBox& prev_box) const {
  AppearanceProposal best;
  best.score = -std::numeric_limits<double>::infinity();
  best.box = prev_box;
  for (double scale : scales()) {
    const ResponseMap resp = correlate(latest_, features_at(frame, prev_box, scale), params_.newton_iterations);
    ++best.correlations;
    const double damped = resp.peak.score * (std::abs(scale - 1.0) > 1e-12 ? params_.scale_damping : 1.0);
    if (damped > best.score) {
      const double px = params_.cell_size * region_side(prev_box, scale) / template_px_;
      const Eigen::Vector2d c = prev_box.center() + px * Eigen::Vector2d(resp.peak.dx, resp.peak.dy);
      best.score = damped;
      best.scale = scale;
      best.box = BoundingBox::from_center(c, prev_box.w * scale, prev_box.h * scale);
    }
  }
  return best;
}

Template AppearanceModel::learn(const FramePlanes& frame, const BoundingBox& box, double mu, const Template& previous,
                                int frame_index) const {
  Template t = learn_template(features_at(frame, box), label_, weight_, mu, &previous, params_.admm);
  t.frame_learned = frame_index;
  return t;
}

double AppearanceModel::similarity(const Template& tmpl, const FramePlanes& frame, const BoundingBox& box) const {
  if (!box.valid() || box.w < 1 || box.h < 1) return 0.0;
  const FeatureMap z = features_at(frame, box);
  const double zn = std::sqrt(z.squared_norm()), fn = std::sqrt(tmpl.squared_norm());
  if (zn <= 0 || fn <= 0) return 0.0;
  const Plane r = ifft2_real(response_spectrum(tmpl, z));
  const int rad = params_.similarity_radius;
  double best = -std::numeric_limits<double>::infinity();
  for (int dy = -rad; dy <= rad; ++dy)
    for (int dx = -rad; dx <= rad; ++dx) {
      const auto rr = (dy + r.rows()) % r.rows(), cc = (dx + r.cols()) % r.cols();
      best = std::max(best, r(rr, cc));
    }
  return best / (fn * zn);
}

}  // namespace uhpsot
