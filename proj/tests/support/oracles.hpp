#pragma once

// Slow, direct reference computations used to check the fast paths.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "uhpsot/dcf.hpp"
#include "uhpsot/eval.hpp"
#include "uhpsot/features.hpp"

namespace oracle {

using uhpsot::Plane;

inline uhpsot::FeatureMap random_features(std::mt19937& rng, int rows, int cols, int depth) {
  std::normal_distribution<double> n(0.0, 1.0);
  uhpsot::FeatureMap x;
  for (int d = 0; d < depth; ++d) {
    Plane p(rows, cols);
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = n(rng);
    x.channels.push_back(p);
  }
  return x;
}

inline Plane random_plane(std::mt19937& rng, int rows, int cols, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Plane p(rows, cols);
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = u(rng);
  return p;
}

/// r(s) = sum_p f(p) z(p + s), all indices circular.
inline Plane circular_correlation(const std::vector<Plane>& f, const std::vector<Plane>& z) {
  const int R = int(z.front().rows()), C = int(z.front().cols());
  Plane r = Plane::Zero(R, C);
  for (std::size_t d = 0; d < f.size(); ++d)
    for (int sr = 0; sr < R; ++sr)
      for (int sc = 0; sc < C; ++sc) {
        double acc = 0;
        for (int pr = 0; pr < R; ++pr)
          for (int pc = 0; pc < C; ++pc) acc += f[d](pr, pc) * z[d]((pr + sr) % R, (pc + sc) % C);
        r(sr, sc) += acc;
      }
  return r;
}

/// Minimiser of the filter-learning objective by one dense solve of the
/// normal equations over all R*C*D unknowns. The data term is written as an
/// explicit correlation matrix built entry by entry.
inline std::vector<Plane> dense_filter_solve(const uhpsot::FeatureMap& x, const Plane& label, const Plane& weight,
                                             double mu, const std::vector<Plane>* previous) {
  const int R = x.rows(), C = x.cols(), D = x.depth(), N = R * C;
  const auto idx = [C](int r, int c) { return r * C + c; };

  // K(s, d*N + p) = x_d(p + s)
  Eigen::MatrixXd K(N, N * D);
  for (int sr = 0; sr < R; ++sr)
    for (int sc = 0; sc < C; ++sc)
      for (int d = 0; d < D; ++d)
        for (int pr = 0; pr < R; ++pr)
          for (int pc = 0; pc < C; ++pc)
            K(idx(sr, sc), d * N + idx(pr, pc)) = x.channels[std::size_t(d)]((pr + sr) % R, (pc + sc) % C);

  Eigen::VectorXd y(N);
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) y(idx(r, c)) = label(r, c);

  const double m = previous ? mu : 0.0;
  Eigen::MatrixXd A = K.transpose() * K;
  Eigen::VectorXd b = K.transpose() * y;
  for (int d = 0; d < D; ++d)
    for (int r = 0; r < R; ++r)
      for (int c = 0; c < C; ++c) {
        const int k = d * N + idx(r, c);
        A(k, k) += weight(r, c) * weight(r, c) + m + uhpsot::kFilterRidge;
        if (previous) b(k) += m * (*previous)[std::size_t(d)](r, c);
      }
  const Eigen::VectorXd f = A.ldlt().solve(b);

  std::vector<Plane> out(std::size_t(D), Plane(R, C));
  for (int d = 0; d < D; ++d)
    for (int r = 0; r < R; ++r)
      for (int c = 0; c < C; ++c) out[std::size_t(d)](r, c) = f(d * N + idx(r, c));
  return out;
}

inline double relative_error(const std::vector<Plane>& a, const std::vector<Plane>& b) {
  double num = 0, den = 0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    num += (a[d] - b[d]).square().sum();
    den += b[d].square().sum();
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

/// Extent of the thresholded column (or row) projection: first and one past
/// the last index whose sum reaches cut * max.
inline std::pair<int, int> projection_extent(const Eigen::ArrayXd& sums, double cut) {
  const double t = cut * sums.maxCoeff();
  int lo = -1, hi = -1;
  for (int i = 0; i < int(sums.size()); ++i)
    if (sums(i) >= t) {
      if (lo < 0) lo = i;
      hi = i;
    }
  return {lo, hi + 1};
}

/// Success and precision by counting frames threshold by threshold.
struct Curves {
  std::vector<double> success, precision;
  double auc = 0, dp20 = 0;
};

inline Curves enumerate_curves(const std::vector<double>& ious, const std::vector<double>& errors) {
  Curves c;
  const double n = double(ious.size());
  for (int i = 0; i <= 20; ++i) {
    const double tau = i / 20.0;
    int k = 0;
    for (double v : ious) k += v > tau;
    c.success.push_back(k / n);
  }
  for (int p = 0; p <= 50; ++p) {
    int k = 0;
    for (double e : errors) k += e <= double(p);
    c.precision.push_back(k / n);
  }
  for (double s : c.success) c.auc += s;
  c.auc /= 21.0;
  c.dp20 = c.precision[20];
  return c;
}

}  // namespace oracle
