#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

namespace uhpsot {

template <typename Scalar>
using ComplexPlane = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

using SpectrumPlane = ComplexPlane<double>;

namespace detail {

template <typename Scalar>
Eigen::FFT<Scalar>& fft_engine() {
  thread_local Eigen::FFT<Scalar> engine;
  return engine;
}

// In-place separable 2-D transform: columns are contiguous, rows go through a
// scratch buffer.
template <typename Scalar>
void transform2(ComplexPlane<Scalar>& a, bool inverse) {
  using C = std::complex<Scalar>;
  auto& fft = fft_engine<Scalar>();
  const Eigen::Index rows = a.rows(), cols = a.cols();
  std::vector<C> in(std::max(rows, cols)), out(std::max(rows, cols));
  for (Eigen::Index c = 0; c < cols; ++c) {
    C* col = a.data() + c * rows;
    std::copy(col, col + rows, in.begin());
    if (inverse) fft.inv(out.data(), in.data(), rows); else fft.fwd(out.data(), in.data(), rows);
    std::copy(out.begin(), out.begin() + rows, col);
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) in[c] = a(r, c);
    if (inverse) fft.inv(out.data(), in.data(), cols); else fft.fwd(out.data(), in.data(), cols);
    for (Eigen::Index c = 0; c < cols; ++c) a(r, c) = out[c];
  }
}

}  // namespace detail

/// Unnormalised forward 2-D DFT.
template <typename Derived>
ComplexPlane<typename Eigen::NumTraits<typename Derived::Scalar>::Real> fft2(const Eigen::ArrayBase<Derived>& in) {
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  ComplexPlane<Real> a = in.template cast<std::complex<Real>>();
  detail::transform2(a, false);
  return a;
}

/// Inverse 2-D DFT including the 1/N factor.
template <typename Scalar>
ComplexPlane<Scalar> ifft2(const ComplexPlane<Scalar>& in) {
  ComplexPlane<Scalar> a = in;
  detail::transform2(a, true);
  return a;
}

/// Real part of the inverse transform; callers use this for spectra of real
/// signals where the imaginary residue is rounding noise.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> ifft2_real(const ComplexPlane<Scalar>& in) {
  return ifft2(in).real();
}

/// Signed frequency index of DFT bin k in a length-n transform.
inline double signed_frequency(Eigen::Index k, Eigen::Index n) {
  return double(k <= (n - 1) / 2 ? k : k - n);
}

}  // namespace uhpsot
