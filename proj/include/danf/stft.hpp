// Copyright 2026 The danf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
#pragma once

#include <complex>
#include <utility>

#include "danf/common.hpp"

namespace danf {

struct StftParams {
  int window_size = 256;
  int hop = 64;
};

template <typename T>
Vec<T> hann_window(int n) {
  Vec<T> w(n);
  for (int i = 0; i < n; ++i)
    w[i] = static_cast<T>(0.5 - 0.5 * std::cos(2.0 * kPi * i / n));
  return w;
}

// Number of analysis frames for a signal of length len. Frames start at
// m*hop; when the hop does not divide (len - window) evenly, one extra
// zero-padded tail frame covers the remainder. Signals shorter than the
// window are zero-padded up to it.
inline int stft_frame_count(int len, const StftParams& p) {
  if (len < 1) throw InvalidInput("stft: empty signal");
  if (p.hop < 1) throw InvalidInput("stft: hop must be >= 1");
  if (len <= p.window_size) return 1;
  int m = (len - p.window_size) / p.hop + 1;
  if ((len - p.window_size) % p.hop != 0) ++m;
  return m;
}

inline int stft_bin_count(const StftParams& p) { return p.window_size / 2 + 1; }

// One-sided DFT of a Hann-windowed frame expressed as two F x W real
// matrices, so both the transform and its adjoint are plain GEMMs.
template <typename T>
struct StftBasis {
  Mat<T> re;      // F x W: cos(2 pi f n / W) * w[n]
  Mat<T> im;      // F x W: -sin(2 pi f n / W) * w[n]
  Vec<T> window;  // Hann, length W

  explicit StftBasis(const StftParams& p) {
    const int W = p.window_size;
    const int F = stft_bin_count(p);
    window = hann_window<T>(W);
    re.resize(F, W);
    im.resize(F, W);
    for (int f = 0; f < F; ++f) {
      for (int n = 0; n < W; ++n) {
        double ang = 2.0 * kPi * f * n / W;
        re(f, n) = static_cast<T>(std::cos(ang)) * window[n];
        im(f, n) = static_cast<T>(-std::sin(ang)) * window[n];
      }
    }
  }
};

// Windowless frame matrix, W x M; out-of-range samples are zero.
template <typename T, typename Derived>
Mat<T> stft_frames(const Eigen::MatrixBase<Derived>& x, const StftParams& p) {
  const int len = static_cast<int>(x.size());
  const int M = stft_frame_count(len, p);
  Mat<T> frames = Mat<T>::Zero(p.window_size, M);
  for (int m = 0; m < M; ++m) {
    int start = m * p.hop;
    int count = std::min(p.window_size, len - start);
    for (int n = 0; n < count; ++n)
      frames(n, m) = static_cast<T>(x[start + n]);
  }
  return frames;
}

template <typename T>
struct StftPair {
  Mat<T> re;  // M x F
  Mat<T> im;  // M x F
};

template <typename T, typename Derived>
StftPair<T> stft_pair(const Eigen::MatrixBase<Derived>& x, const StftParams& p,
                      const StftBasis<T>& basis) {
  Mat<T> frames = stft_frames<T>(x, p);  // W x M
  StftPair<T> out;
  out.re = (basis.re * frames).transpose();  // M x F
  out.im = (basis.im * frames).transpose();
  return out;
}

// Adjoint of stft_pair: accumulates d/dx from (dRe, dIm), both M x F.
template <typename T>
Vec<T> stft_adjoint(const Mat<T>& d_re, const Mat<T>& d_im,
                    const StftParams& p, int len, const StftBasis<T>& basis) {
  const int M = static_cast<int>(d_re.rows());
  Mat<T> d_frames = basis.re.transpose() * d_re.transpose() +
                    basis.im.transpose() * d_im.transpose();  // W x M
  Vec<T> dx = Vec<T>::Zero(len);
  for (int m = 0; m < M; ++m) {
    int start = m * p.hop;
    int count = std::min(p.window_size, len - start);
    for (int n = 0; n < count; ++n) dx[start + n] += d_frames(n, m);
  }
  return dx;
}

// Hann-windowed one-sided STFT, M x F complex.
template <typename T, typename Derived>
Mat<std::complex<T>> stft(const Eigen::MatrixBase<Derived>& x,
                          const StftParams& p) {
  StftBasis<T> basis(p);
  StftPair<T> s = stft_pair<T>(x, p, basis);
  Mat<std::complex<T>> out(s.re.rows(), s.re.cols());
  for (Eigen::Index i = 0; i < s.re.rows(); ++i)
    for (Eigen::Index j = 0; j < s.re.cols(); ++j)
      out(i, j) = std::complex<T>(s.re(i, j), s.im(i, j));
  return out;
}

}  // namespace danf
