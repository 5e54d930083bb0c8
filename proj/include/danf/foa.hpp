// Copyright 2026 The danf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
#pragma once

#include <array>
#include <complex>

#include "danf/stft.hpp"

namespace danf {

// Channel order is W, X, Y, Z throughout. W carries no 1/sqrt(2) factor and
// the directional channels carry plain direction cosines, so the integrated
// intensity vector of a plane wave is exactly parallel to its arrival
// direction.
enum FoaChannel { kW = 0, kX = 1, kY = 2, kZ = 3 };

inline constexpr int kFoaChannels = 4;

template <typename T>
struct FoaRir {
  Mat<T> samples;  // 4 x T, rows W,X,Y,Z
  int sample_rate = 16000;

  int length() const { return static_cast<int>(samples.cols()); }

  void validate() const {
    if (samples.rows() != kFoaChannels)
      throw InvalidInput("FoaRir: expected 4 channels");
    if (samples.cols() < 1) throw InvalidInput("FoaRir: empty signal");
    if (!samples.allFinite()) throw InvalidInput("FoaRir: non-finite samples");
    if (sample_rate <= 0) throw InvalidInput("FoaRir: invalid sample rate");
  }
};

template <typename T>
struct TfGrid {
  std::array<Mat<std::complex<T>>, kFoaChannels> values;  // each M x F
  int frame_count = 0;
  int bin_count = 0;
  int window_size = 0;
  int hop = 0;
};

template <typename T>
struct IntensityVec {
  T x = 0, y = 0, z = 0;

  T norm() const { return std::sqrt(x * x + y * y + z * z); }
};

template <typename T>
TfGrid<T> stft_foa(const FoaRir<T>& h, const StftParams& p) {
  h.validate();
  TfGrid<T> grid;
  StftBasis<T> basis(p);
  for (int c = 0; c < kFoaChannels; ++c) {
    StftPair<T> s = stft_pair<T>(h.samples.row(c).transpose(), p, basis);
    Mat<std::complex<T>> v(s.re.rows(), s.re.cols());
    for (Eigen::Index i = 0; i < s.re.rows(); ++i)
      for (Eigen::Index j = 0; j < s.re.cols(); ++j)
        v(i, j) = std::complex<T>(s.re(i, j), s.im(i, j));
    grid.values[static_cast<std::size_t>(c)] = std::move(v);
  }
  grid.frame_count = static_cast<int>(grid.values[0].rows());
  grid.bin_count = static_cast<int>(grid.values[0].cols());
  grid.window_size = p.window_size;
  grid.hop = p.hop;
  return grid;
}

// Per-bin intensity vector [Re(W*X), Re(W*Y), Re(W*Z)], one M x F plane per
// Cartesian component.
template <typename T>
std::array<Mat<T>, 3> intensity_vector_field(const TfGrid<T>& u) {
  if (u.values.size() != kFoaChannels || u.frame_count < 1)
    throw InvalidInput("intensity_vector_field: expected a 4-channel grid");
  std::array<Mat<T>, 3> field;
  const auto& w = u.values[kW];
  for (int a = 0; a < 3; ++a) {
    const auto& d = u.values[static_cast<std::size_t>(kX + a)];
    if (d.rows() != w.rows() || d.cols() != w.cols())
      throw InvalidInput("intensity_vector_field: channel shape mismatch");
    Mat<T> plane(w.rows(), w.cols());
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        plane(i, j) = (std::conj(w(i, j)) * d(i, j)).real();
    field[static_cast<std::size_t>(a)] = std::move(plane);
  }
  return field;
}

// Unweighted sum of the intensity field over all time frames and bins.
template <typename T>
IntensityVec<T> integrated_intensity(const FoaRir<T>& h, const StftParams& p) {
  TfGrid<T> u = stft_foa(h, p);
  std::array<Mat<T>, 3> field = intensity_vector_field(u);
  return IntensityVec<T>{field[0].sum(), field[1].sum(), field[2].sum()};
}

template <typename T>
struct Direction {
  T azimuth_deg = 0;    // [0, 360), counterclockwise from +x
  T elevation_deg = 0;  // [-90, 90]
};

template <typename T>
Direction<T> doa_from_intensity(const IntensityVec<T>& iv) {
  T n = iv.norm();
  if (!(n > T(0)))
    throw UndefinedDirection("doa_from_intensity: zero intensity vector");
  T az = static_cast<T>(std::atan2(static_cast<double>(iv.y),
                                   static_cast<double>(iv.x)) *
                        180.0 / kPi);
  if (az < T(0)) az += T(360);
  if (az >= T(360)) az -= T(360);
  T el = static_cast<T>(
      std::asin(std::clamp(static_cast<double>(iv.z / n), -1.0, 1.0)) * 180.0 /
      kPi);
  return Direction<T>{az, el};
}

// (w,x,y,z) channel gains of a unit plane wave from (azimuth, elevation).
template <typename T>
Eigen::Matrix<T, 4, 1> encode_plane_wave_foa(T azimuth_deg, T elevation_deg,
                                             T gain) {
  double az = static_cast<double>(azimuth_deg) * kPi / 180.0;
  double el = static_cast<double>(elevation_deg) * kPi / 180.0;
  Eigen::Matrix<T, 4, 1> g;
  g[kW] = gain;
  g[kX] = gain * static_cast<T>(std::cos(az) * std::cos(el));
  g[kY] = gain * static_cast<T>(std::sin(az) * std::cos(el));
  g[kZ] = gain * static_cast<T>(std::sin(el));
  return g;
}

// Absolute circular azimuth difference in [0, 180].
template <typename T>
T circular_azimuth_error(T a_deg, T b_deg) {
  T d = std::fmod(std::abs(a_deg - b_deg), T(360));
  return d > T(180) ? T(360) - d : d;
}

}  // namespace danf
