// Copyright 2026 The danf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
#pragma once

#include <vector>

#include "danf/foa.hpp"
#include "danf/room.hpp"

namespace danf {

struct ImageSource {
  std::array<double, 3> position;
  double amplitude;  // product of per-hit wall reflection factors
  int order;
};

// All mirror images of the source with total reflection count <= max_order.
// Per axis, images sit at (1-2q)*s + 2*m*L for integer m and flip q in {0,1};
// that image hits the low wall |m-q| times and the high wall |m| times.
// Reflection factor per hit is sqrt(1 - absorption).
inline std::vector<ImageSource> enumerate_image_sources(
    const RoomSpec& room, const std::array<double, 3>& source, int max_order) {
  if (max_order < 0) throw InvalidInput("enumerate_image_sources: max_order < 0");
  std::array<double, 6> beta{};
  for (int w = 0; w < 6; ++w)
    beta[static_cast<std::size_t>(w)] =
        std::sqrt(1.0 - room.absorption[static_cast<std::size_t>(w)]);

  const int m_span = max_order / 2 + 1;
  std::vector<ImageSource> images;
  for (int qx = 0; qx <= 1; ++qx)
    for (int mx = -m_span; mx <= m_span; ++mx) {
      int ox = std::abs(2 * mx - qx);
      if (ox > max_order) continue;
      for (int qy = 0; qy <= 1; ++qy)
        for (int my = -m_span; my <= m_span; ++my) {
          int oy = std::abs(2 * my - qy);
          if (ox + oy > max_order) continue;
          for (int qz = 0; qz <= 1; ++qz)
            for (int mz = -m_span; mz <= m_span; ++mz) {
              int oz = std::abs(2 * mz - qz);
              int order = ox + oy + oz;
              if (order > max_order) continue;
              ImageSource img;
              img.position = {
                  (1 - 2 * qx) * source[0] + 2.0 * mx * room.dims[0],
                  (1 - 2 * qy) * source[1] + 2.0 * my * room.dims[1],
                  (1 - 2 * qz) * source[2] + 2.0 * mz * room.dims[2]};
              img.order = order;
              img.amplitude =
                  std::pow(beta[kXLo], std::abs(mx - qx)) *
                  std::pow(beta[kXHi], std::abs(mx)) *
                  std::pow(beta[kYLo], std::abs(my - qy)) *
                  std::pow(beta[kYHi], std::abs(my)) *
                  std::pow(beta[kZLo], std::abs(mz - qz)) *
                  std::pow(beta[kZHi], std::abs(mz));
              images.push_back(img);
            }
        }
    }
  return images;
}

template <typename T>
struct RenderResult {
  FoaRir<T> rir;
  int dropped_arrivals = 0;  // arrivals beyond rir_length
};

namespace render_detail {

inline double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

// 4-point Hann-windowed sinc, support (-2, 2].
inline double frac_delay_tap(double u) {
  if (std::abs(u) >= 2.0) return 0.0;
  return sinc(u) * 0.5 * (1.0 + std::cos(kPi * u / 2.0));
}

}  // namespace render_detail

// Ground-truth FOA render: each image source arrives from its geometric
// direction expressed in the listener frame (world rotated by -orientation
// about z), with gain amplitude / max(distance, 0.1 m), placed at
// distance/c via the fractional-delay kernel. All four channels share the
// kernel so interchannel intensity ratios stay exact.
template <typename T>
RenderResult<T> render_foa_rir(const Scene& scene, const RoomSpec& room) {
  room.validate();
  scene.validate(room);

  RenderResult<T> out;
  out.rir.sample_rate = room.sample_rate;
  out.rir.samples = Mat<T>::Zero(kFoaChannels, room.rir_length);

  const double fs = static_cast<double>(room.sample_rate);
  const double cos_t = std::cos(scene.orientation);
  const double sin_t = std::sin(scene.orientation);

  std::vector<ImageSource> images =
      enumerate_image_sources(room, scene.source, room.max_order);
  for (const ImageSource& img : images) {
    double dx = img.position[0] - scene.listener[0];
    double dy = img.position[1] - scene.listener[1];
    double dz = img.position[2] - scene.listener[2];
    double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
    if (dist == 0.0) dist = 1e-9;
    // arrival direction in the listener frame (yaw-only rotation)
    double ux = dx / dist, uy = dy / dist, uz = dz / dist;
    double lxd = cos_t * ux + sin_t * uy;
    double lyd = -sin_t * ux + cos_t * uy;

    double gain = img.amplitude / std::max(dist, 0.1);
    double delay = dist / room.speed_of_sound * fs;
    int i0 = static_cast<int>(std::floor(delay));
    if (i0 - 1 >= room.rir_length) {
      ++out.dropped_arrivals;
      continue;
    }
    const double ch_gain[kFoaChannels] = {gain, gain * lxd, gain * lyd,
                                          gain * uz};
    for (int j = -1; j <= 2; ++j) {
      int t = i0 + j;
      if (t < 0 || t >= room.rir_length) continue;
      double k = render_detail::frac_delay_tap(static_cast<double>(t) - delay);
      for (int c = 0; c < kFoaChannels; ++c)
        out.rir.samples(c, t) += static_cast<T>(ch_gain[c] * k);
    }
  }
  return out;
}

}  // namespace danf
