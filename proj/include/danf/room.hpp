// Copyright 2026 The danf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
#pragma once

#include <array>
#include <fstream>
#include <sstream>
#include <string>

#include "danf/common.hpp"

namespace danf {

// Wall index order: x=0, x=Lx, y=0, y=Ly, z=0, z=Lz.
enum Wall { kXLo = 0, kXHi, kYLo, kYHi, kZLo, kZHi };

struct RoomSpec {
  std::array<double, 3> dims = {4.0, 6.0, 3.0};   // meters
  std::array<double, 6> absorption = {0.3, 0.3, 0.3, 0.3, 0.3, 0.3};
  int max_order = 3;
  int sample_rate = 16000;
  int rir_length = 4096;
  double speed_of_sound = 343.0;
  int bounce_count = 64;  // K
  std::uint64_t seed = 0;

  void validate() const {
    for (double d : dims)
      if (!(d > 0)) throw InvalidRoom("room: dims must be positive");
    for (double a : absorption)
      if (!(a >= 0.0) || !(a < 1.0))
        throw InvalidRoom("room: absorption must be in [0,1)");
    if (max_order < 0) throw InvalidRoom("room: max_order must be >= 0");
    if (sample_rate <= 0) throw InvalidRoom("room: sample_rate must be > 0");
    if (rir_length < 1) throw InvalidRoom("room: rir_length must be >= 1");
    if (!(speed_of_sound > 0))
      throw InvalidRoom("room: speed_of_sound must be > 0");
    if (bounce_count < 1) throw InvalidRoom("room: bounce_count must be >= 1");
    // the farthest image of order max_order must land inside the RIR window
    double span = 0.0;
    for (double d : dims) span = std::max(span, d);
    double diag = std::sqrt(dims[0] * dims[0] + dims[1] * dims[1] +
                            dims[2] * dims[2]);
    double max_dist = diag + max_order * span;
    if (static_cast<double>(rir_length) / sample_rate <=
        max_dist / speed_of_sound)
      throw InvalidRoom("room: rir_length too short for max_order arrivals");
  }
};

struct Scene {
  std::array<double, 3> source = {0, 0, 0};
  std::array<double, 3> listener = {0, 0, 0};
  double orientation = 0.0;  // yaw about z, radians in [0, 2*pi)
  std::uint64_t seed = 0;

  void validate(const RoomSpec& room) const {
    for (int a = 0; a < 3; ++a) {
      if (!(source[static_cast<std::size_t>(a)] > 0) ||
          !(source[static_cast<std::size_t>(a)] < room.dims[static_cast<std::size_t>(a)]))
        throw InvalidInput("scene: source must be strictly inside the room");
      if (!(listener[static_cast<std::size_t>(a)] > 0) ||
          !(listener[static_cast<std::size_t>(a)] < room.dims[static_cast<std::size_t>(a)]))
        throw InvalidInput("scene: listener must be strictly inside the room");
    }
    if (source == listener)
      throw InvalidInput("scene: source and listener must differ");
    if (!(orientation >= 0.0) || !(orientation < 2.0 * kPi))
      throw InvalidInput("scene: orientation must be in [0, 2*pi)");
  }
};

// ---------------------------------------------------------------------------
// Room specification file: UTF-8 "key value..." lines, '#' comments.
// ---------------------------------------------------------------------------

inline constexpr int kRoomSchemaVersion = 1;

inline std::string room_to_text(const RoomSpec& r) {
  std::ostringstream out;
  out.precision(17);
  out << "schema_version " << kRoomSchemaVersion << "\n";
  out << "dims " << r.dims[0] << " " << r.dims[1] << " " << r.dims[2] << "\n";
  out << "absorption";
  for (double a : r.absorption) out << " " << a;
  out << "\n";
  out << "max_order " << r.max_order << "\n";
  out << "sample_rate " << r.sample_rate << "\n";
  out << "rir_length " << r.rir_length << "\n";
  out << "speed_of_sound " << r.speed_of_sound << "\n";
  out << "bounce_count " << r.bounce_count << "\n";
  out << "seed " << r.seed << "\n";
  return out.str();
}

inline RoomSpec room_from_text(const std::string& text) {
  RoomSpec r;
  bool saw_version = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "schema_version") {
      int v = -1;
      ls >> v;
      if (v != kRoomSchemaVersion)
        throw InvalidRoom("room file: unsupported schema_version");
      saw_version = true;
    } else if (key == "dims") {
      ls >> r.dims[0] >> r.dims[1] >> r.dims[2];
    } else if (key == "absorption") {
      for (double& a : r.absorption) ls >> a;
    } else if (key == "max_order") {
      ls >> r.max_order;
    } else if (key == "sample_rate") {
      ls >> r.sample_rate;
    } else if (key == "rir_length") {
      ls >> r.rir_length;
    } else if (key == "speed_of_sound") {
      ls >> r.speed_of_sound;
    } else if (key == "bounce_count") {
      ls >> r.bounce_count;
    } else if (key == "seed") {
      ls >> r.seed;
    } else {
      throw InvalidRoom("room file: unknown key '" + key + "'");
    }
    if (ls.fail()) throw InvalidRoom("room file: malformed value for " + key);
  }
  if (!saw_version) throw InvalidRoom("room file: missing schema_version");
  r.validate();
  return r;
}

inline RoomSpec load_room(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidRoom("cannot open room spec: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return room_from_text(ss.str());
}

inline void save_room(const std::string& path, const RoomSpec& r) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw InvalidRoom("cannot write room spec: " + path);
  f << room_to_text(r);
}

// ---------------------------------------------------------------------------
// Coordinate normalization and bounce points.
// ---------------------------------------------------------------------------

// Maps room coordinates into [-1,1]^3: origin at the midpoint of the min/max
// extent per axis, scaled by half the extent.
template <typename T>
Mat<T> normalize_coordinates(const Mat<T>& points, const RoomSpec& room) {
  if (points.rows() != 3)
    throw InvalidInput("normalize_coordinates: expected 3 x n points");
  Mat<T> out(3, points.cols());
  for (int a = 0; a < 3; ++a) {
    double lo = 0.0, hi = room.dims[static_cast<std::size_t>(a)];
    if (!(hi > lo)) throw InvalidRoom("normalize_coordinates: degenerate axis");
    T mid = static_cast<T>(0.5 * (lo + hi));
    T scale = static_cast<T>(2.0 / (hi - lo));
    for (Eigen::Index j = 0; j < points.cols(); ++j)
      out(a, j) = (points(a, j) - mid) * scale;
  }
  return out;
}

template <typename T>
Vec<T> normalize_point(const std::array<double, 3>& p, const RoomSpec& room) {
  Mat<T> m(3, 1);
  for (int a = 0; a < 3; ++a)
    m(a, 0) = static_cast<T>(p[static_cast<std::size_t>(a)]);
  return normalize_coordinates(m, room).col(0);
}

// K points drawn uniformly by area over the six box faces.
template <typename T>
Mat<T> sample_bounce_points(const RoomSpec& room, int k, std::uint64_t seed) {
  if (k < 1) throw InvalidInput("sample_bounce_points: K must be >= 1");
  const double lx = room.dims[0], ly = room.dims[1], lz = room.dims[2];
  const std::array<double, 6> areas = {ly * lz, ly * lz, lx * lz,
                                       lx * lz, lx * ly, lx * ly};
  double total = 0.0;
  for (double a : areas) total += a;

  Rng rng(seed);
  Mat<T> pts(3, k);
  for (int i = 0; i < k; ++i) {
    double pick = rng.uniform() * total;
    int face = 0;
    double acc = 0.0;
    for (; face < 5; ++face) {
      acc += areas[static_cast<std::size_t>(face)];
      if (pick < acc) break;
    }
    double u = rng.uniform(), v = rng.uniform();
    std::array<double, 3> p{};
    switch (face) {
      case kXLo: p = {0.0, u * ly, v * lz}; break;
      case kXHi: p = {lx, u * ly, v * lz}; break;
      case kYLo: p = {u * lx, 0.0, v * lz}; break;
      case kYHi: p = {u * lx, ly, v * lz}; break;
      case kZLo: p = {u * lx, v * ly, 0.0}; break;
      default:   p = {u * lx, v * ly, lz}; break;
    }
    for (int a = 0; a < 3; ++a)
      pts(a, i) = static_cast<T>(p[static_cast<std::size_t>(a)]);
  }
  return pts;
}

}  // namespace danf
