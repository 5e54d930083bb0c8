// Copyright 2026 The danf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <queue>

#include "danf/dataset.hpp"
#include "danf/image_source.hpp"

using namespace danf;

namespace {

struct OracleImage {
  std::array<double, 3> pos;
  double amplitude;
  int order;
};

// Independent oracle: breadth-first mirroring of the source across the six
// wall planes, deduplicated by position at the minimal reflection count.
std::vector<OracleImage> mirror_oracle(const RoomSpec& room,
                                       std::array<double, 3> src,
                                       int max_order) {
  auto key = [](const std::array<double, 3>& p) {
    return std::array<long long, 3>{
        std::llround(p[0] * 1e6), std::llround(p[1] * 1e6),
        std::llround(p[2] * 1e6)};
  };
  std::map<std::array<long long, 3>, OracleImage> seen;
  std::queue<OracleImage> frontier;
  frontier.push({src, 1.0, 0});
  seen[key(src)] = {src, 1.0, 0};
  while (!frontier.empty()) {
    OracleImage cur = frontier.front();
    frontier.pop();
    if (cur.order == max_order) continue;
    for (int wall = 0; wall < 6; ++wall) {
      OracleImage next = cur;
      int axis = wall / 2;
      if (wall % 2 == 0)
        next.pos[static_cast<std::size_t>(axis)] =
            -cur.pos[static_cast<std::size_t>(axis)];
      else
        next.pos[static_cast<std::size_t>(axis)] =
            2.0 * room.dims[static_cast<std::size_t>(axis)] -
            cur.pos[static_cast<std::size_t>(axis)];
      next.amplitude =
          cur.amplitude *
          std::sqrt(1.0 - room.absorption[static_cast<std::size_t>(wall)]);
      next.order = cur.order + 1;
      auto k = key(next.pos);
      if (seen.count(k)) continue;
      seen[k] = next;
      frontier.push(next);
    }
  }
  std::vector<OracleImage> out;
  for (auto& [k, v] : seen) out.push_back(v);
  return out;
}

RoomSpec anechoic_room() {
  RoomSpec room;
  room.dims = {6.0, 6.0, 3.0};
  room.max_order = 0;
  return room;
}

Scene front_scene(double distance, double theta) {
  Scene sc;
  sc.listener = {2.0, 3.0, 1.5};
  sc.source = {2.0 + distance, 3.0, 1.5};
  sc.orientation = theta;
  return sc;
}

}  // namespace

TEST_CASE("image source enumeration") {
  RoomSpec room;
  room.dims = {4.0, 6.0, 3.0};
  room.absorption = {0.1, 0.2, 0.3, 0.25, 0.15, 0.35};
  std::array<double, 3> src{1.0, 2.5, 1.2};

  SECTION("max_order 0 is just the source") {
    auto imgs = enumerate_image_sources(room, src, 0);
    REQUIRE(imgs.size() == 1);
    REQUIRE(imgs[0].order == 0);
    REQUIRE(imgs[0].amplitude == 1.0);
    REQUIRE(imgs[0].position == src);
  }

  SECTION("max_order 1 gives the source plus one image per wall") {
    auto imgs = enumerate_image_sources(room, src, 1);
    REQUIRE(imgs.size() == 7);
  }

  SECTION("matches the mirror oracle up to order 2, centered cubic room") {
    RoomSpec cube;
    cube.dims = {4.0, 4.0, 4.0};
    cube.absorption = {0.3, 0.2, 0.4, 0.1, 0.5, 0.25};
    cube.rir_length = 8192;
    std::array<double, 3> center{2.0, 2.0, 2.0};
    for (int order : {1, 2}) {
      auto got = enumerate_image_sources(cube, center, order);
      auto want = mirror_oracle(cube, center, order);
      REQUIRE(got.size() == want.size());
      auto key = [](const std::array<double, 3>& p) {
        return std::array<long long, 3>{std::llround(p[0] * 1e6),
                                        std::llround(p[1] * 1e6),
                                        std::llround(p[2] * 1e6)};
      };
      std::map<std::array<long long, 3>, OracleImage> oracle;
      for (auto& o : want) oracle[key(o.pos)] = o;
      for (auto& g : got) {
        auto it = oracle.find(key(g.position));
        REQUIRE(it != oracle.end());
        REQUIRE(g.order == it->second.order);
        REQUIRE(g.amplitude ==
                Catch::Approx(it->second.amplitude).epsilon(1e-12));
      }
    }
  }

  SECTION("matches the mirror oracle for an off-center source, order 3") {
    auto got = enumerate_image_sources(room, src, 3);
    auto want = mirror_oracle(room, src, 3);
    REQUIRE(got.size() == want.size());
  }
}

TEST_CASE("anechoic single-path renders recover geometry") {
  RoomSpec room = anechoic_room();
  StftParams stft;

  SECTION("source 1 m ahead, zero yaw") {
    auto r = render_foa_rir<double>(front_scene(1.0, 0.0), room);
    REQUIRE(r.dropped_arrivals == 0);
    auto d = doa_from_intensity(integrated_intensity(r.rir, stft));
    REQUIRE(circular_azimuth_error<double>(d.azimuth_deg, 0.0) < 1.0);
    REQUIRE(std::abs(d.elevation_deg) < 1.0);
  }

  SECTION("quarter-turn listener sees the source on the right") {
    auto r = render_foa_rir<double>(front_scene(1.0, kPi / 2.0), room);
    auto d = doa_from_intensity(integrated_intensity(r.rir, stft));
    REQUIRE(circular_azimuth_error<double>(d.azimuth_deg, 270.0) < 1.0);
  }

  SECTION("doubling distance halves the peak W amplitude") {
    // distances chosen so both delays land on integer samples and the
    // fractional-delay kernel peaks identically
    double d = room.speed_of_sound * 48.0 / room.sample_rate;  // 1.029 m
    auto near = render_foa_rir<double>(front_scene(d, 0.0), room);
    auto far = render_foa_rir<double>(front_scene(2.0 * d, 0.0), room);
    double p_near = near.rir.samples.row(kW).cwiseAbs().maxCoeff();
    double p_far = far.rir.samples.row(kW).cwiseAbs().maxCoeff();
    REQUIRE(p_far == Catch::Approx(0.5 * p_near).epsilon(0.02));
  }

  SECTION("direct-path delay lands at distance/c within the kernel spread") {
    auto r = render_foa_rir<double>(front_scene(1.7, 0.0), room);
    int first = -1;
    for (int t = 0; t < r.rir.length(); ++t)
      if (std::abs(r.rir.samples(kW, t)) > 1e-12) {
        first = t;
        break;
      }
    int expected = static_cast<int>(
        std::lround(1.7 / room.speed_of_sound * room.sample_rate));
    REQUIRE(first >= expected - 2);
    REQUIRE(first <= expected + 2);
  }
}

TEST_CASE("reverberant render sanity") {
  RoomSpec room;
  room.dims = {4.0, 6.0, 3.0};
  room.max_order = 3;
  Scene sc;
  sc.source = {1.0, 2.0, 1.5};
  sc.listener = {3.0, 4.5, 1.5};
  sc.orientation = 1.0;

  SECTION("energy is nonincreasing in absorption") {
    double prev = std::numeric_limits<double>::infinity();
    for (double a : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      room.absorption.fill(a);
      auto r = render_foa_rir<double>(sc, room);
      double energy = r.rir.samples.squaredNorm();
      REQUIRE(energy <= prev + 1e-12);
      REQUIRE(r.rir.samples.allFinite());
      REQUIRE(energy > 0.0);
      prev = energy;
    }
  }

  SECTION("a too-short RIR window is rejected up front") {
    RoomSpec tight = room;
    tight.rir_length = 200;
    REQUIRE_THROWS_AS(tight.validate(), InvalidRoom);
  }
}

TEST_CASE("bounce point sampling") {
  RoomSpec room;
  room.dims = {4.0, 6.0, 3.0};

  SECTION("every point lies on a face") {
    auto pts = sample_bounce_points<double>(room, 500, 42);
    for (int i = 0; i < pts.cols(); ++i) {
      bool on_face = false;
      for (int a = 0; a < 3; ++a)
        if (pts(a, i) == 0.0 ||
            pts(a, i) == room.dims[static_cast<std::size_t>(a)])
          on_face = true;
      REQUIRE(on_face);
    }
  }

  SECTION("per-face counts follow face areas") {
    const int k = 10000;
    auto pts = sample_bounce_points<double>(room, k, 7);
    std::array<int, 6> counts{};
    for (int i = 0; i < k; ++i) {
      if (pts(0, i) == 0.0) counts[kXLo]++;
      else if (pts(0, i) == room.dims[0]) counts[kXHi]++;
      else if (pts(1, i) == 0.0) counts[kYLo]++;
      else if (pts(1, i) == room.dims[1]) counts[kYHi]++;
      else if (pts(2, i) == 0.0) counts[kZLo]++;
      else counts[kZHi]++;
    }
    std::array<double, 6> areas = {18, 18, 12, 12, 24, 24};
    double total = 108.0;
    for (int f = 0; f < 6; ++f) {
      double p = areas[static_cast<std::size_t>(f)] / total;
      double sigma = std::sqrt(k * p * (1 - p));
      REQUIRE(std::abs(counts[static_cast<std::size_t>(f)] - k * p) <
              3.0 * sigma);
    }
  }

  SECTION("same seed reproduces the matrix, different seed does not") {
    auto a = sample_bounce_points<double>(room, 64, 9);
    auto b = sample_bounce_points<double>(room, 64, 9);
    auto c = sample_bounce_points<double>(room, 64, 10);
    REQUIRE(a == b);
    REQUIRE(a != c);
  }

  SECTION("K must be positive") {
    REQUIRE_THROWS_AS(sample_bounce_points<double>(room, 0, 1), InvalidInput);
  }
}

TEST_CASE("coordinate normalization") {
  RoomSpec room;
  room.dims = {4.0, 6.0, 3.0};
  Mat<double> pts(3, 3);
  pts.col(0) << 0.0, 0.0, 0.0;
  pts.col(1) << 2.0, 3.0, 1.5;
  pts.col(2) << 3.0, 3.0, 1.5;
  auto out = normalize_coordinates(pts, room);
  REQUIRE(out.col(0).isApprox(Eigen::Vector3d(-1, -1, -1)));
  REQUIRE(out.col(1).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(out(0, 2) == Catch::Approx(0.5));
  REQUIRE(out(1, 2) == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(out(2, 2) == Catch::Approx(0.0).margin(1e-15));

  RoomSpec degenerate = room;
  degenerate.dims[1] = 0.0;
  REQUIRE_THROWS_AS(normalize_coordinates(pts, degenerate), InvalidRoom);
}

TEST_CASE("dataset generation") {
  RoomSpec room;
  room.dims = {4.0, 6.0, 3.0};
  room.rir_length = 4096;
  room.max_order = 2;

  DatasetConfig cfg;
  cfg.n_pairs = 60;
  cfg.seed = 123;

  SECTION("split fractions, fixed heights, determinism") {
    auto ds = generate_dataset<float>(room, cfg);
    REQUIRE(ds.scenes.size() == 60);
    REQUIRE(ds.indices_of(Split::kTrain).size() == 48);
    REQUIRE(ds.indices_of(Split::kTest).size() == 12);
    for (const Scene& sc : ds.scenes) {
      REQUIRE(sc.listener[2] == cfg.listener_height);
      REQUIRE(sc.source[2] == cfg.listener_height);
      REQUIRE(sc.source != sc.listener);
    }
    auto again = generate_dataset<float>(room, cfg);
    for (std::size_t i = 0; i < ds.scenes.size(); ++i) {
      REQUIRE(ds.scenes[i].source == again.scenes[i].source);
      REQUIRE(ds.scenes[i].seed == again.scenes[i].seed);
      REQUIRE(ds.splits[i] == again.splits[i]);
      REQUIRE(ds.rirs[i].samples == again.rirs[i].samples);
    }
  }

  SECTION("paper-style 1000-pair run splits 800/200") {
    RoomSpec fast = room;
    fast.max_order = 0;  // keep the render cheap; the split is the point
    DatasetConfig big = cfg;
    big.n_pairs = 1000;
    auto ds = generate_dataset<float>(fast, big);
    REQUIRE(ds.indices_of(Split::kTrain).size() == 800);
    REQUIRE(ds.indices_of(Split::kTest).size() == 200);
  }

  SECTION("grid too small for distinct source/listener") {
    RoomSpec tiny = room;
    tiny.dims = {0.7, 0.7, 3.0};
    tiny.max_order = 0;
    tiny.rir_length = 512;
    DatasetConfig c2 = cfg;
    c2.n_pairs = 4;
    REQUIRE_THROWS_AS(generate_dataset<float>(tiny, c2), InvalidConfig);
  }

  SECTION("listener height must be inside the room") {
    DatasetConfig c2 = cfg;
    c2.listener_height = 3.5;
    REQUIRE_THROWS_AS(generate_dataset<float>(room, c2), InvalidConfig);
  }
}
