// Copyright 2026 The danf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
#include <catch2/catch_amalgamated.hpp>

#include "danf/foa.hpp"

using namespace danf;

namespace {

// Independent naive windowed DFT of one analysis frame.
Eigen::VectorXcd naive_frame_dft(const Eigen::VectorXd& x, int frame,
                                 const StftParams& p) {
  Eigen::VectorXd w = hann_window<double>(p.window_size);
  int f_bins = stft_bin_count(p);
  Eigen::VectorXcd out(f_bins);
  for (int f = 0; f < f_bins; ++f) {
    std::complex<double> acc(0, 0);
    for (int n = 0; n < p.window_size; ++n) {
      int t = frame * p.hop + n;
      double v = (t < x.size()) ? x[t] : 0.0;
      double ang = -2.0 * kPi * f * n / p.window_size;
      acc += w[n] * v * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[f] = acc;
  }
  return out;
}

FoaRir<double> plane_wave_impulse(double az, double el, double gain = 1.0,
                                  int t0 = 100, int len = 1024) {
  FoaRir<double> h;
  h.sample_rate = 16000;
  h.samples = Mat<double>::Zero(4, len);
  Eigen::Vector4d g = encode_plane_wave_foa<double>(az, el, gain);
  for (int c = 0; c < 4; ++c) h.samples(c, t0) = g[c];
  return h;
}

}  // namespace

TEST_CASE("stft basics") {
  StftParams p;

  SECTION("all-zeros signal gives an all-zeros grid") {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(1024);
    auto grid = stft<double>(x, p);
    REQUIRE(grid.cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("frame layout matches the contract") {
    Eigen::VectorXd x = Eigen::VectorXd::Ones(4096);
    auto grid = stft<double>(x, p);
    REQUIRE(grid.cols() == p.window_size / 2 + 1);
    REQUIRE(grid.rows() == (4096 - p.window_size) / p.hop + 1);
  }

  SECTION("empty signal is rejected") {
    Eigen::VectorXd x(0);
    REQUIRE_THROWS_AS(stft<double>(x, p), InvalidInput);
  }

  SECTION("unit impulse at t=0: frame 0 magnitude equals the Hann edge") {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(512);
    x[0] = 1.0;
    auto grid = stft<double>(x, p);
    double w0 = hann_window<double>(p.window_size)[0];
    for (int f = 0; f < grid.cols(); ++f)
      REQUIRE(std::abs(grid(0, f)) == Catch::Approx(w0).margin(1e-15));
  }

  SECTION("matches the naive per-frame DFT oracle on random input") {
    Rng rng(7);
    Eigen::VectorXd x(777);  // non-aligned length exercises the tail frame
    for (int i = 0; i < x.size(); ++i) x[i] = rng.normal();
    auto grid = stft<double>(x, p);
    for (int frame : {0, 3, static_cast<int>(grid.rows()) - 1}) {
      Eigen::VectorXcd want = naive_frame_dft(x, frame, p);
      for (int f = 0; f < want.size(); ++f)
        REQUIRE(std::abs(grid(frame, f) - want[f]) < 1e-10);
    }
  }

  SECTION("bin-centered sinusoid stays below the leakage bar") {
    const int bin = 16;
    const int len = 4096;
    Eigen::VectorXd x(len);
    for (int i = 0; i < len; ++i)
      x[i] = std::cos(2.0 * kPi * bin * i / p.window_size);
    auto grid = stft<double>(x, p);
    int mid = static_cast<int>(grid.rows()) / 2;
    double peak = std::abs(grid(mid, bin));
    double bar = peak * std::pow(10.0, -13.0 / 20.0);
    for (int f = 0; f < grid.cols(); ++f) {
      if (std::abs(f - bin) <= 1) continue;
      REQUIRE(std::abs(grid(mid, f)) < bar);
    }
  }

  SECTION("spectral energy tracks time-domain energy") {
    // Hann window, hop = W/4: sum over frames of windowed frame energy is
    // 1.5x the signal energy away from the edges.
    const int len = 65536;
    Rng rng(11);
    Eigen::VectorXd x(len);
    for (int i = 0; i < len; ++i) x[i] = rng.uniform(-1.0, 1.0);
    auto grid = stft<double>(x, p);
    double spectral = 0.0;
    for (int m = 0; m < grid.rows(); ++m) {
      double frame = std::norm(grid(m, 0));
      for (int f = 1; f < grid.cols() - 1; ++f) frame += 2.0 * std::norm(grid(m, f));
      frame += std::norm(grid(m, grid.cols() - 1));
      spectral += frame / p.window_size;
    }
    double expected = 1.5 * x.squaredNorm();
    REQUIRE(spectral == Catch::Approx(expected).epsilon(0.01));
  }
}

TEST_CASE("intensity vector field follows the conjugate product") {
  auto make_grid = [](std::complex<double> w, std::complex<double> x) {
    TfGrid<double> g;
    for (int c = 0; c < 4; ++c)
      g.values[static_cast<std::size_t>(c)] =
          Mat<std::complex<double>>::Zero(2, 3);
    g.values[kW].setConstant(w);
    g.values[kX].setConstant(x);
    g.frame_count = 2;
    g.bin_count = 3;
    return g;
  };

  SECTION("real unit W and X give (1,0,0) everywhere") {
    auto field = intensity_vector_field(make_grid({1, 0}, {1, 0}));
    REQUIRE(field[0].minCoeff() == 1.0);
    REQUIRE(field[0].maxCoeff() == 1.0);
    REQUIRE(field[1].cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(field[2].cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("W=i, X=i gives +1: conj(i)*i = 1") {
    auto field = intensity_vector_field(make_grid({0, 1}, {0, 1}));
    REQUIRE(field[0](0, 0) == Catch::Approx(1.0));
  }

  SECTION("W=1, X=i has zero x-component") {
    auto field = intensity_vector_field(make_grid({1, 0}, {0, 1}));
    REQUIRE(field[0].cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("integrated intensity and DoA") {
  StftParams p;

  SECTION("omnidirectional-only RIR integrates to zero") {
    FoaRir<double> h;
    h.samples = Mat<double>::Zero(4, 512);
    h.samples(kW, 10) = 1.0;
    auto iv = integrated_intensity(h, p);
    REQUIRE(iv.x == 0.0);
    REQUIRE(iv.y == 0.0);
    REQUIRE(iv.z == 0.0);
    REQUIRE_THROWS_AS(doa_from_intensity(iv), UndefinedDirection);
  }

  SECTION("axis-aligned plane waves point along the axes") {
    auto iv_x = integrated_intensity(plane_wave_impulse(0, 0), p);
    REQUIRE(iv_x.x > 0);
    REQUIRE(std::abs(iv_x.y) < 1e-9 * iv_x.x);
    REQUIRE(std::abs(iv_x.z) < 1e-9 * iv_x.x);

    auto iv_y = integrated_intensity(plane_wave_impulse(90, 0), p);
    REQUIRE(iv_y.y > 0);
    REQUIRE(std::abs(iv_y.x) < 1e-9 * iv_y.y);
  }

  SECTION("doa_from_intensity trivial directions") {
    auto d1 = doa_from_intensity(IntensityVec<double>{1, 0, 0});
    REQUIRE(d1.azimuth_deg == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(d1.elevation_deg == Catch::Approx(0.0).margin(1e-12));

    auto d2 = doa_from_intensity(IntensityVec<double>{0, 0, 1});
    REQUIRE(d2.elevation_deg == Catch::Approx(90.0));
    REQUIRE(d2.azimuth_deg == Catch::Approx(0.0).margin(1e-12));

    auto d3 = doa_from_intensity(IntensityVec<double>{-1, -1, 0});
    REQUIRE(d3.azimuth_deg == Catch::Approx(225.0));
  }
}

TEST_CASE("encode_plane_wave_foa trivial gains") {
  auto g1 = encode_plane_wave_foa<double>(0, 0, 1);
  REQUIRE(g1[kW] == 1.0);
  REQUIRE(g1[kX] == Catch::Approx(1.0));
  REQUIRE(g1[kY] == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(g1[kZ] == Catch::Approx(0.0).margin(1e-15));

  auto g2 = encode_plane_wave_foa<double>(0, 90, 1);
  REQUIRE(g2[kX] == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(g2[kZ] == Catch::Approx(1.0));

  auto g3 = encode_plane_wave_foa<double>(180, 0, 2);
  REQUIRE(g3[kW] == 2.0);
  REQUIRE(g3[kX] == Catch::Approx(-2.0));
}

TEST_CASE("direction round-trip over the az/el grid") {
  StftParams p;
  for (int az = 0; az < 360; az += 10) {
    for (int el = -75; el <= 75; el += 15) {
      FoaRir<double> h = plane_wave_impulse(az, el);
      auto d = doa_from_intensity(integrated_intensity(h, p));
      REQUIRE(circular_azimuth_error<double>(d.azimuth_deg, az) < 0.5);
      REQUIRE(std::abs(d.elevation_deg - el) < 0.5);
    }
  }
}

TEST_CASE("intensity is bilinear in channel scale") {
  StftParams p;
  Rng rng(3);
  FoaRir<double> h;
  h.samples.resize(4, 700);
  for (int c = 0; c < 4; ++c)
    for (int t = 0; t < 700; ++t) h.samples(c, t) = rng.normal();
  auto base = integrated_intensity(h, p);
  for (double alpha : {0.5, 2.0, 3.7}) {
    FoaRir<double> scaled = h;
    scaled.samples *= alpha;
    auto got = integrated_intensity(scaled, p);
    REQUIRE(got.x == Catch::Approx(alpha * alpha * base.x).epsilon(1e-9));
    REQUIRE(got.y == Catch::Approx(alpha * alpha * base.y).epsilon(1e-9));
    REQUIRE(got.z == Catch::Approx(alpha * alpha * base.z).epsilon(1e-9));
  }
}

TEST_CASE("yaw rotation of X,Y channels rotates the intensity vector") {
  StftParams p;
  Rng rng(5);
  FoaRir<double> h;
  h.samples.resize(4, 640);
  for (int c = 0; c < 4; ++c)
    for (int t = 0; t < 640; ++t) h.samples(c, t) = rng.normal();
  auto base = integrated_intensity(h, p);
  for (double phi : {0.3, 1.1, 2.9}) {
    FoaRir<double> rot = h;
    rot.samples.row(kX) =
        std::cos(phi) * h.samples.row(kX) - std::sin(phi) * h.samples.row(kY);
    rot.samples.row(kY) =
        std::sin(phi) * h.samples.row(kX) + std::cos(phi) * h.samples.row(kY);
    auto got = integrated_intensity(rot, p);
    double want_x = std::cos(phi) * base.x - std::sin(phi) * base.y;
    double want_y = std::sin(phi) * base.x + std::cos(phi) * base.y;
    double scale = std::abs(want_x) + std::abs(want_y);
    REQUIRE(std::abs(got.x - want_x) < 1e-6 * scale);
    REQUIRE(std::abs(got.y - want_y) < 1e-6 * scale);
    REQUIRE(got.z == Catch::Approx(base.z).epsilon(1e-9));
  }
}
