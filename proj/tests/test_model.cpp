// Copyright 2026 The danf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
#include <catch2/catch_amalgamated.hpp>

#include "danf/model.hpp"

using namespace danf;

namespace {

ArchDescriptor tiny_arch() {
  ArchDescriptor a;
  a.bounce_count = 4;
  a.feature_dim = 8;
  a.enc_levels = 3;
  a.orient_dim = 6;
  a.rir_length = 32;
  a.bounce_hidden = {8};
  a.time_hidden = {8};
  a.decoder_hidden = {10, 10};
  return a;
}

ArchDescriptor desk_arch() { return ArchDescriptor{}; }

struct TinyScene {
  Vec<double> s, l;
  double theta;
  Mat<double> bounce;
};

TinyScene tiny_scene(std::uint64_t seed, const ArchDescriptor& arch) {
  Rng rng(seed);
  TinyScene sc;
  sc.s = Vec<double>(3);
  sc.l = Vec<double>(3);
  for (int i = 0; i < 3; ++i) {
    sc.s[i] = rng.uniform(-0.9, 0.9);
    sc.l[i] = rng.uniform(-0.9, 0.9);
  }
  sc.theta = rng.uniform(0.0, 2.0 * kPi);
  sc.bounce = Mat<double>(3, arch.bounce_count);
  for (int i = 0; i < sc.bounce.size(); ++i)
    sc.bounce.data()[i] = rng.uniform(-1.0, 1.0);
  return sc;
}

double projected_forward(const DanfParams<double>& p, const TinyScene& sc,
                         const std::vector<int>& idx, const Mat<double>& proj,
                         const DanfAdapters<double>* adapters = nullptr) {
  Mat<double> y =
      danf_forward(p, sc.s, sc.l, sc.theta, sc.bounce, idx, nullptr, adapters);
  return y.cwiseProduct(proj).sum();
}

}  // namespace

TEST_CASE("spatial embedding") {
  SECTION("output is 3K x D") {
    ArchDescriptor arch = desk_arch();
    DanfParams<double> p = init_danf<double>(arch, 1);
    TinyScene sc = tiny_scene(2, arch);
    Mat<double> c = spatial_embedding(p, sc.bounce, sc.s, sc.l);
    REQUIRE(c.rows() == 3 * arch.bounce_count);
    REQUIRE(c.cols() == arch.feature_dim);
    REQUIRE(c.rows() == 192);
    REQUIRE(c.cols() == 128);
  }

  SECTION("swapping s and l permutes the relative blocks under tied weights") {
    ArchDescriptor arch = tiny_arch();
    DanfParams<double> p = init_danf<double>(arch, 3);
    p.source_rel_net = p.listener_rel_net;  // tie the two relative nets
    TinyScene sc = tiny_scene(4, arch);
    Mat<double> a = spatial_embedding(p, sc.bounce, sc.s, sc.l);
    Mat<double> b = spatial_embedding(p, sc.bounce, sc.l, sc.s);
    int k = arch.bounce_count;
    REQUIRE(a.topRows(k) == b.topRows(k));
    REQUIRE(a.middleRows(k, k) == b.bottomRows(k));
    REQUIRE(a.bottomRows(k) == b.middleRows(k, k));
  }

  SECTION("purity: identical inputs give identical outputs") {
    ArchDescriptor arch = tiny_arch();
    DanfParams<double> p = init_danf<double>(arch, 5);
    TinyScene sc = tiny_scene(6, arch);
    REQUIRE(spatial_embedding(p, sc.bounce, sc.s, sc.l) ==
            spatial_embedding(p, sc.bounce, sc.s, sc.l));
  }
}

TEST_CASE("time basis") {
  ArchDescriptor arch = tiny_arch();
  DanfParams<double> p = init_danf<double>(arch, 7);

  SECTION("repeated index repeats the column; shape is D x n") {
    Mat<double> q = time_basis(p, {5, 5, 9}, arch.rir_length);
    REQUIRE(q.rows() == arch.feature_dim);
    REQUIRE(q.cols() == 3);
    REQUIRE(q.col(0) == q.col(1));
    REQUIRE(q.col(0) != q.col(2));
  }

  SECTION("out-of-range index is rejected") {
    REQUIRE_THROWS_AS(time_basis(p, {32}, arch.rir_length), InvalidInput);
    REQUIRE_THROWS_AS(time_basis(p, {-1}, arch.rir_length), InvalidInput);
  }
}

TEST_CASE("orientation embedding") {
  ArchDescriptor arch = tiny_arch();
  DanfParams<double> p = init_danf<double>(arch, 8);

  SECTION("2*pi periodic by construction") {
    Vec<double> a = orientation_embed(p, 0.7);
    Vec<double> b = orientation_embed(p, 0.7 + 2.0 * kPi);
    REQUIRE((a - b).cwiseAbs().maxCoeff() < 1e-12);
  }

  SECTION("distinct angles embed differently on a seeded init") {
    Vec<double> a = orientation_embed(p, 0.0);
    Vec<double> b = orientation_embed(p, kPi);
    REQUIRE((a - b).cwiseAbs().maxCoeff() > 1e-6);
  }

  SECTION("output width follows the descriptor") {
    REQUIRE(orientation_embed(p, 1.0).size() == arch.orient_dim);
  }
}

TEST_CASE("danf forward") {
  ArchDescriptor arch = tiny_arch();
  DanfParams<double> p = init_danf<double>(arch, 9);
  TinyScene sc = tiny_scene(10, arch);

  SECTION("full query returns channels x T") {
    auto idx = all_time_indices<double>(arch.rir_length);
    Mat<double> y = danf_forward(p, sc.s, sc.l, sc.theta, sc.bounce, idx);
    REQUIRE(y.rows() == 4);
    REQUIRE(y.cols() == arch.rir_length);
    REQUIRE(y.allFinite());
  }

  SECTION("purity") {
    std::vector<int> idx{0, 3, 17};
    Mat<double> a = danf_forward(p, sc.s, sc.l, sc.theta, sc.bounce, idx);
    Mat<double> b = danf_forward(p, sc.s, sc.l, sc.theta, sc.bounce, idx);
    REQUIRE(a == b);
  }

  SECTION("permuting queried indices permutes the output columns") {
    std::vector<int> idx{2, 9, 21, 30};
    std::vector<int> perm{30, 2, 21, 9};
    Mat<double> a = danf_forward(p, sc.s, sc.l, sc.theta, sc.bounce, idx);
    Mat<double> b = danf_forward(p, sc.s, sc.l, sc.theta, sc.bounce, perm);
    REQUIRE(b.col(0) == a.col(3));
    REQUIRE(b.col(1) == a.col(0));
    REQUIRE(b.col(2) == a.col(2));
    REQUIRE(b.col(3) == a.col(1));
  }

  SECTION("E equals C~ times Q inside the cache") {
    std::vector<int> idx{1, 4, 7, 11};
    DanfCache<double> cache;
    danf_forward(p, sc.s, sc.l, sc.theta, sc.bounce, idx, &cache);
    Mat<double> e = cache.decoder.input.topRows(3 * arch.bounce_count);
    Mat<double> want = cache.c_tilde * cache.q;
    REQUIRE((e - want).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("orientation rows of the decoder input are constant per scene") {
    std::vector<int> idx{0, 8, 16};
    DanfCache<double> cache;
    danf_forward(p, sc.s, sc.l, sc.theta, sc.bounce, idx, &cache);
    Mat<double> bottom = cache.decoder.input.bottomRows(arch.orient_dim);
    for (int j = 1; j < bottom.cols(); ++j)
      REQUIRE(bottom.col(j) == bottom.col(0));
  }
}

TEST_CASE("danf full-graph gradients match finite differences") {
  ArchDescriptor arch = tiny_arch();
  const double step = 1e-5;
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    DanfParams<double> p = init_danf<double>(arch, seed);
    TinyScene sc = tiny_scene(seed + 50, arch);
    std::vector<int> idx{0, 5, 13, 22, 31};
    Rng rng(seed + 100);
    Mat<double> proj(4, static_cast<Eigen::Index>(idx.size()));
    for (int i = 0; i < proj.size(); ++i) proj.data()[i] = rng.normal();

    DanfCache<double> cache;
    danf_forward(p, sc.s, sc.l, sc.theta, sc.bounce, idx, &cache);
    DanfGrads<double> grads;
    danf_backward(p, cache, proj, grads);

    auto p_refs = danf_param_refs(p);
    auto g_refs = danf_grad_refs(grads);
    REQUIRE(param_count(p_refs) == param_count(g_refs));

    double num = 0.0, den = 0.0;
    for (std::size_t r = 0; r < p_refs.size(); ++r) {
      for (std::size_t k = 0; k < p_refs[r].size; ++k) {
        double save = p_refs[r].data[k];
        p_refs[r].data[k] = save + step;
        double up = projected_forward(p, sc, idx, proj);
        p_refs[r].data[k] = save - step;
        double down = projected_forward(p, sc, idx, proj);
        p_refs[r].data[k] = save;
        double fd = (up - down) / (2 * step);
        double an = g_refs[r].data[k];
        num += (fd - an) * (fd - an);
        den += fd * fd + an * an;
      }
    }
    REQUIRE(std::sqrt(num / std::max(den, 1e-300)) < 1e-4);
  }
}

TEST_CASE("lora-mode gradients match finite differences") {
  ArchDescriptor arch = tiny_arch();
  DanfParams<double> p = init_danf<double>(arch, 21);
  DanfAdapters<double> adapters = make_danf_adapters(p, 2, 22);
  // move B off zero so both factors carry signal
  for (auto& opt : adapters.decoder.layers)
    if (opt) opt->B.setRandom();
  for (auto& opt : adapters.time_net.layers)
    if (opt) opt->B.setRandom();

  TinyScene sc = tiny_scene(23, arch);
  std::vector<int> idx{3, 8, 19};
  Rng rng(24);
  Mat<double> proj(4, 3);
  for (int i = 0; i < proj.size(); ++i) proj.data()[i] = rng.normal();

  DanfCache<double> cache;
  danf_forward(p, sc.s, sc.l, sc.theta, sc.bounce, idx, &cache, &adapters);
  DanfGrads<double> grads;
  danf_backward(p, cache, proj, grads, &adapters);
  AdapterGrads<double> a_grads = collect_adapter_grads(adapters, grads);

  auto p_refs = adapter_param_refs(adapters);
  auto g_refs = adapter_grad_refs(a_grads);
  REQUIRE(param_count(p_refs) == param_count(g_refs));

  const double step = 1e-5;
  double num = 0.0, den = 0.0;
  for (std::size_t r = 0; r < p_refs.size(); ++r) {
    for (std::size_t k = 0; k < p_refs[r].size; ++k) {
      double save = p_refs[r].data[k];
      p_refs[r].data[k] = save + step;
      double up = projected_forward(p, sc, idx, proj, &adapters);
      p_refs[r].data[k] = save - step;
      double down = projected_forward(p, sc, idx, proj, &adapters);
      p_refs[r].data[k] = save;
      double fd = (up - down) / (2 * step);
      double an = g_refs[r].data[k];
      num += (fd - an) * (fd - an);
      den += fd * fd + an * an;
    }
  }
  REQUIRE(std::sqrt(num / std::max(den, 1e-300)) < 1e-4);
}

TEST_CASE("parameter counts") {
  SECTION("desk-scale defaults keep LoRA(3) under 2 percent of the model") {
    DanfParams<float> p = init_danf<float>(desk_arch(), 1);
    std::size_t full = param_count(p);
    DanfAdapters<float> r3 = make_danf_adapters(p, 3, 2);
    DanfAdapters<float> r1 = make_danf_adapters(p, 1, 2);
    REQUIRE(static_cast<double>(param_count(r3)) <
            0.02 * static_cast<double>(full));
    REQUIRE(param_count(r1) < param_count(r3));
  }

  SECTION("paper-like widths land at order 1e6 parameters") {
    ArchDescriptor big;
    big.bounce_count = 256;
    big.feature_dim = 256;
    big.decoder_hidden = {512, 512, 512};
    big.time_hidden = {256};
    big.bounce_hidden = {256};
    DanfParams<float> p = init_danf<float>(big, 1);
    std::size_t n = param_count(p);
    REQUIRE(n >= 1000000);
    REQUIRE(n < 10000000);
  }

  SECTION("zero-start: adapted forward equals base forward at init") {
    ArchDescriptor arch = tiny_arch();
    DanfParams<double> p = init_danf<double>(arch, 31);
    DanfAdapters<double> a = make_danf_adapters(p, 3, 32);
    TinyScene sc = tiny_scene(33, arch);
    auto idx = all_time_indices<double>(arch.rir_length);
    Mat<double> base = danf_forward(p, sc.s, sc.l, sc.theta, sc.bounce, idx);
    Mat<double> adapted =
        danf_forward(p, sc.s, sc.l, sc.theta, sc.bounce, idx, nullptr, &a);
    REQUIRE(base == adapted);
  }
}
