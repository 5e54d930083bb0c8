// Copyright 2026 The danf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
#include <catch2/catch_amalgamated.hpp>

#include "danf/nn.hpp"

using namespace danf;

namespace {

// Independent per-element re-implementation of the affine+activation chain.
Mat<double> naive_mlp(const Mlp<double>& net, const Mat<double>& x) {
  Mat<double> cur = x;
  for (const auto& l : net.layers) {
    Mat<double> next(l.out_dim(), cur.cols());
    for (int j = 0; j < cur.cols(); ++j)
      for (int r = 0; r < l.out_dim(); ++r) {
        double acc = l.bias[r];
        for (int c = 0; c < l.in_dim(); ++c) acc += l.weights(r, c) * cur(c, j);
        if (l.activation == Activation::kRectifier && acc < 0) acc = 0;
        next(r, j) = acc;
      }
    cur = next;
  }
  return cur;
}

double projected_loss(const Mlp<double>& net, const Mat<double>& x,
                      const Mat<double>& proj) {
  Mat<double> y = mlp_forward(net, x, nullptr);
  return y.cwiseProduct(proj).sum();
}

// Central finite differences over every parameter of a small net.
double max_param_grad_rel_error(Mlp<double>& net, const Mat<double>& x,
                                const Mat<double>& proj) {
  MlpCache<double> cache;
  mlp_forward(net, x, &cache);
  MlpGrads<double> grads;
  mlp_backward(net, cache, proj, grads);

  const double step = 1e-5;
  double num = 0.0, den = 0.0;
  auto refs = mlp_param_refs(net);
  std::vector<TensorRef<double>> grad_refs;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    grad_refs.push_back({grads.d_weights[i].data(),
                         static_cast<std::size_t>(grads.d_weights[i].size())});
    grad_refs.push_back({grads.d_bias[i].data(),
                         static_cast<std::size_t>(grads.d_bias[i].size())});
  }
  for (std::size_t r = 0; r < refs.size(); ++r) {
    for (std::size_t k = 0; k < refs[r].size; ++k) {
      double save = refs[r].data[k];
      refs[r].data[k] = save + step;
      double up = projected_loss(net, x, proj);
      refs[r].data[k] = save - step;
      double down = projected_loss(net, x, proj);
      refs[r].data[k] = save;
      double fd = (up - down) / (2 * step);
      double an = grad_refs[r].data[k];
      num += (fd - an) * (fd - an);
      den += fd * fd + an * an;
    }
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace

TEST_CASE("sinusoidal encoding") {
  SECTION("zero input gives alternating (0,1)") {
    Vec<double> v(1);
    v[0] = 0.0;
    Vec<double> e = sinusoidal_encode(v, 2);
    REQUIRE(e.size() == 4);
    REQUIRE(e[0] == 0.0);
    REQUIRE(e[1] == 1.0);
    REQUIRE(e[2] == 0.0);
    REQUIRE(e[3] == 1.0);
  }

  SECTION("v=1 at level 0 is (sin pi, cos pi)") {
    Vec<double> v(1);
    v[0] = 1.0;
    Vec<double> e = sinusoidal_encode(v, 1);
    REQUIRE(e[0] == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(e[1] == Catch::Approx(-1.0));
  }

  SECTION("output length is 2*L*d") {
    Vec<double> v = Vec<double>::Zero(3);
    REQUIRE(sinusoidal_encode(v, 10).size() == 60);
  }
}

TEST_CASE("mlp forward") {
  SECTION("identity single layer reproduces the input") {
    Mlp<double> net;
    DenseLayer<double> l;
    l.weights = Mat<double>::Identity(4, 4);
    l.bias = Vec<double>::Zero(4);
    net.layers.push_back(l);
    Mat<double> x = Mat<double>::Random(4, 5);
    REQUIRE(mlp_forward(net, x, nullptr) == x);
  }

  SECTION("zero weights pass the activated bias through") {
    Mlp<double> net;
    DenseLayer<double> l;
    l.weights = Mat<double>::Zero(3, 2);
    l.bias = Vec<double>(3);
    l.bias << -1.0, 0.5, 2.0;
    l.activation = Activation::kRectifier;
    net.layers.push_back(l);
    Mat<double> x = Mat<double>::Random(2, 1);
    Mat<double> y = mlp_forward(net, x, nullptr);
    REQUIRE(y(0, 0) == 0.0);
    REQUIRE(y(1, 0) == 0.5);
    REQUIRE(y(2, 0) == 2.0);
  }

  SECTION("matches the naive oracle on a random 2-layer net") {
    Rng rng(17);
    Mlp<double> net = make_mlp<double>(6, {9}, 4, rng);
    Mat<double> x(6, 7);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    Mat<double> got = mlp_forward(net, x, nullptr);
    Mat<double> want = naive_mlp(net, x);
    REQUIRE((got - want).cwiseAbs().maxCoeff() < 1e-12);
  }

  SECTION("input dim mismatch is a shape error") {
    Rng rng(1);
    Mlp<double> net = make_mlp<double>(6, {}, 4, rng);
    Mat<double> x = Mat<double>::Zero(5, 2);
    REQUIRE_THROWS_AS(mlp_forward(net, x, nullptr), ShapeError);
  }
}

TEST_CASE("mlp backward") {
  SECTION("linear layer, loss = sum of outputs") {
    Mlp<double> net;
    DenseLayer<double> l;
    l.weights = Mat<double>::Random(3, 4);
    l.bias = Vec<double>::Random(3);
    net.layers.push_back(l);
    Mat<double> x = Mat<double>::Random(4, 1);
    MlpCache<double> cache;
    mlp_forward(net, x, &cache);
    MlpGrads<double> grads;
    Mat<double> ones = Mat<double>::Ones(3, 1);
    mlp_backward(net, cache, ones, grads);
    Mat<double> want = ones * x.transpose();
    REQUIRE((grads.d_weights[0] - want).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE((grads.d_bias[0] - Vec<double>::Ones(3)).cwiseAbs().maxCoeff() <
            1e-14);
  }

  SECTION("matches central finite differences on random nets") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng rng(seed);
      Mlp<double> net = make_mlp<double>(5, {8, 7}, 3, rng);
      Mat<double> x(5, 4);
      for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
      Mat<double> proj(3, 4);
      for (int i = 0; i < proj.size(); ++i) proj.data()[i] = rng.normal();
      REQUIRE(max_param_grad_rel_error(net, x, proj) < 1e-4);
    }
  }

  SECTION("rectifier blocks gradient at negative pre-activation") {
    Mlp<double> net;
    DenseLayer<double> l;
    l.weights = Mat<double>::Identity(2, 2);
    l.bias = Vec<double>(2);
    l.bias << -10.0, 10.0;  // unit 0 clamped, unit 1 active
    l.activation = Activation::kRectifier;
    net.layers.push_back(l);
    Mat<double> x = Mat<double>::Ones(2, 1);
    MlpCache<double> cache;
    mlp_forward(net, x, &cache);
    MlpGrads<double> grads;
    Mat<double> ones = Mat<double>::Ones(2, 1);
    Mat<double> d_in = mlp_backward(net, cache, ones, grads);
    REQUIRE(grads.d_weights[0].row(0).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(grads.d_weights[0](1, 1) == 1.0);
    REQUIRE(d_in(0, 0) == 0.0);
    REQUIRE(d_in(1, 0) == 1.0);
  }

  SECTION("a stale cache is a contract violation") {
    Rng rng(4);
    Mlp<double> net = make_mlp<double>(3, {4}, 2, rng);
    MlpCache<double> cache;
    Mat<double> x = Mat<double>::Random(3, 5);
    mlp_forward(net, x, &cache);
    MlpGrads<double> grads;
    Mat<double> wrong = Mat<double>::Ones(2, 6);
    REQUIRE_THROWS_AS(mlp_backward(net, cache, wrong, grads),
                      ContractViolation);
    MlpCache<double> empty;
    Mat<double> right = Mat<double>::Ones(2, 5);
    REQUIRE_THROWS_AS(mlp_backward(net, empty, right, grads),
                      ContractViolation);
  }
}

TEST_CASE("adam") {
  auto make_param = [](std::vector<double>& storage) {
    return TensorRef<double>{storage.data(), storage.size()};
  };

  SECTION("zero gradient leaves parameters unchanged") {
    std::vector<double> p{1.0, -2.0, 3.0};
    std::vector<double> g{0.0, 0.0, 0.0};
    AdamState<double> st;
    adam_step<double>({make_param(p)}, {make_param(g)}, st);
    REQUIRE(p == std::vector<double>{1.0, -2.0, 3.0});
    REQUIRE(st.step == 1);
  }

  SECTION("first step moves by about lr against the gradient sign") {
    std::vector<double> p{0.0, 0.0};
    std::vector<double> g{3.0, -0.25};
    AdamState<double> st;
    st.learning_rate = 1e-3;
    adam_step<double>({make_param(p)}, {make_param(g)}, st);
    REQUIRE(p[0] == Catch::Approx(-1e-3).epsilon(1e-4));
    REQUIRE(p[1] == Catch::Approx(1e-3).epsilon(1e-4));
  }

  SECTION("two identical runs are bitwise identical") {
    auto run = [&] {
      Rng rng(99);
      std::vector<double> p(32), g(32);
      for (auto& v : p) v = rng.normal();
      AdamState<double> st;
      for (int i = 0; i < 50; ++i) {
        for (std::size_t k = 0; k < g.size(); ++k)
          g[k] = std::sin(0.1 * i + static_cast<double>(k)) * p[k];
        adam_step<double>({make_param(p)}, {make_param(g)}, st);
      }
      return p;
    };
    REQUIRE(run() == run());
  }

  SECTION("shape mismatch is rejected") {
    std::vector<double> p{1.0, 2.0};
    std::vector<double> g{1.0};
    AdamState<double> st;
    REQUIRE_THROWS_AS(
        adam_step<double>({make_param(p)}, {make_param(g)}, st), ShapeError);
  }
}

TEST_CASE("lora adapters") {
  Rng rng(12);

  SECTION("zero B keeps the weight untouched") {
    Mat<double> w = Mat<double>::Random(6, 5);
    LoraAdapter<double> a = make_lora_adapter<double>(6, 5, 3, "t", rng);
    REQUIRE(lora_effective_weight(w, a) == w);
  }

  SECTION("rank-1 outer product lands where expected") {
    Mat<double> w = Mat<double>::Zero(4, 4);
    LoraAdapter<double> a;
    a.rank = 1;
    a.B = Mat<double>::Zero(4, 1);
    a.A = Mat<double>::Zero(1, 4);
    a.B(0, 0) = 1.0;
    a.A(0, 0) = 1.0;
    Mat<double> w2 = lora_effective_weight(w, a);
    REQUIRE(w2(0, 0) == 1.0);
    REQUIRE(w2.sum() == 1.0);
  }

  SECTION("update rank never exceeds r") {
    for (int r : {1, 2, 3}) {
      LoraAdapter<double> a = make_lora_adapter<double>(8, 9, r, "t", rng);
      a.B = Mat<double>::Random(8, r);
      a.A = Mat<double>::Random(r, 9);
      Mat<double> w = Mat<double>::Random(8, 9);
      Mat<double> delta = lora_effective_weight(w, a) - w;
      Eigen::JacobiSVD<Mat<double>> svd(delta);
      int rank = 0;
      for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > 1e-10) ++rank;
      REQUIRE(rank <= r);
    }
  }

  SECTION("rank above min dimension is rejected") {
    REQUIRE_THROWS_AS(make_lora_adapter<double>(4, 9, 5, "t", rng),
                      InvalidConfig);
  }

  SECTION("factor gradients match the chain rule") {
    LoraAdapter<double> a = make_lora_adapter<double>(5, 6, 2, "t", rng);
    a.B = Mat<double>::Random(5, 2);
    Mat<double> d_eff = Mat<double>::Random(5, 6);
    Mat<double> d_b, d_a;
    lora_backward(a, d_eff, d_b, d_a);
    REQUIRE(d_b.isApprox(0.5 * d_eff * a.A.transpose()));
    REQUIRE(d_a.isApprox(0.5 * a.B.transpose() * d_eff));
  }
}

TEST_CASE("param_count on a dense layer") {
  Rng rng(3);
  Mlp<double> net = make_mlp<double>(7, {}, 5, rng);
  auto refs = mlp_param_refs(net);
  REQUIRE(param_count(refs) == 7 * 5 + 5);
}
