// Copyright 2026 The danf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
#pragma once

#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "danf/common.hpp"

namespace danf {

// ---------------------------------------------------------------------------
// Sinusoidal coordinate encoding.
// ---------------------------------------------------------------------------

// Concatenation over levels l = 0..L-1 and input dims of
// (sin(2^l pi v_i), cos(2^l pi v_i)); output length 2*L*d.
// Inputs are expected roughly unit-scaled (coordinates in [-1,1]).
template <typename T>
Vec<T> sinusoidal_encode(const Vec<T>& v, int levels) {
  const Eigen::Index d = v.size();
  Vec<T> out(2 * levels * d);
  Eigen::Index k = 0;
  for (int l = 0; l < levels; ++l) {
    double freq = std::ldexp(kPi, l);  // 2^l * pi
    for (Eigen::Index i = 0; i < d; ++i) {
      double a = freq * static_cast<double>(v[i]);
      out[k++] = static_cast<T>(std::sin(a));
      out[k++] = static_cast<T>(std::cos(a));
    }
  }
  return out;
}

// Column-wise batched variant: (d x n) -> (2*L*d x n).
template <typename T>
Mat<T> sinusoidal_encode_cols(const Mat<T>& v, int levels) {
  Mat<T> out(2 * levels * v.rows(), v.cols());
  for (Eigen::Index j = 0; j < v.cols(); ++j)
    out.col(j) = sinusoidal_encode<T>(Vec<T>(v.col(j)), levels);
  return out;
}

// ---------------------------------------------------------------------------
// Dense layers and MLPs. Weights are out x in; batches are column-major
// (one column per sample).
// ---------------------------------------------------------------------------

enum class Activation { kRectifier, kIdentity };

template <typename T>
struct DenseLayer {
  Mat<T> weights;  // out x in
  Vec<T> bias;     // out
  Activation activation = Activation::kIdentity;

  int in_dim() const { return static_cast<int>(weights.cols()); }
  int out_dim() const { return static_cast<int>(weights.rows()); }
};

template <typename T>
struct Mlp {
  std::vector<DenseLayer<T>> layers;

  int in_dim() const { return layers.front().in_dim(); }
  int out_dim() const { return layers.back().out_dim(); }

  void validate() const {
    if (layers.empty()) throw ShapeError("mlp: no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      if (l.bias.size() != l.weights.rows())
        throw ShapeError("mlp: bias/weight row mismatch");
      if (i > 0 && l.in_dim() != layers[i - 1].out_dim())
        throw ShapeError("mlp: consecutive layer dims incompatible");
      if (!l.weights.allFinite() || !l.bias.allFinite())
        throw ShapeError("mlp: non-finite parameters");
    }
  }
};

// He-style fan-in uniform init; hidden layers rectify, the last is linear.
template <typename T>
Mlp<T> make_mlp(int in_dim, const std::vector<int>& hidden, int out_dim,
                Rng& rng) {
  Mlp<T> net;
  std::vector<int> dims;
  dims.push_back(in_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out_dim);
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    DenseLayer<T> layer;
    int fan_in = dims[i];
    double limit = std::sqrt(6.0 / fan_in);
    layer.weights.resize(dims[i + 1], dims[i]);
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
        layer.weights(r, c) = static_cast<T>(rng.uniform(-limit, limit));
    layer.bias = Vec<T>::Zero(dims[i + 1]);
    layer.activation = (i + 2 < dims.size()) ? Activation::kRectifier
                                             : Activation::kIdentity;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

// ---------------------------------------------------------------------------
// LoRA adapters: W' = W + (1/r) * B * A with B (out x r) zero-initialized
// and A (r x in) small random, so adaptation starts at the frozen model.
// ---------------------------------------------------------------------------

template <typename T>
struct LoraAdapter {
  Mat<T> B;  // out x r
  Mat<T> A;  // r x in
  int rank = 1;
  std::string target;

  void validate() const {
    if (rank < 1) throw InvalidConfig("lora: rank must be >= 1");
    if (B.cols() != rank || A.rows() != rank)
      throw ShapeError("lora: factor rank mismatch");
    if (rank > std::min(B.rows(), A.cols()))
      throw InvalidConfig("lora: rank exceeds min weight dimension");
  }
};

template <typename T>
LoraAdapter<T> make_lora_adapter(int out_dim, int in_dim, int rank,
                                 const std::string& target, Rng& rng) {
  if (rank < 1 || rank > std::min(out_dim, in_dim))
    throw InvalidConfig("lora: rank must be in [1, min(out,in)] for " + target);
  LoraAdapter<T> a;
  a.rank = rank;
  a.target = target;
  a.B = Mat<T>::Zero(out_dim, rank);
  a.A.resize(rank, in_dim);
  for (Eigen::Index r = 0; r < a.A.rows(); ++r)
    for (Eigen::Index c = 0; c < a.A.cols(); ++c)
      a.A(r, c) = static_cast<T>(0.01 * rng.normal());
  return a;
}

template <typename T>
Mat<T> lora_effective_weight(const Mat<T>& w, const LoraAdapter<T>& adapter) {
  adapter.validate();
  if (adapter.B.rows() != w.rows() || adapter.A.cols() != w.cols())
    throw ShapeError("lora: adapter does not match weight shape");
  return w + (T(1) / static_cast<T>(adapter.rank)) * (adapter.B * adapter.A);
}

// Maps the effective-weight gradient onto the factor gradients.
template <typename T>
void lora_backward(const LoraAdapter<T>& adapter, const Mat<T>& d_w_eff,
                   Mat<T>& d_b, Mat<T>& d_a) {
  T inv_r = T(1) / static_cast<T>(adapter.rank);
  d_b = inv_r * (d_w_eff * adapter.A.transpose());
  d_a = inv_r * (adapter.B.transpose() * d_w_eff);
}

// Optional per-layer adapters for one MLP; empty vector means none.
template <typename T>
struct MlpAdapters {
  std::vector<std::optional<LoraAdapter<T>>> layers;

  bool has(std::size_t i) const {
    return i < layers.size() && layers[i].has_value();
  }
};

// ---------------------------------------------------------------------------
// Forward / backward.
// ---------------------------------------------------------------------------

template <typename T>
struct MlpCache {
  Mat<T> input;                // in x n
  std::vector<Mat<T>> pre;     // per-layer pre-activations
  std::vector<Mat<T>> post;    // per-layer activations
};

template <typename T>
Mat<T> mlp_forward(const Mlp<T>& net, const Mat<T>& x,
                   std::type_identity_t<MlpCache<T>*> cache = nullptr,
                   std::type_identity_t<const MlpAdapters<T>*> adapters =
                       nullptr) {
  if (x.rows() != net.in_dim())
    throw ShapeError("mlp_forward: input dim mismatch");
  if (cache) {
    cache->input = x;
    cache->pre.clear();
    cache->post.clear();
  }
  Mat<T> cur = x;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const DenseLayer<T>& l = net.layers[i];
    Mat<T> z;
    if (adapters && adapters->has(i)) {
      z = lora_effective_weight(l.weights, *adapters->layers[i]) * cur;
    } else {
      z.noalias() = l.weights * cur;
    }
    z.colwise() += l.bias;
    if (cache) cache->pre.push_back(z);
    if (l.activation == Activation::kRectifier) z = z.cwiseMax(T(0));
    if (cache) cache->post.push_back(z);
    cur = std::move(z);
  }
  return cur;
}

template <typename T>
struct MlpGrads {
  std::vector<Mat<T>> d_weights;  // d(effective weight) per layer
  std::vector<Vec<T>> d_bias;
};

// Reverse-mode pass; returns the input gradient. The cache must come from a
// forward over the same input and network shape.
template <typename T>
Mat<T> mlp_backward(const Mlp<T>& net, const MlpCache<T>& cache,
                    const Mat<T>& d_out, MlpGrads<T>& grads,
                    std::type_identity_t<const MlpAdapters<T>*> adapters =
                        nullptr) {
  const std::size_t n_layers = net.layers.size();
  if (cache.pre.size() != n_layers || cache.post.size() != n_layers)
    throw ContractViolation("mlp_backward: stale or missing forward cache");
  if (d_out.rows() != net.out_dim() || d_out.cols() != cache.input.cols())
    throw ContractViolation("mlp_backward: gradient shape does not match cache");

  grads.d_weights.assign(n_layers, Mat<T>());
  grads.d_bias.assign(n_layers, Vec<T>());

  Mat<T> delta = d_out;
  for (std::size_t i = n_layers; i-- > 0;) {
    const DenseLayer<T>& l = net.layers[i];
    if (l.activation == Activation::kRectifier)
      delta = delta.cwiseProduct(
          (cache.pre[i].array() > T(0)).template cast<T>().matrix());
    const Mat<T>& below = (i == 0) ? cache.input : cache.post[i - 1];
    if (below.rows() != l.in_dim() || below.cols() != delta.cols())
      throw ContractViolation("mlp_backward: cache/layer shape mismatch");
    grads.d_weights[i].noalias() = delta * below.transpose();
    grads.d_bias[i] = delta.rowwise().sum();
    if (i > 0) {
      if (adapters && adapters->has(i)) {
        delta = lora_effective_weight(l.weights, *adapters->layers[i])
                    .transpose() *
                delta;
      } else {
        Mat<T> next;
        next.noalias() = l.weights.transpose() * delta;
        delta = std::move(next);
      }
    }
  }
  if (adapters && adapters->has(0)) {
    return lora_effective_weight(net.layers[0].weights, *adapters->layers[0])
               .transpose() *
           delta;
  }
  return net.layers[0].weights.transpose() * delta;
}

// ---------------------------------------------------------------------------
// Flat parameter views and Adam.
// ---------------------------------------------------------------------------

template <typename T>
struct TensorRef {
  T* data = nullptr;
  std::size_t size = 0;
};

template <typename T>
std::size_t param_count(const std::vector<TensorRef<T>>& refs) {
  std::size_t n = 0;
  for (const auto& r : refs) n += r.size;
  return n;
}

template <typename T>
std::vector<TensorRef<T>> mlp_param_refs(Mlp<T>& net) {
  std::vector<TensorRef<T>> refs;
  for (auto& l : net.layers) {
    refs.push_back({l.weights.data(), static_cast<std::size_t>(l.weights.size())});
    refs.push_back({l.bias.data(), static_cast<std::size_t>(l.bias.size())});
  }
  return refs;
}

template <typename T>
struct AdamState {
  std::vector<Vec<T>> m, v;  // first/second moments, mirroring param shapes
  long step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam over flat parameter/gradient views.
template <typename T>
void adam_step(const std::vector<TensorRef<T>>& params,
               const std::vector<TensorRef<T>>& grads, AdamState<T>& st) {
  if (params.size() != grads.size())
    throw ShapeError("adam_step: parameter/gradient list mismatch");
  if (st.m.empty()) {
    st.m.resize(params.size());
    st.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      st.m[i] = Vec<T>::Zero(static_cast<Eigen::Index>(params[i].size));
      st.v[i] = Vec<T>::Zero(static_cast<Eigen::Index>(params[i].size));
    }
  }
  if (st.m.size() != params.size())
    throw ShapeError("adam_step: state/parameter list mismatch");

  st.step += 1;
  const T b1 = static_cast<T>(st.beta1), b2 = static_cast<T>(st.beta2);
  const T corr1 = static_cast<T>(1.0 - std::pow(st.beta1, st.step));
  const T corr2 = static_cast<T>(1.0 - std::pow(st.beta2, st.step));
  const T lr = static_cast<T>(st.learning_rate);
  const T eps = static_cast<T>(st.epsilon);

  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size != grads[i].size ||
        static_cast<std::size_t>(st.m[i].size()) != params[i].size)
      throw ShapeError("adam_step: tensor shape mismatch");
    T* p = params[i].data;
    const T* g = grads[i].data;
    T* m = st.m[i].data();
    T* v = st.v[i].data();
    for (std::size_t k = 0; k < params[i].size; ++k) {
      m[k] = b1 * m[k] + (T(1) - b1) * g[k];
      v[k] = b2 * v[k] + (T(1) - b2) * g[k] * g[k];
      T m_hat = m[k] / corr1;
      T v_hat = v[k] / corr2;
      p[k] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

}  // namespace danf
