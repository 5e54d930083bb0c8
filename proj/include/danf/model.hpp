// Copyright 2026 The danf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
#pragma once

#include <array>
#include <string>
#include <vector>

#include "danf/nn.hpp"
#include "danf/room.hpp"

namespace danf {

// Architecture sizes live in the checkpoint descriptor, not in code.
struct ArchDescriptor {
  int bounce_count = 64;   // K
  int feature_dim = 128;   // D
  int enc_levels = 10;     // L, shared by all sinusoidal encoders
  int orient_dim = 32;     // width of the learned orientation embedding
  int rir_length = 4096;   // T
  int channels = 4;
  std::vector<int> bounce_hidden = {128};
  std::vector<int> time_hidden = {128};
  std::vector<int> decoder_hidden = {512, 512};

  int point_enc_dim() const { return 2 * enc_levels * 3; }
  int time_enc_dim() const { return 2 * enc_levels; }
  // raw (cos, sin) pair plus its sinusoidal encoding; the raw pair is
  // required because sin(2^l pi v) and cos(2^l pi v) coincide at v = +-1,
  // which would alias opposite headings
  int orient_enc_dim() const { return 2 + 2 * enc_levels * 2; }
  int decoder_in_dim() const { return 3 * bounce_count + orient_dim; }

  bool operator==(const ArchDescriptor&) const = default;

  void validate() const {
    if (bounce_count < 1 || feature_dim < 1 || enc_levels < 1 ||
        orient_dim < 1 || rir_length < 1)
      throw InvalidConfig("descriptor: all sizes must be positive");
    if (channels != 4)
      throw InvalidConfig("descriptor: only 4-channel output is supported");
  }
};

// Trainable state: three spatial nets (bounce points, listener-relative,
// source-relative), the time-basis net, the orientation embedding net, and
// the per-sample impulse decoder.
template <typename T>
struct DanfParams {
  ArchDescriptor arch;
  Mlp<T> bounce_net;        // 2-layer, point encoding -> D
  Mlp<T> listener_rel_net;  // single layer, point encoding -> D
  Mlp<T> source_rel_net;    // single layer, point encoding -> D
  Mlp<T> time_net;          // time encoding -> D
  Mlp<T> orient_net;        // single layer, (cos,sin) encoding -> orient_dim
  Mlp<T> decoder;           // (3K + orient_dim) -> channels, per time sample

  void validate() const {
    arch.validate();
    bounce_net.validate();
    listener_rel_net.validate();
    source_rel_net.validate();
    time_net.validate();
    orient_net.validate();
    decoder.validate();
    if (bounce_net.out_dim() != arch.feature_dim ||
        time_net.out_dim() != arch.feature_dim)
      throw ShapeError("danf: feature dim mismatch");
    if (decoder.in_dim() != arch.decoder_in_dim() ||
        decoder.out_dim() != arch.channels)
      throw ShapeError("danf: decoder dims mismatch");
  }
};

template <typename T>
DanfParams<T> init_danf(const ArchDescriptor& arch, std::uint64_t seed) {
  arch.validate();
  Rng rng(seed);
  DanfParams<T> p;
  p.arch = arch;
  p.bounce_net = make_mlp<T>(arch.point_enc_dim(), arch.bounce_hidden,
                             arch.feature_dim, rng);
  p.listener_rel_net =
      make_mlp<T>(arch.point_enc_dim(), {}, arch.feature_dim, rng);
  p.source_rel_net =
      make_mlp<T>(arch.point_enc_dim(), {}, arch.feature_dim, rng);
  p.time_net =
      make_mlp<T>(arch.time_enc_dim(), arch.time_hidden, arch.feature_dim, rng);
  p.orient_net = make_mlp<T>(arch.orient_enc_dim(), {}, arch.orient_dim, rng);
  p.decoder = make_mlp<T>(arch.decoder_in_dim(), arch.decoder_hidden,
                          arch.channels, rng);
  return p;
}

// Declared parameter order for checkpoints, gradients, and Adam.
template <typename T>
std::vector<TensorRef<T>> danf_param_refs(DanfParams<T>& p) {
  std::vector<TensorRef<T>> refs;
  for (Mlp<T>* net : {&p.bounce_net, &p.listener_rel_net, &p.source_rel_net,
                      &p.time_net, &p.orient_net, &p.decoder}) {
    auto sub = mlp_param_refs(*net);
    refs.insert(refs.end(), sub.begin(), sub.end());
  }
  return refs;
}

template <typename T>
std::size_t param_count(DanfParams<T>& p) {
  return param_count(danf_param_refs(p));
}

// ---------------------------------------------------------------------------
// LoRA adapter set over the nets downstream of the spatio-temporal feature.
// Decoder weights are always adapted; the time-basis net is included by
// default and the orientation net only on request.
// ---------------------------------------------------------------------------

template <typename T>
struct DanfAdapters {
  MlpAdapters<T> decoder;
  MlpAdapters<T> time_net;
  MlpAdapters<T> orient_net;
  int rank = 0;

  bool empty() const {
    return decoder.layers.empty() && time_net.layers.empty() &&
           orient_net.layers.empty();
  }
};

struct LoraTargets {
  bool decoder = true;
  bool time_net = true;
  bool orient_net = false;
};

template <typename T>
DanfAdapters<T> make_danf_adapters(const DanfParams<T>& p, int rank,
                                   std::uint64_t seed,
                                   const LoraTargets& targets = {}) {
  Rng rng(seed);
  DanfAdapters<T> out;
  out.rank = rank;
  auto attach = [&](const Mlp<T>& net, MlpAdapters<T>& slot,
                    const std::string& name) {
    slot.layers.resize(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      const auto& l = net.layers[i];
      slot.layers[i] = make_lora_adapter<T>(
          l.out_dim(), l.in_dim(), rank, name + "." + std::to_string(i), rng);
    }
  };
  if (targets.decoder) attach(p.decoder, out.decoder, "decoder");
  if (targets.time_net) attach(p.time_net, out.time_net, "time");
  if (targets.orient_net) attach(p.orient_net, out.orient_net, "orient");
  return out;
}

template <typename T>
std::vector<TensorRef<T>> adapter_param_refs(DanfAdapters<T>& a) {
  std::vector<TensorRef<T>> refs;
  for (MlpAdapters<T>* set : {&a.decoder, &a.time_net, &a.orient_net}) {
    for (auto& opt : set->layers) {
      if (!opt) continue;
      refs.push_back({opt->B.data(), static_cast<std::size_t>(opt->B.size())});
      refs.push_back({opt->A.data(), static_cast<std::size_t>(opt->A.size())});
    }
  }
  return refs;
}

template <typename T>
std::size_t param_count(DanfAdapters<T>& a) {
  return param_count(adapter_param_refs(a));
}

// ---------------------------------------------------------------------------
// Forward pieces. All coordinate inputs are already normalized to the room
// (see normalize_coordinates).
// ---------------------------------------------------------------------------

template <typename T>
struct SpatialCache {
  MlpCache<T> bounce, listener_rel, source_rel;
};

// Spatial feature C~ (3K x D): K bounce-point rows, then K listener-relative
// rows, then K source-relative rows.
template <typename T>
Mat<T> spatial_embedding(const DanfParams<T>& p, const Mat<T>& bounce_norm,
                         const Vec<T>& source_norm, const Vec<T>& listener_norm,
                         std::type_identity_t<SpatialCache<T>*> cache =
                             nullptr) {
  const int k = p.arch.bounce_count;
  if (bounce_norm.rows() != 3 || bounce_norm.cols() != k)
    throw ShapeError("spatial_embedding: bounce points must be 3 x K");
  if (source_norm.size() != 3 || listener_norm.size() != 3)
    throw ShapeError("spatial_embedding: positions must be 3-vectors");

  Mat<T> enc_bounce =
      sinusoidal_encode_cols<T>(bounce_norm, p.arch.enc_levels);
  Mat<T> rel_l = bounce_norm.colwise() - listener_norm;
  Mat<T> rel_s = bounce_norm.colwise() - source_norm;
  Mat<T> enc_l = sinusoidal_encode_cols<T>(rel_l, p.arch.enc_levels);
  Mat<T> enc_s = sinusoidal_encode_cols<T>(rel_s, p.arch.enc_levels);

  Mat<T> f_bounce = mlp_forward(p.bounce_net, enc_bounce,
                                cache ? &cache->bounce : nullptr);  // D x K
  Mat<T> f_l = mlp_forward(p.listener_rel_net, enc_l,
                           cache ? &cache->listener_rel : nullptr);
  Mat<T> f_s = mlp_forward(p.source_rel_net, enc_s,
                           cache ? &cache->source_rel : nullptr);

  Mat<T> c_tilde(3 * k, p.arch.feature_dim);
  c_tilde.topRows(k) = f_bounce.transpose();
  c_tilde.middleRows(k, k) = f_l.transpose();
  c_tilde.bottomRows(k) = f_s.transpose();
  return c_tilde;
}

template <typename T>
T normalized_time(int t, int total) {
  int denom = std::max(total - 1, 1);
  return static_cast<T>(2.0 * t / denom - 1.0);
}

// Time basis Q (D x |t_indices|); independent of scene geometry.
template <typename T>
Mat<T> time_basis(const DanfParams<T>& p, const std::vector<int>& t_indices,
                  int total, std::type_identity_t<MlpCache<T>*> cache = nullptr,
                  std::type_identity_t<const MlpAdapters<T>*> adapters =
                      nullptr) {
  Mat<T> times(1, static_cast<Eigen::Index>(t_indices.size()));
  for (std::size_t i = 0; i < t_indices.size(); ++i) {
    int t = t_indices[i];
    if (t < 0 || t >= total)
      throw InvalidInput("time_basis: time index out of range");
    times(0, static_cast<Eigen::Index>(i)) = normalized_time<T>(t, total);
  }
  Mat<T> enc = sinusoidal_encode_cols<T>(times, p.arch.enc_levels);
  return mlp_forward(p.time_net, enc, cache, adapters);
}

// Learned 2*pi-periodic orientation embedding: theta enters as (cos, sin).
template <typename T>
Vec<T> orientation_embed(const DanfParams<T>& p, double theta,
                         std::type_identity_t<MlpCache<T>*> cache = nullptr,
                         std::type_identity_t<const MlpAdapters<T>*> adapters =
                             nullptr) {
  Vec<T> cs(2);
  cs[0] = static_cast<T>(std::cos(theta));
  cs[1] = static_cast<T>(std::sin(theta));
  Vec<T> enc = sinusoidal_encode<T>(cs, p.arch.enc_levels);
  Mat<T> in(2 + enc.size(), 1);
  in.col(0).head(2) = cs;
  in.col(0).tail(enc.size()) = enc;
  return mlp_forward(p.orient_net, in, cache, adapters).col(0);
}

template <typename T>
struct DanfCache {
  SpatialCache<T> spatial;
  MlpCache<T> time, orient, decoder;
  Mat<T> c_tilde;  // 3K x D
  Mat<T> q;        // D x n
  Vec<T> orient_vec;
  Eigen::Index n_queried = 0;
};

// h_hat = decoder(E[:,t] ++ orientation embedding) per queried time sample,
// with E = C~ * Q. Returns channels x |t_indices|.
template <typename T>
Mat<T> danf_forward(const DanfParams<T>& p, const Vec<T>& source_norm,
                    const Vec<T>& listener_norm, double theta,
                    const Mat<T>& bounce_norm,
                    const std::vector<int>& t_indices,
                    std::type_identity_t<DanfCache<T>*> cache = nullptr,
                    std::type_identity_t<const DanfAdapters<T>*> adapters =
                        nullptr) {
  const int k3 = 3 * p.arch.bounce_count;
  Mat<T> c_tilde = spatial_embedding(p, bounce_norm, source_norm, listener_norm,
                                     cache ? &cache->spatial : nullptr);
  Mat<T> q = time_basis(p, t_indices, p.arch.rir_length,
                        cache ? &cache->time : nullptr,
                        adapters ? &adapters->time_net : nullptr);
  Vec<T> o = orientation_embed(p, theta, cache ? &cache->orient : nullptr,
                               adapters ? &adapters->orient_net : nullptr);

  Mat<T> dec_in(k3 + p.arch.orient_dim,
                static_cast<Eigen::Index>(t_indices.size()));
  dec_in.topRows(k3).noalias() = c_tilde * q;  // E = C~ Q
  dec_in.bottomRows(p.arch.orient_dim).colwise() = o;

  if (cache) {
    cache->c_tilde = std::move(c_tilde);
    cache->q = std::move(q);
    cache->orient_vec = o;
    cache->n_queried = static_cast<Eigen::Index>(t_indices.size());
  }
  return mlp_forward(p.decoder, dec_in, cache ? &cache->decoder : nullptr,
                     adapters ? &adapters->decoder : nullptr);
}

template <typename T>
std::vector<int> all_time_indices(int total) {
  std::vector<int> idx(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) idx[static_cast<std::size_t>(i)] = i;
  return idx;
}

// ---------------------------------------------------------------------------
// Backward: fills a gradient mirror of DanfParams (and of the adapters when
// training in LoRA mode).
// ---------------------------------------------------------------------------

template <typename T>
struct DanfGrads {
  MlpGrads<T> bounce, listener_rel, source_rel, time, orient, decoder;
};

// Gradient refs in the same declared order as danf_param_refs.
template <typename T>
std::vector<TensorRef<T>> danf_grad_refs(DanfGrads<T>& g) {
  std::vector<TensorRef<T>> refs;
  for (MlpGrads<T>* grads :
       {&g.bounce, &g.listener_rel, &g.source_rel, &g.time, &g.orient,
        &g.decoder}) {
    for (std::size_t i = 0; i < grads->d_weights.size(); ++i) {
      refs.push_back({grads->d_weights[i].data(),
                      static_cast<std::size_t>(grads->d_weights[i].size())});
      refs.push_back({grads->d_bias[i].data(),
                      static_cast<std::size_t>(grads->d_bias[i].size())});
    }
  }
  return refs;
}

template <typename T>
void danf_backward(const DanfParams<T>& p, const DanfCache<T>& cache,
                   const Mat<T>& d_out, DanfGrads<T>& grads,
                   std::type_identity_t<const DanfAdapters<T>*> adapters =
                       nullptr) {
  const int k = p.arch.bounce_count;
  if (d_out.rows() != p.arch.channels || d_out.cols() != cache.n_queried)
    throw ContractViolation("danf_backward: gradient shape mismatch");

  Mat<T> d_dec_in =
      mlp_backward(p.decoder, cache.decoder, d_out, grads.decoder,
                   adapters ? &adapters->decoder : nullptr);

  Mat<T> d_e = d_dec_in.topRows(3 * k);
  Vec<T> d_orient = d_dec_in.bottomRows(p.arch.orient_dim).rowwise().sum();

  // E = C~ Q
  Mat<T> d_c_tilde = d_e * cache.q.transpose();        // 3K x D
  Mat<T> d_q = cache.c_tilde.transpose() * d_e;        // D x n

  mlp_backward(p.time_net, cache.time, d_q, grads.time,
               adapters ? &adapters->time_net : nullptr);
  mlp_backward(p.orient_net, cache.orient, Mat<T>(d_orient), grads.orient,
               adapters ? &adapters->orient_net : nullptr);
  mlp_backward(p.bounce_net, cache.spatial.bounce,
               Mat<T>(d_c_tilde.topRows(k).transpose()), grads.bounce);
  mlp_backward(p.listener_rel_net, cache.spatial.listener_rel,
               Mat<T>(d_c_tilde.middleRows(k, k).transpose()),
               grads.listener_rel);
  mlp_backward(p.source_rel_net, cache.spatial.source_rel,
               Mat<T>(d_c_tilde.bottomRows(k).transpose()), grads.source_rel);
}

// Adapter-only gradients for LoRA training; ordered like adapter_param_refs.
template <typename T>
struct AdapterGrads {
  std::vector<Mat<T>> d_b, d_a;
};

template <typename T>
std::vector<TensorRef<T>> adapter_grad_refs(AdapterGrads<T>& g) {
  std::vector<TensorRef<T>> refs;
  for (std::size_t i = 0; i < g.d_b.size(); ++i) {
    refs.push_back({g.d_b[i].data(), static_cast<std::size_t>(g.d_b[i].size())});
    refs.push_back({g.d_a[i].data(), static_cast<std::size_t>(g.d_a[i].size())});
  }
  return refs;
}

// Extracts factor gradients from the effective-weight gradients of the nets
// the adapter set covers, in adapter_param_refs order.
template <typename T>
AdapterGrads<T> collect_adapter_grads(const DanfAdapters<T>& a,
                                      const DanfGrads<T>& full) {
  AdapterGrads<T> out;
  auto pull = [&](const MlpAdapters<T>& set, const MlpGrads<T>& grads) {
    for (std::size_t i = 0; i < set.layers.size(); ++i) {
      if (!set.layers[i]) continue;
      Mat<T> d_b, d_a;
      lora_backward(*set.layers[i], grads.d_weights[i], d_b, d_a);
      out.d_b.push_back(std::move(d_b));
      out.d_a.push_back(std::move(d_a));
    }
  };
  pull(a.decoder, full.decoder);
  pull(a.time_net, full.time);
  pull(a.orient_net, full.orient);
  return out;
}

}  // namespace danf
