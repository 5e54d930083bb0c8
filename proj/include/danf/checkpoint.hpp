// Copyright 2026 The danf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
#pragma once

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "danf/model.hpp"

namespace danf {

// Checkpoint layout: "DANF" magic, u32 format version, architecture
// descriptor, length-prefixed config snapshot, parameter arrays as
// little-endian f32 in declared order, and a trailing FNV-1a 64 content
// hash over everything before it. LoRA adapters live in a separate "DANL"
// file that records the base checkpoint's content hash.

inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace ckpt_detail {

inline void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_f32(std::string& s, float v) {
  static_assert(sizeof(float) == 4);
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  if constexpr (std::endian::native == std::endian::big)
    bits = __builtin_bswap32(bits);
  put_u32(s, bits);
}
inline void put_str(std::string& s, const std::string& v) {
  put_u32(s, static_cast<std::uint32_t>(v.size()));
  s += v;
}

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t pos = 0)
      : bytes_(bytes), pos_(pos) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)]))
           << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t lo = u32(), hi = u32();
    return lo | (hi << 32);
  }
  float f32() {
    std::uint32_t bits = u32();
    if constexpr (std::endian::native == std::endian::big)
      bits = __builtin_bswap32(bits);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string str() {
    std::uint32_t n = u32();
    need(n);
    std::string v = bytes_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size())
      throw CompatibilityError("checkpoint: truncated file");
  }
  const std::string& bytes_;
  std::size_t pos_;
};

inline void put_int_list(std::string& s, const std::vector<int>& v) {
  put_u32(s, static_cast<std::uint32_t>(v.size()));
  for (int x : v) put_u32(s, static_cast<std::uint32_t>(x));
}

inline std::vector<int> get_int_list(Reader& r) {
  std::uint32_t n = r.u32();
  std::vector<int> v(n);
  for (auto& x : v) x = static_cast<int>(r.u32());
  return v;
}

inline void put_descriptor(std::string& s, const ArchDescriptor& a) {
  put_u32(s, static_cast<std::uint32_t>(a.bounce_count));
  put_u32(s, static_cast<std::uint32_t>(a.feature_dim));
  put_u32(s, static_cast<std::uint32_t>(a.enc_levels));
  put_u32(s, static_cast<std::uint32_t>(a.orient_dim));
  put_u32(s, static_cast<std::uint32_t>(a.rir_length));
  put_u32(s, static_cast<std::uint32_t>(a.channels));
  put_int_list(s, a.bounce_hidden);
  put_int_list(s, a.time_hidden);
  put_int_list(s, a.decoder_hidden);
}

inline ArchDescriptor get_descriptor(Reader& r) {
  ArchDescriptor a;
  a.bounce_count = static_cast<int>(r.u32());
  a.feature_dim = static_cast<int>(r.u32());
  a.enc_levels = static_cast<int>(r.u32());
  a.orient_dim = static_cast<int>(r.u32());
  a.rir_length = static_cast<int>(r.u32());
  a.channels = static_cast<int>(r.u32());
  a.bounce_hidden = get_int_list(r);
  a.time_hidden = get_int_list(r);
  a.decoder_hidden = get_int_list(r);
  return a;
}

inline std::string read_all(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_all(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InvalidInput("cannot write: " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw InvalidInput("write failed: " + path);
}

}  // namespace ckpt_detail

template <typename T>
std::uint64_t save_checkpoint(const std::string& path, DanfParams<T>& params,
                              const std::string& config_snapshot = "{}") {
  params.validate();
  std::string s;
  s += "DANF";
  ckpt_detail::put_u32(s, kCheckpointVersion);
  ckpt_detail::put_descriptor(s, params.arch);
  ckpt_detail::put_str(s, config_snapshot);
  auto refs = danf_param_refs(params);
  ckpt_detail::put_u64(s, param_count(refs));
  for (const auto& ref : refs)
    for (std::size_t i = 0; i < ref.size; ++i)
      ckpt_detail::put_f32(s, static_cast<float>(ref.data[i]));
  std::uint64_t hash = fnv1a(s.data(), s.size());
  ckpt_detail::put_u64(s, hash);
  ckpt_detail::write_all(path, s);
  return hash;
}

template <typename T>
struct Checkpoint {
  DanfParams<T> params;
  std::string config_snapshot;
  std::uint64_t content_hash = 0;
};

template <typename T>
Checkpoint<T> load_checkpoint(const std::string& path) {
  std::string bytes = ckpt_detail::read_all(path);
  if (bytes.size() < 16 || bytes.compare(0, 4, "DANF") != 0)
    throw CompatibilityError("checkpoint: bad magic in " + path);
  std::uint64_t stored_hash;
  {
    ckpt_detail::Reader tail(bytes, bytes.size() - 8);
    stored_hash = tail.u64();
  }
  std::uint64_t actual = fnv1a(bytes.data(), bytes.size() - 8);
  if (stored_hash != actual)
    throw CompatibilityError("checkpoint: content hash mismatch in " + path);

  ckpt_detail::Reader r(bytes, 4);
  if (r.u32() != kCheckpointVersion)
    throw CompatibilityError("checkpoint: unsupported format version");
  Checkpoint<T> out;
  ArchDescriptor arch = ckpt_detail::get_descriptor(r);
  out.config_snapshot = r.str();
  out.params = init_danf<T>(arch, 0);
  auto refs = danf_param_refs(out.params);
  std::uint64_t declared = r.u64();
  if (declared != param_count(refs))
    throw CompatibilityError("checkpoint: parameter count mismatch");
  for (auto& ref : refs)
    for (std::size_t i = 0; i < ref.size; ++i)
      ref.data[i] = static_cast<T>(r.f32());
  out.content_hash = stored_hash;
  out.params.validate();
  return out;
}

// ---------------------------------------------------------------------------
// LoRA adapter sidecar.
// ---------------------------------------------------------------------------

template <typename T>
std::uint64_t save_adapters(const std::string& path, DanfAdapters<T>& adapters,
                            std::uint64_t base_hash) {
  std::string s;
  s += "DANL";
  ckpt_detail::put_u32(s, kCheckpointVersion);
  ckpt_detail::put_u64(s, base_hash);
  ckpt_detail::put_u32(s, static_cast<std::uint32_t>(adapters.rank));

  std::vector<LoraAdapter<T>*> list;
  for (MlpAdapters<T>* set :
       {&adapters.decoder, &adapters.time_net, &adapters.orient_net})
    for (auto& opt : set->layers)
      if (opt) list.push_back(&*opt);

  ckpt_detail::put_u32(s, static_cast<std::uint32_t>(list.size()));
  for (LoraAdapter<T>* a : list) {
    ckpt_detail::put_str(s, a->target);
    ckpt_detail::put_u32(s, static_cast<std::uint32_t>(a->B.rows()));
    ckpt_detail::put_u32(s, static_cast<std::uint32_t>(a->A.cols()));
    ckpt_detail::put_u32(s, static_cast<std::uint32_t>(a->rank));
    for (Eigen::Index i = 0; i < a->B.size(); ++i)
      ckpt_detail::put_f32(s, static_cast<float>(a->B.data()[i]));
    for (Eigen::Index i = 0; i < a->A.size(); ++i)
      ckpt_detail::put_f32(s, static_cast<float>(a->A.data()[i]));
  }
  std::uint64_t hash = fnv1a(s.data(), s.size());
  ckpt_detail::put_u64(s, hash);
  ckpt_detail::write_all(path, s);
  return hash;
}

// Loads adapters and binds them onto the nets of `params`; the stored base
// hash must match the loaded checkpoint's content hash.
template <typename T>
DanfAdapters<T> load_adapters(const std::string& path,
                              const DanfParams<T>& params,
                              std::uint64_t base_hash) {
  std::string bytes = ckpt_detail::read_all(path);
  if (bytes.size() < 16 || bytes.compare(0, 4, "DANL") != 0)
    throw CompatibilityError("adapters: bad magic in " + path);
  std::uint64_t stored_hash;
  {
    ckpt_detail::Reader tail(bytes, bytes.size() - 8);
    stored_hash = tail.u64();
  }
  if (stored_hash != fnv1a(bytes.data(), bytes.size() - 8))
    throw CompatibilityError("adapters: content hash mismatch in " + path);

  ckpt_detail::Reader r(bytes, 4);
  if (r.u32() != kCheckpointVersion)
    throw CompatibilityError("adapters: unsupported format version");
  std::uint64_t declared_base = r.u64();
  if (declared_base != base_hash)
    throw CompatibilityError("adapters: base checkpoint hash mismatch");

  DanfAdapters<T> out;
  out.rank = static_cast<int>(r.u32());
  out.decoder.layers.resize(params.decoder.layers.size());
  out.time_net.layers.resize(params.time_net.layers.size());
  out.orient_net.layers.resize(params.orient_net.layers.size());

  std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    LoraAdapter<T> a;
    a.target = r.str();
    int rows = static_cast<int>(r.u32());
    int cols = static_cast<int>(r.u32());
    a.rank = static_cast<int>(r.u32());
    a.B.resize(rows, a.rank);
    a.A.resize(a.rank, cols);
    for (Eigen::Index k = 0; k < a.B.size(); ++k)
      a.B.data()[k] = static_cast<T>(r.f32());
    for (Eigen::Index k = 0; k < a.A.size(); ++k)
      a.A.data()[k] = static_cast<T>(r.f32());

    auto dot = a.target.find('.');
    if (dot == std::string::npos)
      throw CompatibilityError("adapters: malformed target " + a.target);
    std::string net = a.target.substr(0, dot);
    std::size_t layer = std::stoul(a.target.substr(dot + 1));
    MlpAdapters<T>* slot = nullptr;
    const Mlp<T>* owner = nullptr;
    if (net == "decoder") {
      slot = &out.decoder;
      owner = &params.decoder;
    } else if (net == "time") {
      slot = &out.time_net;
      owner = &params.time_net;
    } else if (net == "orient") {
      slot = &out.orient_net;
      owner = &params.orient_net;
    } else {
      throw CompatibilityError("adapters: unknown target net " + net);
    }
    if (layer >= owner->layers.size() ||
        owner->layers[layer].out_dim() != rows ||
        owner->layers[layer].in_dim() != cols)
      throw CompatibilityError("adapters: target shape mismatch for " +
                               a.target);
    slot->layers[layer] = std::move(a);
  }
  return out;
}

inline std::string descriptor_to_string(const ArchDescriptor& a) {
  std::ostringstream out;
  auto list = [](const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
      s += (i ? "," : "") + std::to_string(v[i]);
    return s.empty() ? "-" : s;
  };
  out << "bounce_count(K)   " << a.bounce_count << "\n"
      << "feature_dim(D)    " << a.feature_dim << "\n"
      << "enc_levels(L)     " << a.enc_levels << "\n"
      << "orient_dim        " << a.orient_dim << "\n"
      << "rir_length(T)     " << a.rir_length << "\n"
      << "channels          " << a.channels << "\n"
      << "bounce_hidden     " << list(a.bounce_hidden) << "\n"
      << "time_hidden       " << list(a.time_hidden) << "\n"
      << "decoder_hidden    " << list(a.decoder_hidden) << "\n";
  return out.str();
}

}  // namespace danf
