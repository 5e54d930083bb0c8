// Copyright 2026 The danf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
#pragma once

#include <cstring>
#include <fstream>
#include <string>

#include "danf/foa.hpp"

namespace danf {

// RIRs persist as 4-channel IEEE-float PCM WAV (format tag 3), interleaved
// W,X,Y,Z. Little-endian throughout, which matches every platform this
// builds on.

namespace wav_detail {

inline void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>((v >> 8) & 0xFF));
}
inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace wav_detail

template <typename T>
void write_wav(const std::string& path, const FoaRir<T>& rir) {
  rir.validate();
  const int channels = kFoaChannels;
  const int frames = rir.length();
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(frames) * channels * 4;

  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  wav_detail::put_u32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  wav_detail::put_u32(out, 16);
  wav_detail::put_u16(out, 3);  // IEEE float
  wav_detail::put_u16(out, static_cast<std::uint16_t>(channels));
  wav_detail::put_u32(out, static_cast<std::uint32_t>(rir.sample_rate));
  wav_detail::put_u32(out,
                      static_cast<std::uint32_t>(rir.sample_rate) * channels * 4);
  wav_detail::put_u16(out, static_cast<std::uint16_t>(channels * 4));
  wav_detail::put_u16(out, 32);
  out += "data";
  wav_detail::put_u32(out, data_bytes);

  for (int t = 0; t < frames; ++t) {
    for (int c = 0; c < channels; ++c) {
      float v = static_cast<float>(rir.samples(c, t));
      char b[4];
      std::memcpy(b, &v, 4);
      out.append(b, 4);
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InvalidInput("write_wav: cannot open " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw InvalidInput("write_wav: write failed for " + path);
}

template <typename T>
FoaRir<T> read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("read_wav: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 12 || std::memcmp(p, "RIFF", 4) != 0 ||
      std::memcmp(p + 8, "WAVE", 4) != 0)
    throw InvalidInput("read_wav: not a RIFF/WAVE file: " + path);

  int channels = 0, sample_rate = 0, bits = 0, format = 0;
  std::size_t data_off = 0, data_len = 0;
  std::size_t off = 12;
  while (off + 8 <= bytes.size()) {
    std::uint32_t chunk_len = wav_detail::get_u32(p + off + 4);
    if (std::memcmp(p + off, "fmt ", 4) == 0 && chunk_len >= 16) {
      format = wav_detail::get_u16(p + off + 8);
      channels = wav_detail::get_u16(p + off + 10);
      sample_rate = static_cast<int>(wav_detail::get_u32(p + off + 12));
      bits = wav_detail::get_u16(p + off + 22);
    } else if (std::memcmp(p + off, "data", 4) == 0) {
      data_off = off + 8;
      data_len = chunk_len;
    }
    off += 8 + chunk_len + (chunk_len & 1);
  }
  if (format != 3 || bits != 32)
    throw InvalidInput("read_wav: expected 32-bit float PCM: " + path);
  if (channels != kFoaChannels)
    throw InvalidInput("read_wav: expected 4 channels: " + path);
  if (data_off == 0 || data_off + data_len > bytes.size())
    throw InvalidInput("read_wav: malformed data chunk: " + path);

  const std::size_t frames = data_len / (4u * kFoaChannels);
  FoaRir<T> rir;
  rir.sample_rate = sample_rate;
  rir.samples.resize(kFoaChannels, static_cast<Eigen::Index>(frames));
  const unsigned char* d = p + data_off;
  for (std::size_t t = 0; t < frames; ++t) {
    for (int c = 0; c < kFoaChannels; ++c) {
      float v;
      std::memcpy(&v, d + (t * kFoaChannels + static_cast<std::size_t>(c)) * 4, 4);
      rir.samples(c, static_cast<Eigen::Index>(t)) = static_cast<T>(v);
    }
  }
  rir.validate();
  return rir;
}

}  // namespace danf
