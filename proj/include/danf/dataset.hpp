// Copyright 2026 The danf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
#pragma once

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "danf/image_source.hpp"
#include "danf/wav.hpp"

namespace danf {

enum class Split { kTrain, kTest, kHoldout };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kTest: return "test";
    default: return "holdout";
  }
}

inline Split split_from_name(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  if (s == "holdout") return Split::kHoldout;
  throw InvalidInput("unknown split label: " + s);
}

template <typename T>
struct Dataset {
  RoomSpec room;
  std::vector<Scene> scenes;
  std::vector<FoaRir<T>> rirs;  // parallel to scenes
  std::vector<Split> splits;
  int dropped_arrivals = 0;

  std::vector<int> indices_of(Split s) const {
    std::vector<int> idx;
    for (std::size_t i = 0; i < splits.size(); ++i)
      if (splits[i] == s) idx.push_back(static_cast<int>(i));
    return idx;
  }

  void validate() const {
    room.validate();
    if (scenes.size() != rirs.size() || scenes.size() != splits.size())
      throw InvalidInput("dataset: scenes/rirs/splits length mismatch");
    for (const auto& r : rirs) {
      if (r.sample_rate != room.sample_rate || r.length() != room.rir_length)
        throw InvalidInput("dataset: RIR does not match room sample_rate/length");
    }
  }
};

struct DatasetConfig {
  int n_pairs = 1000;
  double listener_height = 1.5;  // meters; sources share the grid height
  double grid_pitch = 0.5;       // meters
  double wall_margin = 0.3;      // meters, keeps grid nodes off the walls
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

// Uniformly sampled source-listener pairs on a fixed-height grid, uniform
// orientations, RIRs rendered, 80/20 train/test by seeded shuffle.
template <typename T>
Dataset<T> generate_dataset(const RoomSpec& room, const DatasetConfig& cfg) {
  room.validate();
  if (cfg.n_pairs < 1) throw InvalidConfig("generate_dataset: n_pairs must be >= 1");
  if (!(cfg.listener_height > 0) || !(cfg.listener_height < room.dims[2]))
    throw InvalidConfig("generate_dataset: listener_height outside room");

  std::vector<double> xs, ys;
  for (double x = cfg.wall_margin; x <= room.dims[0] - cfg.wall_margin + 1e-12;
       x += cfg.grid_pitch)
    xs.push_back(x);
  for (double y = cfg.wall_margin; y <= room.dims[1] - cfg.wall_margin + 1e-12;
       y += cfg.grid_pitch)
    ys.push_back(y);
  const std::size_t nodes = xs.size() * ys.size();
  if (nodes < 2)
    throw InvalidConfig("generate_dataset: grid too small for distinct source/listener");

  Dataset<T> ds;
  ds.room = room;
  Rng rng(cfg.seed);
  for (int i = 0; i < cfg.n_pairs; ++i) {
    std::size_t a = rng.uniform_int(nodes);
    std::size_t b = rng.uniform_int(nodes - 1);
    if (b >= a) ++b;  // distinct node for the listener
    Scene sc;
    sc.source = {xs[a % xs.size()], ys[a / xs.size()], cfg.listener_height};
    sc.listener = {xs[b % xs.size()], ys[b / xs.size()], cfg.listener_height};
    sc.orientation = rng.uniform(0.0, 2.0 * kPi);
    sc.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
    ds.scenes.push_back(sc);
  }

  // seeded shuffle for the split assignment (Fisher-Yates on the index list)
  std::vector<int> order(static_cast<std::size_t>(cfg.n_pairs));
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::size_t j = rng.uniform_int(i);
    std::swap(order[i - 1], order[j]);
  }
  int n_train = static_cast<int>(
      std::llround(cfg.train_fraction * static_cast<double>(cfg.n_pairs)));
  ds.splits.assign(static_cast<std::size_t>(cfg.n_pairs), Split::kTest);
  for (int i = 0; i < n_train; ++i)
    ds.splits[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] =
        Split::kTrain;

  ds.rirs.resize(ds.scenes.size());
  std::vector<int> dropped(ds.scenes.size(), 0);
  parallel_for(ds.scenes.size(), [&](std::size_t i) {
    RenderResult<T> r = render_foa_rir<T>(ds.scenes[i], room);
    ds.rirs[i] = std::move(r.rir);
    dropped[i] = r.dropped_arrivals;
  });
  ds.dropped_arrivals = std::accumulate(dropped.begin(), dropped.end(), 0);
  return ds;
}

// ---------------------------------------------------------------------------
// On-disk layout: <dir>/manifest.json + <dir>/rir/scene_%05d.wav
// ---------------------------------------------------------------------------

inline constexpr int kManifestSchemaVersion = 1;

inline std::string scene_wav_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "rir/scene_%05d.wav", index);
  return buf;
}

template <typename T>
void save_dataset(const std::string& dir, const Dataset<T>& ds) {
  ds.validate();
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "rir");

  nlohmann::json j;
  j["schema_version"] = kManifestSchemaVersion;
  j["room"] = {
      {"dims", ds.room.dims},
      {"absorption", ds.room.absorption},
      {"max_order", ds.room.max_order},
      {"sample_rate", ds.room.sample_rate},
      {"rir_length", ds.room.rir_length},
      {"speed_of_sound", ds.room.speed_of_sound},
      {"bounce_count", ds.room.bounce_count},
      {"seed", ds.room.seed},
  };
  j["dropped_arrivals"] = ds.dropped_arrivals;
  nlohmann::json scenes = nlohmann::json::array();
  for (std::size_t i = 0; i < ds.scenes.size(); ++i) {
    const Scene& sc = ds.scenes[i];
    scenes.push_back({
        {"id", i},
        {"source", sc.source},
        {"listener", sc.listener},
        {"orientation", sc.orientation},
        {"split", split_name(ds.splits[i])},
        {"rir", scene_wav_name(static_cast<int>(i))},
        {"seed", sc.seed},
    });
    write_wav((fs::path(dir) / scene_wav_name(static_cast<int>(i))).string(),
              ds.rirs[i]);
  }
  j["scenes"] = std::move(scenes);

  std::ofstream f(fs::path(dir) / "manifest.json", std::ios::trunc);
  if (!f) throw InvalidInput("save_dataset: cannot write manifest in " + dir);
  f << j.dump(2) << "\n";
}

template <typename T>
Dataset<T> load_dataset(const std::string& dir, bool load_rirs = true) {
  namespace fs = std::filesystem;
  std::ifstream f(fs::path(dir) / "manifest.json");
  if (!f) throw InvalidInput("load_dataset: no manifest.json in " + dir);
  nlohmann::json j = nlohmann::json::parse(f, nullptr, true);
  if (j.value("schema_version", -1) != kManifestSchemaVersion)
    throw InvalidInput("load_dataset: unsupported manifest schema_version");

  Dataset<T> ds;
  const auto& r = j.at("room");
  ds.room.dims = r.at("dims").get<std::array<double, 3>>();
  ds.room.absorption = r.at("absorption").get<std::array<double, 6>>();
  ds.room.max_order = r.at("max_order").get<int>();
  ds.room.sample_rate = r.at("sample_rate").get<int>();
  ds.room.rir_length = r.at("rir_length").get<int>();
  ds.room.speed_of_sound = r.at("speed_of_sound").get<double>();
  ds.room.bounce_count = r.at("bounce_count").get<int>();
  ds.room.seed = r.at("seed").get<std::uint64_t>();
  ds.dropped_arrivals = j.value("dropped_arrivals", 0);

  std::vector<std::string> rir_paths;
  for (const auto& s : j.at("scenes")) {
    Scene sc;
    sc.source = s.at("source").get<std::array<double, 3>>();
    sc.listener = s.at("listener").get<std::array<double, 3>>();
    sc.orientation = s.at("orientation").get<double>();
    sc.seed = s.at("seed").get<std::uint64_t>();
    ds.scenes.push_back(sc);
    ds.splits.push_back(split_from_name(s.at("split").get<std::string>()));
    rir_paths.push_back((fs::path(dir) / s.at("rir").get<std::string>()).string());
  }

  ds.rirs.resize(ds.scenes.size());
  if (load_rirs) {
    parallel_for(ds.scenes.size(), [&](std::size_t i) {
      ds.rirs[i] = read_wav<T>(rir_paths[i]);
    });
    ds.validate();
  } else {
    for (auto& rir : ds.rirs) {
      rir.sample_rate = ds.room.sample_rate;
      rir.samples = Mat<T>::Zero(kFoaChannels, ds.room.rir_length);
    }
  }
  return ds;
}

}  // namespace danf
