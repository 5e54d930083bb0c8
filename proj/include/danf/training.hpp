// Copyright 2026 The danf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
#pragma once

#include <limits>
#include <optional>

#include "danf/dataset.hpp"
#include "danf/losses.hpp"
#include "danf/metrics.hpp"
#include "danf/model.hpp"

namespace danf {

struct TrainConfig {
  double lambda = 10.0;
  int steps = 20000;
  int batch_scenes = 4;
  int time_subsample = 256;     // queried samples on subsampled steps
  int full_query_interval = 10; // every Nth step queries all of T
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  int eval_interval = 0;        // holdout-loss cadence; 0 disables
  int log_interval = 50;
  bool stft_w_only = false;
  StftParams stft;

  void validate() const {
    if (!(lambda >= 0)) throw InvalidConfig("train: lambda must be >= 0");
    if (steps < 0) throw InvalidConfig("train: steps must be >= 0");
    if (batch_scenes < 1 || time_subsample < 1 || full_query_interval < 1 ||
        log_interval < 1)
      throw InvalidConfig("train: counts must be positive");
    if (!(learning_rate > 0)) throw InvalidConfig("train: bad learning rate");
  }
};

struct TrainLogRow {
  long step = 0;
  LossBreakdown loss;           // batch mean
  double holdout_loss = -1.0;   // -1 when not evaluated at this step
};

inline std::string train_log_to_csv(const std::vector<TrainLogRow>& log) {
  std::ostringstream out;
  out << "# loss reduction: per-scene sums (norm convention), batch mean\n";
  out << "step,mse,mag,phase,sc,iv,total,holdout_loss\n";
  out.precision(10);
  for (const auto& r : log) {
    out << r.step << ',' << r.loss.mse << ',' << r.loss.mag << ','
        << r.loss.phase << ',' << r.loss.sc << ',' << r.loss.iv << ','
        << r.loss.total;
    if (r.holdout_loss >= 0)
      out << ',' << r.holdout_loss << '\n';
    else
      out << ",\n";
  }
  return out.str();
}

template <typename T>
struct TrainResult {
  DanfParams<T> params;
  std::optional<DanfAdapters<T>> adapters;  // set when training LoRA factors
  std::vector<TrainLogRow> log;
  long steps_run = 0;
  bool aborted_non_finite = false;
  bool early_stopped = false;
  long best_step = -1;  // step of the restored best-holdout snapshot
  int iv_degenerate_count = 0;
};

// Stop once the holdout loss has gone `patience` consecutive evaluations
// without improving on the best seen so far.
inline bool early_stop_check(const std::vector<double>& history,
                             int patience) {
  if (history.empty()) throw InvalidInput("early_stop_check: empty history");
  std::size_t best = 0;
  for (std::size_t i = 1; i < history.size(); ++i)
    if (history[i] < history[best]) best = i;
  return history.size() - 1 - best >= static_cast<std::size_t>(patience);
}

namespace train_detail {

// Per-room conditioning and normalized scene coordinates.
template <typename T>
struct RoomContext {
  const Dataset<T>* data = nullptr;
  Mat<T> bounce_norm;  // 3 x K
  std::vector<Vec<T>> source_norm, listener_norm;
  std::vector<int> train_scenes;  // indices into data->scenes
};

template <typename T>
RoomContext<T> make_room_context(const Dataset<T>& ds, int bounce_count) {
  RoomContext<T> ctx;
  ctx.data = &ds;
  Mat<T> bounce =
      sample_bounce_points<T>(ds.room, bounce_count, ds.room.seed);
  ctx.bounce_norm = normalize_coordinates(bounce, ds.room);
  ctx.source_norm.reserve(ds.scenes.size());
  ctx.listener_norm.reserve(ds.scenes.size());
  for (const Scene& sc : ds.scenes) {
    ctx.source_norm.push_back(normalize_point<T>(sc.source, ds.room));
    ctx.listener_norm.push_back(normalize_point<T>(sc.listener, ds.room));
  }
  ctx.train_scenes = ds.indices_of(Split::kTrain);
  return ctx;
}

template <typename T>
void add_mlp_grads(MlpGrads<T>& acc, const MlpGrads<T>& g) {
  if (acc.d_weights.empty()) {
    acc = g;
    return;
  }
  for (std::size_t i = 0; i < g.d_weights.size(); ++i) {
    acc.d_weights[i] += g.d_weights[i];
    acc.d_bias[i] += g.d_bias[i];
  }
}

template <typename T>
void scale_mlp_grads(MlpGrads<T>& g, T s) {
  for (auto& w : g.d_weights) w *= s;
  for (auto& b : g.d_bias) b *= s;
}

template <typename T>
void add_danf_grads(DanfGrads<T>& acc, const DanfGrads<T>& g) {
  add_mlp_grads(acc.bounce, g.bounce);
  add_mlp_grads(acc.listener_rel, g.listener_rel);
  add_mlp_grads(acc.source_rel, g.source_rel);
  add_mlp_grads(acc.time, g.time);
  add_mlp_grads(acc.orient, g.orient);
  add_mlp_grads(acc.decoder, g.decoder);
}

template <typename T>
void scale_danf_grads(DanfGrads<T>& g, T s) {
  scale_mlp_grads(g.bounce, s);
  scale_mlp_grads(g.listener_rel, s);
  scale_mlp_grads(g.source_rel, s);
  scale_mlp_grads(g.time, s);
  scale_mlp_grads(g.orient, s);
  scale_mlp_grads(g.decoder, s);
}

template <typename T>
void add_adapter_grads(AdapterGrads<T>& acc, const AdapterGrads<T>& g) {
  if (acc.d_b.empty()) {
    acc = g;
    return;
  }
  for (std::size_t i = 0; i < g.d_b.size(); ++i) {
    acc.d_b[i] += g.d_b[i];
    acc.d_a[i] += g.d_a[i];
  }
}

template <typename T>
void scale_adapter_grads(AdapterGrads<T>& g, T s) {
  for (auto& b : g.d_b) b *= s;
  for (auto& a : g.d_a) a *= s;
}

// Mean full-RIR training loss over the given (room, scene) pairs.
template <typename T>
double mean_full_loss(const DanfParams<T>& params,
                      const DanfAdapters<T>* adapters,
                      const std::vector<RoomContext<T>>& rooms,
                      const std::vector<std::pair<int, int>>& scenes,
                      const TrainConfig& cfg) {
  if (scenes.empty()) return 0.0;
  std::vector<int> all = all_time_indices<T>(params.arch.rir_length);
  std::vector<double> values(scenes.size(), 0.0);
  parallel_for(scenes.size(), [&](std::size_t i) {
    const auto& [room_idx, scene_idx] = scenes[i];
    const RoomContext<T>& room = rooms[static_cast<std::size_t>(room_idx)];
    Mat<T> est = danf_forward<T>(
        params, room.source_norm[static_cast<std::size_t>(scene_idx)],
        room.listener_norm[static_cast<std::size_t>(scene_idx)],
        room.data->scenes[static_cast<std::size_t>(scene_idx)].orientation,
        room.bounce_norm, all, nullptr, adapters);
    TrainLossResult<T> loss =
        train_loss(est, room.data->rirs[static_cast<std::size_t>(scene_idx)]
                            .samples,
                   cfg.lambda, cfg.stft, cfg.stft_w_only);
    values[i] = loss.breakdown.total;
  });
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(scenes.size());
}

template <typename T>
struct EarlyStopSpec {
  bool active = false;
  int patience = 5;
  std::vector<std::pair<int, int>> holdout;  // (room, scene) pairs
};

// Shared optimization core for single-room, multi-room, and LoRA training.
// Rooms are visited round-robin; a batch of scenes is drawn from one room
// per step. Per-scene gradients are computed in parallel and reduced in
// scene order so results do not depend on the schedule.
template <typename T>
TrainResult<T> optimize(const std::vector<RoomContext<T>>& rooms,
                        DanfParams<T> params,
                        std::optional<DanfAdapters<T>> adapters,
                        const TrainConfig& cfg,
                        const EarlyStopSpec<T>& early = {}) {
  cfg.validate();
  params.validate();
  for (const auto& room : rooms) {
    if (room.train_scenes.empty())
      throw InvalidConfig("train: a room has an empty train split");
    if (room.data->room.rir_length != params.arch.rir_length)
      throw InvalidConfig("train: dataset T does not match model descriptor");
  }
  if (early.active && (cfg.eval_interval < 1 || early.holdout.empty()))
    throw InvalidConfig("train: early stopping needs eval_interval and holdout");

  TrainResult<T> out;
  const bool lora_mode = adapters.has_value();

  AdamState<T> opt;
  opt.learning_rate = cfg.learning_rate;

  Rng rng(cfg.seed);
  const int total_t = params.arch.rir_length;

  std::vector<double> holdout_history;
  DanfParams<T> best_params = params;
  std::optional<DanfAdapters<T>> best_adapters = adapters;
  long best_step = -1;

  for (int step = 0; step < cfg.steps; ++step) {
    const RoomContext<T>& room =
        rooms[static_cast<std::size_t>(step) % rooms.size()];
    const bool full_query = ((step + 1) % cfg.full_query_interval) == 0;

    // draw scenes and per-scene time indices up front (single RNG stream)
    std::vector<int> batch(static_cast<std::size_t>(cfg.batch_scenes));
    for (auto& b : batch)
      b = room.train_scenes[rng.uniform_int(room.train_scenes.size())];
    std::vector<std::vector<int>> t_idx(batch.size());
    for (auto& idx : t_idx) {
      if (full_query) {
        idx = all_time_indices<T>(total_t);
      } else {
        idx.resize(static_cast<std::size_t>(cfg.time_subsample));
        for (auto& t : idx)
          t = static_cast<int>(
              rng.uniform_int(static_cast<std::uint64_t>(total_t)));
      }
    }

    std::vector<DanfGrads<T>> grads(batch.size());
    std::vector<AdapterGrads<T>> a_grads(batch.size());
    std::vector<LossBreakdown> breakdowns(batch.size());
    std::vector<int> degenerate(batch.size(), 0);

    const DanfAdapters<T>* adapter_ptr = lora_mode ? &*adapters : nullptr;
    parallel_for(batch.size(), [&](std::size_t i) {
      int scene = batch[i];
      DanfCache<T> cache;
      Mat<T> est = danf_forward<T>(
          params, room.source_norm[static_cast<std::size_t>(scene)],
          room.listener_norm[static_cast<std::size_t>(scene)],
          room.data->scenes[static_cast<std::size_t>(scene)].orientation,
          room.bounce_norm, t_idx[i], &cache, adapter_ptr);
      const Mat<T>& ref_full =
          room.data->rirs[static_cast<std::size_t>(scene)].samples;
      Mat<T> d_est;
      if (full_query) {
        TrainLossResult<T> loss =
            train_loss(est, ref_full, cfg.lambda, cfg.stft, cfg.stft_w_only);
        breakdowns[i] = loss.breakdown;
        degenerate[i] = loss.breakdown.iv_degenerate ? 1 : 0;
        d_est = std::move(loss.grad);
      } else {
        // spectral losses are undefined on scattered samples; MSE only
        Mat<T> ref(kFoaChannels, static_cast<Eigen::Index>(t_idx[i].size()));
        for (std::size_t j = 0; j < t_idx[i].size(); ++j)
          ref.col(static_cast<Eigen::Index>(j)) =
              ref_full.col(t_idx[i][j]);
        LossResult<T> loss = mse_loss(est, ref);
        breakdowns[i].mse = loss.value;
        breakdowns[i].lambda = cfg.lambda;
        breakdowns[i].total = loss.value;
        d_est = std::move(loss.grad);
      }
      danf_backward(params, cache, d_est, grads[i], adapter_ptr);
      if (lora_mode)
        a_grads[i] = collect_adapter_grads(*adapters, grads[i]);
    });

    LossBreakdown mean;
    for (const auto& b : breakdowns) {
      mean.mse += b.mse;
      mean.mag += b.mag;
      mean.phase += b.phase;
      mean.sc += b.sc;
      mean.iv += b.iv;
      mean.total += b.total;
    }
    double inv_batch = 1.0 / static_cast<double>(batch.size());
    mean.mse *= inv_batch;
    mean.mag *= inv_batch;
    mean.phase *= inv_batch;
    mean.sc *= inv_batch;
    mean.iv *= inv_batch;
    mean.total *= inv_batch;
    mean.lambda = cfg.lambda;
    for (int d : degenerate) out.iv_degenerate_count += d;

    if (!std::isfinite(mean.total)) {
      out.aborted_non_finite = true;
      out.steps_run = step;
      TrainLogRow row;
      row.step = step;
      row.loss = mean;
      out.log.push_back(row);
      break;
    }

    if (lora_mode) {
      AdapterGrads<T> acc;
      for (const auto& g : a_grads) add_adapter_grads(acc, g);
      scale_adapter_grads(acc, static_cast<T>(inv_batch));
      auto p_refs = adapter_param_refs(*adapters);
      auto g_refs = adapter_grad_refs(acc);
      adam_step(p_refs, g_refs, opt);
    } else {
      DanfGrads<T> acc;
      for (const auto& g : grads) add_danf_grads(acc, g);
      scale_danf_grads(acc, static_cast<T>(inv_batch));
      auto p_refs = danf_param_refs(params);
      auto g_refs = danf_grad_refs(acc);
      adam_step(p_refs, g_refs, opt);
    }
    out.steps_run = step + 1;

    double holdout_loss = -1.0;
    if (cfg.eval_interval > 0 && (step + 1) % cfg.eval_interval == 0 &&
        !early.holdout.empty()) {
      holdout_loss = mean_full_loss(params, lora_mode ? &*adapters : nullptr,
                                    rooms, early.holdout, cfg);
      holdout_history.push_back(holdout_loss);
      if (holdout_history.size() == 1 ||
          holdout_loss <=
              *std::min_element(holdout_history.begin(),
                                holdout_history.end() - 1)) {
        best_params = params;
        best_adapters = adapters;
        best_step = step + 1;
      }
    }

    if ((step + 1) % cfg.log_interval == 0 || step + 1 == cfg.steps ||
        holdout_loss >= 0) {
      TrainLogRow row;
      row.step = step + 1;
      row.loss = mean;
      row.holdout_loss = holdout_loss;
      out.log.push_back(row);
    }

    if (early.active && !holdout_history.empty() && holdout_loss >= 0 &&
        early_stop_check(holdout_history, early.patience)) {
      out.early_stopped = true;
      break;
    }
  }

  if (early.active && best_step >= 0) {
    out.params = std::move(best_params);
    out.adapters = std::move(best_adapters);
    out.best_step = best_step;
  } else {
    out.params = std::move(params);
    out.adapters = std::move(adapters);
  }
  return out;
}

}  // namespace train_detail

// Single-room training of the full parameter set. `init` warm-starts from
// an existing parameter set; otherwise `arch` seeds a fresh model.
template <typename T>
TrainResult<T> train(const Dataset<T>& dataset, const ArchDescriptor& arch,
                     const TrainConfig& cfg,
                     const DanfParams<T>* init = nullptr) {
  dataset.validate();
  ArchDescriptor a = init ? init->arch : arch;
  if (a.rir_length != dataset.room.rir_length)
    throw InvalidConfig("train: descriptor T must equal dataset rir_length");
  DanfParams<T> params = init ? *init : init_danf<T>(a, cfg.seed);
  std::vector<train_detail::RoomContext<T>> rooms;
  rooms.push_back(train_detail::make_room_context(dataset, a.bounce_count));
  return train_detail::optimize<T>(rooms, std::move(params), std::nullopt,
                                   cfg);
}

// Multi-room pretraining: round-robin over rooms, each conditioned on its
// own bounce points.
template <typename T>
TrainResult<T> pretrain_multi(const std::vector<const Dataset<T>*>& datasets,
                              const ArchDescriptor& arch,
                              const TrainConfig& cfg) {
  if (datasets.size() < 2)
    throw InvalidConfig("pretrain_multi: need at least 2 rooms");
  for (const auto* ds : datasets) {
    ds->validate();
    if (ds->room.rir_length != arch.rir_length ||
        ds->room.sample_rate != datasets[0]->room.sample_rate ||
        ds->room.rir_length != datasets[0]->room.rir_length)
      throw InvalidConfig("pretrain_multi: rooms must share T and sample rate");
  }
  std::vector<train_detail::RoomContext<T>> rooms;
  rooms.reserve(datasets.size());
  for (const auto* ds : datasets)
    rooms.push_back(train_detail::make_room_context(*ds, arch.bounce_count));
  return train_detail::optimize<T>(rooms, init_danf<T>(arch, cfg.seed),
                                   std::nullopt, cfg);
}

// ---------------------------------------------------------------------------
// Model evaluation against a dataset split.
// ---------------------------------------------------------------------------

// Mean full-RIR training loss of a model over selected scenes.
template <typename T>
double dataset_loss(const DanfParams<T>& params,
                    std::type_identity_t<const DanfAdapters<T>*> adapters,
                    const Dataset<T>& ds,
                    const std::vector<int>& scene_indices,
                    const TrainConfig& cfg) {
  std::vector<train_detail::RoomContext<T>> rooms;
  rooms.push_back(
      train_detail::make_room_context(ds, params.arch.bounce_count));
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(scene_indices.size());
  for (int idx : scene_indices) pairs.push_back({0, idx});
  return train_detail::mean_full_loss(params, adapters, rooms, pairs, cfg);
}

template <typename T>
std::vector<FoaRir<T>> render_model(
    const DanfParams<T>& params,
    std::type_identity_t<const DanfAdapters<T>*> adapters,
    const Dataset<T>& ds, const std::vector<int>& scene_indices) {
  params.validate();
  if (params.arch.rir_length != ds.room.rir_length)
    throw CompatibilityError("render_model: model T does not match dataset");
  Mat<T> bounce = sample_bounce_points<T>(ds.room, params.arch.bounce_count,
                                          ds.room.seed);
  Mat<T> bounce_norm = normalize_coordinates(bounce, ds.room);
  std::vector<int> all = all_time_indices<T>(params.arch.rir_length);
  std::vector<FoaRir<T>> out(scene_indices.size());
  parallel_for(scene_indices.size(), [&](std::size_t i) {
    int idx = scene_indices[i];
    const Scene& sc = ds.scenes[static_cast<std::size_t>(idx)];
    FoaRir<T> est;
    est.sample_rate = ds.room.sample_rate;
    est.samples = danf_forward<T>(
        params, normalize_point<T>(sc.source, ds.room),
        normalize_point<T>(sc.listener, ds.room), sc.orientation, bounce_norm,
        all, nullptr, adapters);
    out[i] = std::move(est);
  });
  return out;
}

template <typename T>
MetricsReport evaluate_model(
    const DanfParams<T>& params,
    std::type_identity_t<const DanfAdapters<T>*> adapters,
    const Dataset<T>& ds, Split split, const StftParams& stft = {}) {
  std::vector<int> idx = ds.indices_of(split);
  if (idx.empty()) throw InvalidInput("evaluate_model: empty split");
  std::vector<FoaRir<T>> est = render_model(params, adapters, ds, idx);
  std::vector<FoaRir<T>> ref;
  ref.reserve(idx.size());
  for (int i : idx) ref.push_back(ds.rirs[static_cast<std::size_t>(i)]);
  return evaluate_set(ref, est, stft);
}

// ---------------------------------------------------------------------------
// Adaptation to an unseen room.
// ---------------------------------------------------------------------------

enum class AdaptMode { kZeroShot, kColdStart, kWarmStart, kLora };

inline const char* adapt_mode_name(AdaptMode m) {
  switch (m) {
    case AdaptMode::kZeroShot: return "zero_shot";
    case AdaptMode::kColdStart: return "cold_start";
    case AdaptMode::kWarmStart: return "warm_start";
    default: return "lora";
  }
}

inline AdaptMode adapt_mode_from_name(const std::string& s) {
  if (s == "zero" || s == "zero_shot") return AdaptMode::kZeroShot;
  if (s == "cold" || s == "cold_start") return AdaptMode::kColdStart;
  if (s == "warm" || s == "warm_start") return AdaptMode::kWarmStart;
  if (s == "lora") return AdaptMode::kLora;
  throw InvalidConfig("unknown adaptation mode: " + s);
}

struct AdaptConfig {
  AdaptMode mode = AdaptMode::kWarmStart;
  int rank = 3;          // LoRA only
  int n_train = 800;
  int holdout_size = 200;
  int patience = 5;
  std::optional<bool> early_stop;  // unset: auto (warm start with n_train < 80)
  LoraTargets lora_targets;
  TrainConfig train;

  // Warm-start models overfit below 80 examples, hence the auto rule.
  bool early_stop_active() const {
    if (early_stop.has_value()) return *early_stop;
    return mode == AdaptMode::kWarmStart && n_train < 80;
  }

  void validate() const {
    train.validate();
    if (mode == AdaptMode::kLora && rank < 1)
      throw InvalidConfig("adapt: LoRA rank must be >= 1");
    if (mode != AdaptMode::kZeroShot && n_train < 1)
      throw InvalidConfig("adapt: n_train must be >= 1");
    if (patience < 1) throw InvalidConfig("adapt: patience must be >= 1");
  }
};

template <typename T>
struct AdaptResult {
  DanfParams<T> params;
  std::optional<DanfAdapters<T>> adapters;
  MetricsReport report;         // on the new room's test split
  std::size_t trainable_count = 0;
  TrainResult<T> train_result;  // empty log for zero-shot
};

template <typename T>
AdaptResult<T> adapt(const DanfParams<T>& pretrained,
                     const Dataset<T>& new_room, const AdaptConfig& cfg) {
  cfg.validate();
  new_room.validate();
  if (pretrained.arch.rir_length != new_room.room.rir_length)
    throw CompatibilityError("adapt: model T does not match new room");

  AdaptResult<T> out;
  if (cfg.mode == AdaptMode::kZeroShot) {
    out.params = pretrained;
    out.trainable_count = 0;
    out.report = evaluate_model(out.params, nullptr, new_room, Split::kTest,
                                cfg.train.stft);
    return out;
  }

  train_detail::RoomContext<T> ctx = train_detail::make_room_context(
      new_room, pretrained.arch.bounce_count);
  const std::vector<int> full_train = ctx.train_scenes;
  bool early_active = cfg.early_stop_active();

  train_detail::EarlyStopSpec<T> early;
  std::vector<int> train_scenes;
  if (early_active) {
    if (cfg.n_train + cfg.holdout_size > static_cast<int>(full_train.size()))
      throw InvalidConfig(
          "adapt: train split too small for n_train plus holdout");
    early.active = true;
    early.patience = cfg.patience;
    for (int i = 0; i < cfg.holdout_size; ++i)
      early.holdout.push_back(
          {0, full_train[full_train.size() - 1 - static_cast<std::size_t>(i)]});
  }
  if (cfg.n_train > static_cast<int>(full_train.size()))
    throw InvalidConfig("adapt: n_train exceeds the train split");
  train_scenes.assign(full_train.begin(), full_train.begin() + cfg.n_train);
  ctx.train_scenes = train_scenes;

  TrainConfig tc = cfg.train;
  if (early_active && tc.eval_interval < 1)
    tc.eval_interval = std::max(1, tc.log_interval);

  std::vector<train_detail::RoomContext<T>> rooms{std::move(ctx)};
  TrainResult<T> result;
  if (cfg.mode == AdaptMode::kColdStart) {
    result = train_detail::optimize<T>(
        rooms, init_danf<T>(pretrained.arch, tc.seed), std::nullopt, tc,
        early);
  } else if (cfg.mode == AdaptMode::kWarmStart) {
    result = train_detail::optimize<T>(rooms, pretrained, std::nullopt, tc,
                                       early);
  } else {
    DanfAdapters<T> adapters = make_danf_adapters(
        pretrained, cfg.rank, tc.seed, cfg.lora_targets);
    result = train_detail::optimize<T>(rooms, pretrained, std::move(adapters),
                                       tc, early);
  }

  out.params = result.params;
  out.adapters = result.adapters;
  if (cfg.mode == AdaptMode::kLora) {
    out.trainable_count = param_count(*out.adapters);
  } else {
    out.trainable_count = param_count(out.params);
  }
  out.report = evaluate_model(
      out.params, out.adapters ? &*out.adapters : nullptr, new_room,
      Split::kTest, cfg.train.stft);
  out.train_result = std::move(result);
  return out;
}

// ---------------------------------------------------------------------------
// Lambda sweep (log grid plus the lambda = 0 baseline).
// ---------------------------------------------------------------------------

struct SweepRow {
  double lambda = 0;
  MetricsReport report;
};

inline std::vector<double> lambda_grid(int gamma_lo = -4, int gamma_hi = 4) {
  std::vector<double> grid{0.0};
  for (int g = gamma_lo; g <= gamma_hi; ++g)
    grid.push_back(std::pow(10.0, g));
  return grid;
}

// Trains one model per lambda with identical seeds and splits.
template <typename T>
std::vector<SweepRow> lambda_sweep(const Dataset<T>& dataset,
                                   const ArchDescriptor& arch,
                                   const TrainConfig& base,
                                   const std::vector<double>& lambdas) {
  std::vector<SweepRow> rows;
  for (double lambda : lambdas) {
    TrainConfig cfg = base;
    cfg.lambda = lambda;
    TrainResult<T> r = train(dataset, arch, cfg);
    SweepRow row;
    row.lambda = lambda;
    row.report =
        evaluate_model(r.params, nullptr, dataset, Split::kTest, cfg.stft);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace danf
