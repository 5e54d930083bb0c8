// Copyright 2026 The danf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Command-line front end: dataset generation, training, evaluation,
// adaptation, the lambda sweep, and report aggregation.
//
// Exit codes: 0 success, 2 usage/config, 3 numeric failure, 4 compatibility.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "danf/checkpoint.hpp"
#include "danf/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw danf::InvalidInput("cannot write " + path.string());
  f << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw danf::InvalidInput("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Shared training/architecture flags.
// ---------------------------------------------------------------------------

struct TrainFlags {
  std::string config_path;
  danf::TrainConfig cfg;
  std::string precision = "f32";
  json arch_overrides = json::object();

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path,
                    "JSON training config; flags override its fields");
    cmd->add_option("--lambda", cfg.lambda,
                    "intensity-vector loss weight (0 or 1e-4..1e4)");
    cmd->add_option("--steps", cfg.steps, "optimizer steps");
    cmd->add_option("--seed", cfg.seed, "run seed");
    cmd->add_option("--lr", cfg.learning_rate, "Adam learning rate");
    cmd->add_option("--batch", cfg.batch_scenes, "scenes per step");
    cmd->add_option("--subsample", cfg.time_subsample,
                    "time samples queried on subsampled steps");
    cmd->add_option("--full-interval", cfg.full_query_interval,
                    "every Nth step queries the full RIR");
    cmd->add_option("--eval-interval", cfg.eval_interval,
                    "holdout evaluation cadence (0 = off)");
    cmd->add_option("--log-interval", cfg.log_interval, "log cadence");
    cmd->add_flag("--stft-w-only", cfg.stft_w_only,
                  "restrict the STFT loss to the W channel");
    cmd->add_option("--precision", precision, "f32 or f64")
        ->check(CLI::IsMember({"f32", "f64"}));
    auto arch_opt = [this, cmd](const std::string& flag, const char* key,
                                const char* help) {
      cmd->add_option_function<int>(
          flag, [this, key](int v) { arch_overrides[key] = v; }, help);
    };
    arch_opt("--arch-k", "bounce_count", "bounce points K");
    arch_opt("--arch-d", "feature_dim", "feature width D");
    arch_opt("--arch-levels", "enc_levels", "sinusoidal encoding levels L");
    arch_opt("--arch-orient-dim", "orient_dim", "orientation embedding width");
    cmd->add_option_function<std::vector<int>>(
        "--arch-decoder",
        [this](const std::vector<int>& v) {
          arch_overrides["decoder_hidden"] = v;
        },
        "decoder hidden widths");
    cmd->add_option_function<std::vector<int>>(
        "--arch-time",
        [this](const std::vector<int>& v) {
          arch_overrides["time_hidden"] = v;
        },
        "time-basis hidden widths");
  }

  // config file first, then every flag the user actually passed on top
  danf::TrainConfig resolve(const CLI::App* cmd) const {
    if (config_path.empty()) {
      danf::TrainConfig out = cfg;
      out.validate();
      return out;
    }
    danf::TrainConfig out =
        danf::train_config_from_json(json::parse(read_text(config_path)));
    if (cmd->count("--lambda")) out.lambda = cfg.lambda;
    if (cmd->count("--steps")) out.steps = cfg.steps;
    if (cmd->count("--seed")) out.seed = cfg.seed;
    if (cmd->count("--lr")) out.learning_rate = cfg.learning_rate;
    if (cmd->count("--batch")) out.batch_scenes = cfg.batch_scenes;
    if (cmd->count("--subsample")) out.time_subsample = cfg.time_subsample;
    if (cmd->count("--full-interval"))
      out.full_query_interval = cfg.full_query_interval;
    if (cmd->count("--eval-interval")) out.eval_interval = cfg.eval_interval;
    if (cmd->count("--log-interval")) out.log_interval = cfg.log_interval;
    if (cmd->count("--stft-w-only")) out.stft_w_only = cfg.stft_w_only;
    out.validate();
    return out;
  }

  danf::ArchDescriptor resolve_arch(const danf::RoomSpec& room) const {
    danf::ArchDescriptor arch;
    arch.rir_length = room.rir_length;
    arch.bounce_count = room.bounce_count;
    json merged = danf::arch_to_json(arch);
    for (auto& [k, v] : arch_overrides.items()) merged[k] = v;
    return danf::arch_from_json(merged);
  }
};

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenOptions {
  std::string room_path, out;
  danf::DatasetConfig cfg;
};

int run_gen(const GenOptions& opt) {
  danf::RoomSpec room = danf::load_room(opt.room_path);
  danf::DirLock lock(opt.out);
  danf::Dataset<float> ds = danf::generate_dataset<float>(room, opt.cfg);
  danf::save_dataset(opt.out, ds);
  danf::save_room((fs::path(opt.out) / "room.txt").string(), room);

  double energy = 0.0;
  for (const auto& r : ds.rirs) energy += r.samples.squaredNorm();
  energy /= static_cast<double>(ds.rirs.size());

  danf::ExperimentManifest m;
  m.command = "gen";
  m.seed = opt.cfg.seed;
  m.config = {{"room", opt.room_path},
              {"n_pairs", opt.cfg.n_pairs},
              {"listener_height", opt.cfg.listener_height},
              {"grid_pitch", opt.cfg.grid_pitch},
              {"train_fraction", opt.cfg.train_fraction}};
  m.summary = {{"scenes", ds.scenes.size()},
               {"train", ds.indices_of(danf::Split::kTrain).size()},
               {"test", ds.indices_of(danf::Split::kTest).size()},
               {"mean_rir_energy", energy},
               {"dropped_arrivals", ds.dropped_arrivals}};
  m.artifacts.push_back({"manifest.json", ""});
  m.artifacts.push_back({"room.txt", ""});
  for (std::size_t i = 0; i < ds.scenes.size(); ++i)
    m.artifacts.push_back({danf::scene_wav_name(static_cast<int>(i)), ""});
  danf::write_experiment(opt.out, m);

  std::cout << "generated " << ds.scenes.size() << " scenes in "
            << room.dims[0] << "x" << room.dims[1] << "x" << room.dims[2]
            << " m room (volume "
            << room.dims[0] * room.dims[1] * room.dims[2] << " m^3)\n"
            << "train/test: " << ds.indices_of(danf::Split::kTrain).size()
            << "/" << ds.indices_of(danf::Split::kTest).size()
            << ", mean RIR energy " << energy << ", dropped arrivals "
            << ds.dropped_arrivals << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train: one --data directory trains a single room; several pretrain
// round-robin across rooms.
// ---------------------------------------------------------------------------

struct TrainOptions {
  std::vector<std::string> data_dirs;
  std::string out;
  std::string init_ckpt;
  TrainFlags flags;
  const CLI::App* cmd = nullptr;
};

template <typename T>
int run_train_typed(const TrainOptions& opt) {
  danf::TrainConfig cfg = opt.flags.resolve(opt.cmd);
  danf::DirLock lock(opt.out);

  std::vector<danf::Dataset<T>> datasets;
  for (const std::string& dir : opt.data_dirs)
    datasets.push_back(danf::load_dataset<T>(dir));

  danf::TrainResult<T> result;
  danf::ArchDescriptor arch;
  if (!opt.init_ckpt.empty()) {
    auto ckpt = danf::load_checkpoint<T>(opt.init_ckpt);
    arch = ckpt.params.arch;
    if (datasets.size() != 1)
      throw danf::InvalidConfig("--init requires exactly one --data");
    result = danf::train(datasets[0], arch, cfg, &ckpt.params);
  } else if (datasets.size() == 1) {
    arch = opt.flags.resolve_arch(datasets[0].room);
    result = danf::train(datasets[0], arch, cfg);
  } else {
    arch = opt.flags.resolve_arch(datasets[0].room);
    std::vector<const danf::Dataset<T>*> ptrs;
    for (const auto& ds : datasets) ptrs.push_back(&ds);
    result = danf::pretrain_multi<T>(ptrs, arch, cfg);
  }

  write_text(fs::path(opt.out) / "training_log.csv",
             danf::train_log_to_csv(result.log));

  json snapshot = danf::train_config_to_json(cfg);
  snapshot["arch"] = danf::arch_to_json(arch);
  snapshot["precision"] = opt.flags.precision;

  if (result.aborted_non_finite) {
    danf::save_checkpoint((fs::path(opt.out) / "diagnostic.ckpt").string(),
                          result.params, snapshot.dump());
    std::cerr << "training loss became non-finite at step " << result.steps_run
              << "; diagnostic checkpoint written to " << opt.out << "\n";
    return 3;
  }

  std::uint64_t hash =
      danf::save_checkpoint((fs::path(opt.out) / "model.ckpt").string(),
                            result.params, snapshot.dump());

  danf::ExperimentManifest m;
  m.command = "train";
  m.seed = cfg.seed;
  m.config = snapshot;
  m.config["data"] = opt.data_dirs;
  m.summary = {
      {"steps_run", result.steps_run},
      {"final_loss", result.log.empty() ? 0.0 : result.log.back().loss.total},
      {"param_count", danf::param_count(result.params)},
      {"checkpoint_hash", danf::hash_hex(hash)},
      {"iv_degenerate_count", result.iv_degenerate_count}};
  m.artifacts.push_back({"model.ckpt", ""});
  m.artifacts.push_back({"training_log.csv", ""});
  danf::write_experiment(opt.out, m);

  std::cout << "trained " << result.steps_run << " steps, final loss "
            << (result.log.empty() ? 0.0 : result.log.back().loss.total)
            << ", checkpoint " << (fs::path(opt.out) / "model.ckpt").string()
            << "\n";
  return 0;
}

int run_train(const TrainOptions& opt) {
  return opt.flags.precision == "f64" ? run_train_typed<double>(opt)
                                      : run_train_typed<float>(opt);
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalOptions {
  std::string ckpt, data_dir, out;
  std::string split = "test";
  std::string precision = "f32";
  bool oracle = false;
};

template <typename T>
int run_eval_typed(const EvalOptions& opt) {
  danf::DirLock lock(opt.out);
  danf::Dataset<T> ds = danf::load_dataset<T>(opt.data_dir);
  danf::Split split = danf::split_from_name(opt.split);
  std::vector<int> idx = ds.indices_of(split);
  if (idx.empty()) throw danf::InvalidInput("eval: empty split " + opt.split);

  danf::MetricsReport rep;
  json config = {
      {"data", opt.data_dir}, {"split", opt.split}, {"oracle", opt.oracle}};
  if (opt.oracle) {
    std::vector<danf::FoaRir<T>> ref;
    for (int i : idx) ref.push_back(ds.rirs[static_cast<std::size_t>(i)]);
    rep = danf::evaluate_set(ref, ref);
  } else {
    if (opt.ckpt.empty())
      throw danf::InvalidConfig("eval: --ckpt is required without --oracle");
    auto ckpt = danf::load_checkpoint<T>(opt.ckpt);
    if (ckpt.params.arch.rir_length != ds.room.rir_length ||
        ckpt.params.arch.channels != danf::kFoaChannels)
      throw danf::CompatibilityError(
          "checkpoint architecture does not match the dataset");
    rep = danf::evaluate_model(ckpt.params, nullptr, ds, split);
    config["ckpt"] = opt.ckpt;
    config["checkpoint_hash"] = danf::hash_hex(ckpt.content_hash);
  }

  write_text(fs::path(opt.out) / "metrics.csv", danf::metrics_to_csv(rep));
  write_text(fs::path(opt.out) / "scatter.csv",
             danf::scatter_to_csv(danf::scatter_points(rep)));

  danf::ExperimentManifest m;
  m.command = "eval";
  m.config = config;
  m.summary = danf::metrics_summary_json(rep);
  m.artifacts.push_back({"metrics.csv", ""});
  m.artifacts.push_back({"scatter.csv", ""});
  danf::write_experiment(opt.out, m);

  std::cout << "scenes " << rep.rows.size() << " | T60 " << rep.t60_err_pct
            << " % | C50 " << rep.c50_err_db << " dB | EDT " << rep.edt_err_ms
            << " ms | DoA " << rep.doa_err_deg << " deg\n";
  return 0;
}

int run_eval(const EvalOptions& opt) {
  return opt.precision == "f64" ? run_eval_typed<double>(opt)
                                : run_eval_typed<float>(opt);
}

// ---------------------------------------------------------------------------
// adapt
// ---------------------------------------------------------------------------

struct AdaptOptions {
  std::string ckpt, data_dir, out;
  std::string mode;
  int rank = 3;
  int n_train = 800;
  int holdout = 200;
  int patience = 5;
  std::string early_stop = "auto";
  bool lora_exclude_time = false;
  bool lora_include_orient = false;
  TrainFlags flags;
  const CLI::App* cmd = nullptr;
};

template <typename T>
int run_adapt_typed(const AdaptOptions& opt) {
  danf::AdaptConfig cfg;
  cfg.mode = danf::adapt_mode_from_name(opt.mode);
  cfg.rank = opt.rank;
  cfg.n_train = opt.n_train;
  cfg.holdout_size = opt.holdout;
  cfg.patience = opt.patience;
  if (opt.early_stop == "on")
    cfg.early_stop = true;
  else if (opt.early_stop == "off")
    cfg.early_stop = false;
  else if (opt.early_stop != "auto")
    throw danf::InvalidConfig("--early-stop must be auto, on, or off");
  cfg.lora_targets.time_net = !opt.lora_exclude_time;
  cfg.lora_targets.orient_net = opt.lora_include_orient;
  cfg.train = opt.flags.resolve(opt.cmd);
  if (cfg.mode == danf::AdaptMode::kLora && opt.cmd->count("--rank") == 0)
    throw danf::InvalidConfig("adapt: mode lora requires --rank");

  danf::DirLock lock(opt.out);
  auto ckpt = danf::load_checkpoint<T>(opt.ckpt);
  danf::Dataset<T> ds = danf::load_dataset<T>(opt.data_dir);
  danf::AdaptResult<T> result = danf::adapt(ckpt.params, ds, cfg);

  json snapshot = danf::train_config_to_json(cfg.train);
  snapshot["mode"] = danf::adapt_mode_name(cfg.mode);
  snapshot["n_train"] = cfg.n_train;
  snapshot["rank"] = cfg.rank;
  snapshot["precision"] = opt.flags.precision;

  danf::ExperimentManifest m;
  m.command = "adapt";
  m.seed = cfg.train.seed;
  m.config = snapshot;
  m.config["data"] = opt.data_dir;
  m.config["base_ckpt"] = opt.ckpt;

  if (cfg.mode == danf::AdaptMode::kZeroShot) {
    // no updates happened; the output checkpoint is the input, byte for byte
    fs::copy_file(opt.ckpt, fs::path(opt.out) / "model.ckpt",
                  fs::copy_options::overwrite_existing);
  } else {
    danf::save_checkpoint((fs::path(opt.out) / "model.ckpt").string(),
                          result.params, snapshot.dump());
    if (cfg.mode == danf::AdaptMode::kLora)
      danf::save_adapters((fs::path(opt.out) / "model.lora").string(),
                          *result.adapters, ckpt.content_hash);
    write_text(fs::path(opt.out) / "training_log.csv",
               danf::train_log_to_csv(result.train_result.log));
    m.artifacts.push_back({"training_log.csv", ""});
    if (cfg.mode == danf::AdaptMode::kLora)
      m.artifacts.push_back({"model.lora", ""});
  }
  write_text(fs::path(opt.out) / "metrics.csv",
             danf::metrics_to_csv(result.report));

  danf::AdaptTableRow row;
  row.mode = danf::adapt_mode_name(cfg.mode);
  row.n_params = result.trainable_count;
  row.n_train = cfg.mode == danf::AdaptMode::kZeroShot ? 0 : cfg.n_train;
  row.t60_err_pct = result.report.t60_err_pct;
  row.c50_err_db = result.report.c50_err_db;
  row.edt_err_ms = result.report.edt_err_ms;
  row.doa_err_deg = result.report.doa_err_deg;
  write_text(fs::path(opt.out) / "adapt_row.csv",
             danf::adapt_table_to_csv({row}));

  m.summary = danf::metrics_summary_json(result.report);
  m.summary["mode"] = row.mode;
  m.summary["n_train"] = row.n_train;
  m.summary["trainable_params"] = result.trainable_count;
  m.summary["early_stopped"] = result.train_result.early_stopped;
  m.summary["best_step"] = result.train_result.best_step;
  m.artifacts.push_back({"model.ckpt", ""});
  m.artifacts.push_back({"metrics.csv", ""});
  m.artifacts.push_back({"adapt_row.csv", ""});
  danf::write_experiment(opt.out, m);

  std::cout << row.mode << " n_train=" << row.n_train << " N_p="
            << row.n_params << " | T60 " << row.t60_err_pct << " % | C50 "
            << row.c50_err_db << " dB | EDT " << row.edt_err_ms
            << " ms | DoA " << row.doa_err_deg << " deg\n";
  return 0;
}

int run_adapt(const AdaptOptions& opt) {
  return opt.flags.precision == "f64" ? run_adapt_typed<double>(opt)
                                      : run_adapt_typed<float>(opt);
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepOptions {
  std::string data_dir, out;
  int gamma_lo = -4, gamma_hi = 4;
  TrainFlags flags;
  const CLI::App* cmd = nullptr;
};

template <typename T>
int run_sweep_typed(const SweepOptions& opt) {
  danf::TrainConfig base = opt.flags.resolve(opt.cmd);
  danf::DirLock lock(opt.out);
  danf::Dataset<T> ds = danf::load_dataset<T>(opt.data_dir);
  danf::ArchDescriptor arch = opt.flags.resolve_arch(ds.room);

  std::vector<double> grid = danf::lambda_grid(opt.gamma_lo, opt.gamma_hi);
  std::vector<danf::LambdaCurveRow> rows;
  danf::ExperimentManifest m;
  m.command = "sweep";
  m.seed = base.seed;

  for (double lambda : grid) {
    danf::TrainConfig cfg = base;
    cfg.lambda = lambda;
    danf::TrainResult<T> r = danf::train(ds, arch, cfg);
    if (r.aborted_non_finite) {
      std::cerr << "lambda " << lambda << ": non-finite loss\n";
      return 3;
    }
    danf::MetricsReport rep =
        danf::evaluate_model(r.params, nullptr, ds, danf::Split::kTest);
    char tag[40];
    std::snprintf(tag, sizeof(tag), "lambda_%g", lambda);
    fs::create_directories(fs::path(opt.out) / tag);
    json snapshot = danf::train_config_to_json(cfg);
    snapshot["arch"] = danf::arch_to_json(arch);
    danf::save_checkpoint((fs::path(opt.out) / tag / "model.ckpt").string(),
                          r.params, snapshot.dump());
    write_text(fs::path(opt.out) / tag / "metrics.csv",
               danf::metrics_to_csv(rep));
    m.artifacts.push_back({std::string(tag) + "/model.ckpt", ""});
    m.artifacts.push_back({std::string(tag) + "/metrics.csv", ""});
    rows.push_back({lambda, rep.t60_err_pct, rep.c50_err_db, rep.edt_err_ms,
                    rep.doa_err_deg});
    std::cout << "lambda " << lambda << ": DoA " << rep.doa_err_deg
              << " deg, T60 " << rep.t60_err_pct << " %\n";
  }

  write_text(fs::path(opt.out) / "lambda_curve.csv",
             danf::lambda_curve_to_csv(rows));
  m.config = danf::train_config_to_json(base);
  m.config["data"] = opt.data_dir;
  m.config["gamma_lo"] = opt.gamma_lo;
  m.config["gamma_hi"] = opt.gamma_hi;
  m.artifacts.push_back({"lambda_curve.csv", ""});
  danf::write_experiment(opt.out, m);
  return 0;
}

int run_sweep(const SweepOptions& opt) {
  return opt.flags.precision == "f64" ? run_sweep_typed<double>(opt)
                                      : run_sweep_typed<float>(opt);
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportOptions {
  std::vector<std::string> experiment_dirs;
  std::string out;
  bool svg = false;
};

int run_report(const ReportOptions& opt) {
  if (opt.experiment_dirs.empty())
    throw danf::InvalidConfig("report: need at least one experiment dir");
  danf::DirLock lock(opt.out);

  std::vector<danf::LambdaCurveRow> curve;
  std::vector<danf::AdaptTableRow> table;
  std::vector<std::string> artifacts;

  for (const std::string& dir : opt.experiment_dirs) {
    danf::ExperimentManifest m = danf::load_experiment(dir);
    if (m.command == "sweep") {
      for (const auto& a : m.artifacts) {
        if (a.path.find("metrics.csv") == std::string::npos) continue;
        std::string tag = fs::path(a.path).parent_path().filename().string();
        double lambda = std::stod(tag.substr(tag.find('_') + 1));
        danf::MetricsReport rep =
            danf::metrics_from_csv(read_text(fs::path(dir) / a.path));
        curve.push_back({lambda, rep.t60_err_pct, rep.c50_err_db,
                         rep.edt_err_ms, rep.doa_err_deg});
      }
    } else if (m.command == "eval" && m.config.contains("lambda")) {
      curve.push_back({m.config["lambda"].get<double>(),
                       m.summary.value("t60_err_pct", 0.0),
                       m.summary.value("c50_err_db", 0.0),
                       m.summary.value("edt_err_ms", 0.0),
                       m.summary.value("doa_err_deg", 0.0)});
    } else if (m.command == "adapt") {
      table.push_back({m.summary.value("mode", std::string("?")),
                       m.summary.value("trainable_params", std::size_t{0}),
                       m.summary.value("n_train", 0),
                       m.summary.value("t60_err_pct", 0.0),
                       m.summary.value("c50_err_db", 0.0),
                       m.summary.value("edt_err_ms", 0.0),
                       m.summary.value("doa_err_deg", 0.0)});
    }
    // per-scene scatter pairs from any experiment carrying metrics.csv
    for (const auto& a : m.artifacts) {
      if (fs::path(a.path).filename() != "metrics.csv") continue;
      danf::MetricsReport rep =
          danf::metrics_from_csv(read_text(fs::path(dir) / a.path));
      auto pts = danf::scatter_points(rep);
      if (pts.empty()) continue;
      std::string stem =
          m.id.empty() ? fs::path(dir).filename().string() : m.id;
      if (m.command == "sweep")
        stem += "_" + fs::path(a.path).parent_path().filename().string();
      std::string rel = "scatter_" + stem + ".csv";
      write_text(fs::path(opt.out) / rel, danf::scatter_to_csv(pts));
      artifacts.push_back(rel);
      if (opt.svg) {
        std::string svg_rel = rel.substr(0, rel.size() - 4) + ".svg";
        write_text(fs::path(opt.out) / svg_rel, danf::scatter_to_svg(pts));
        artifacts.push_back(svg_rel);
      }
    }
  }

  if (!curve.empty()) {
    write_text(fs::path(opt.out) / "lambda_curve.csv",
               danf::lambda_curve_to_csv(curve));
    artifacts.push_back("lambda_curve.csv");
  }
  if (!table.empty()) {
    write_text(fs::path(opt.out) / "adaptation_table.csv",
               danf::adapt_table_to_csv(table));
    artifacts.push_back("adaptation_table.csv");
  }

  danf::ExperimentManifest m;
  m.command = "report";
  m.config = {{"experiments", opt.experiment_dirs}, {"svg", opt.svg}};
  m.summary = {{"lambda_rows", curve.size()},
               {"adaptation_rows", table.size()},
               {"files", artifacts.size()}};
  for (const auto& a : artifacts) m.artifacts.push_back({a, ""});
  danf::write_experiment(opt.out, m);

  std::cout << "report: " << curve.size() << " lambda rows, " << table.size()
            << " adaptation rows, " << artifacts.size() << " files in "
            << opt.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int run_dump(const std::string& ckpt_path) {
  auto ckpt = danf::load_checkpoint<float>(ckpt_path);
  std::cout << danf::descriptor_to_string(ckpt.params.arch);
  std::cout << "param_count       " << danf::param_count(ckpt.params) << "\n";
  std::cout << "content_hash      " << danf::hash_hex(ckpt.content_hash)
            << "\n";
  if (!ckpt.config_snapshot.empty() && ckpt.config_snapshot != "{}")
    std::cout << "config_snapshot   " << ckpt.config_snapshot << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "direction-aware neural field for Ambisonics room impulse responses"};
  app.require_subcommand(1);

  GenOptions gen;
  CLI::App* cmd_gen = app.add_subcommand("gen", "render a synthetic dataset");
  cmd_gen->add_option("--room", gen.room_path, "room spec file")->required();
  cmd_gen->add_option("--pairs", gen.cfg.n_pairs, "source-listener pairs");
  cmd_gen->add_option("--seed", gen.cfg.seed, "dataset seed");
  cmd_gen->add_option("--height", gen.cfg.listener_height, "grid height [m]");
  cmd_gen->add_option("--pitch", gen.cfg.grid_pitch, "grid pitch [m]");
  cmd_gen->add_option("--train-fraction", gen.cfg.train_fraction,
                      "train split fraction");
  cmd_gen->add_option("--out", gen.out, "output directory")->required();

  TrainOptions train;
  CLI::App* cmd_train = app.add_subcommand(
      "train",
      "train a model (several --data directories pretrain across rooms)");
  cmd_train->add_option("--data", train.data_dirs, "dataset directory")
      ->required();
  cmd_train->add_option("--init", train.init_ckpt,
                        "checkpoint to warm-start from");
  cmd_train->add_option("--out", train.out, "output directory")->required();
  train.flags.attach(cmd_train);
  train.cmd = cmd_train;

  EvalOptions eval;
  CLI::App* cmd_eval =
      app.add_subcommand("eval", "evaluate a checkpoint against a dataset");
  cmd_eval->add_option("--ckpt", eval.ckpt, "model checkpoint");
  cmd_eval->add_option("--data", eval.data_dir, "dataset directory")
      ->required();
  cmd_eval->add_option("--split", eval.split, "train | test | holdout");
  cmd_eval->add_flag("--oracle", eval.oracle,
                     "evaluate the ground truth against itself");
  cmd_eval->add_option("--precision", eval.precision, "f32 or f64")
      ->check(CLI::IsMember({"f32", "f64"}));
  cmd_eval->add_option("--out", eval.out, "output directory")->required();

  AdaptOptions adapt;
  CLI::App* cmd_adapt =
      app.add_subcommand("adapt", "adapt a pretrained model to a new room");
  cmd_adapt->add_option("--ckpt", adapt.ckpt, "pretrained checkpoint")
      ->required();
  cmd_adapt->add_option("--data", adapt.data_dir, "new room dataset")
      ->required();
  cmd_adapt->add_option("--mode", adapt.mode, "zero | cold | warm | lora")
      ->required();
  cmd_adapt->add_option("--rank", adapt.rank, "LoRA rank r");
  cmd_adapt->add_option("--n-train", adapt.n_train,
                        "training scenes drawn from the train split");
  cmd_adapt->add_option("--holdout", adapt.holdout,
                        "holdout scenes for early stopping");
  cmd_adapt->add_option("--patience", adapt.patience,
                        "evals without improvement before stopping");
  cmd_adapt->add_option("--early-stop", adapt.early_stop, "auto | on | off");
  cmd_adapt->add_flag("--lora-exclude-time", adapt.lora_exclude_time,
                      "do not adapt the time-basis net");
  cmd_adapt->add_flag("--lora-include-orient", adapt.lora_include_orient,
                      "also adapt the orientation net");
  cmd_adapt->add_option("--out", adapt.out, "output directory")->required();
  adapt.flags.attach(cmd_adapt);
  adapt.cmd = cmd_adapt;

  SweepOptions sweep;
  CLI::App* cmd_sweep = app.add_subcommand(
      "sweep", "train one model per lambda on the log grid");
  cmd_sweep->add_option("--data", sweep.data_dir, "dataset directory")
      ->required();
  cmd_sweep->add_option("--gamma-lo", sweep.gamma_lo, "lowest 10^gamma");
  cmd_sweep->add_option("--gamma-hi", sweep.gamma_hi, "highest 10^gamma");
  cmd_sweep->add_option("--out", sweep.out, "output directory")->required();
  sweep.flags.attach(cmd_sweep);
  sweep.cmd = cmd_sweep;

  ReportOptions report;
  CLI::App* cmd_report = app.add_subcommand(
      "report", "aggregate experiment directories into tables and plots");
  cmd_report->add_option("--experiment", report.experiment_dirs,
                         "experiment directory (repeatable)");
  cmd_report->add_flag("--svg", report.svg, "also render SVG scatter plots");
  cmd_report->add_option("--out", report.out, "output directory")->required();

  std::string dump_ckpt;
  CLI::App* cmd_dump =
      app.add_subcommand("dump", "print a checkpoint's descriptor");
  cmd_dump->add_option("--ckpt", dump_ckpt, "checkpoint path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cmd_gen->parsed()) return run_gen(gen);
    if (cmd_train->parsed()) return run_train(train);
    if (cmd_eval->parsed()) return run_eval(eval);
    if (cmd_adapt->parsed()) return run_adapt(adapt);
    if (cmd_sweep->parsed()) return run_sweep(sweep);
    if (cmd_report->parsed()) return run_report(report);
    if (cmd_dump->parsed()) return run_dump(dump_ckpt);
  } catch (const danf::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const danf::CompatibilityError& e) {
    std::cerr << "compatibility error: " << e.what() << "\n";
    return 4;
  } catch (const danf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
