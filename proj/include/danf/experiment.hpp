// Copyright 2026 The danf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
#pragma once

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "danf/metrics.hpp"
#include "danf/training.hpp"

namespace danf {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kExperimentSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Config (de)serialization shared by the CLI and tests.
// ---------------------------------------------------------------------------

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
  return {
      {"lambda", c.lambda},
      {"steps", c.steps},
      {"batch_scenes", c.batch_scenes},
      {"time_subsample", c.time_subsample},
      {"full_query_interval", c.full_query_interval},
      {"learning_rate", c.learning_rate},
      {"seed", c.seed},
      {"eval_interval", c.eval_interval},
      {"log_interval", c.log_interval},
      {"stft_w_only", c.stft_w_only},
      {"stft_window", c.stft.window_size},
      {"stft_hop", c.stft.hop},
  };
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.lambda = j.value("lambda", c.lambda);
  c.steps = j.value("steps", c.steps);
  c.batch_scenes = j.value("batch_scenes", c.batch_scenes);
  c.time_subsample = j.value("time_subsample", c.time_subsample);
  c.full_query_interval = j.value("full_query_interval", c.full_query_interval);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.seed = j.value("seed", c.seed);
  c.eval_interval = j.value("eval_interval", c.eval_interval);
  c.log_interval = j.value("log_interval", c.log_interval);
  c.stft_w_only = j.value("stft_w_only", c.stft_w_only);
  c.stft.window_size = j.value("stft_window", c.stft.window_size);
  c.stft.hop = j.value("stft_hop", c.stft.hop);
  c.validate();
  return c;
}

inline nlohmann::json arch_to_json(const ArchDescriptor& a) {
  return {
      {"bounce_count", a.bounce_count},
      {"feature_dim", a.feature_dim},
      {"enc_levels", a.enc_levels},
      {"orient_dim", a.orient_dim},
      {"rir_length", a.rir_length},
      {"channels", a.channels},
      {"bounce_hidden", a.bounce_hidden},
      {"time_hidden", a.time_hidden},
      {"decoder_hidden", a.decoder_hidden},
  };
}

inline ArchDescriptor arch_from_json(const nlohmann::json& j) {
  ArchDescriptor a;
  a.bounce_count = j.value("bounce_count", a.bounce_count);
  a.feature_dim = j.value("feature_dim", a.feature_dim);
  a.enc_levels = j.value("enc_levels", a.enc_levels);
  a.orient_dim = j.value("orient_dim", a.orient_dim);
  a.rir_length = j.value("rir_length", a.rir_length);
  a.channels = j.value("channels", a.channels);
  a.bounce_hidden = j.value("bounce_hidden", a.bounce_hidden);
  a.time_hidden = j.value("time_hidden", a.time_hidden);
  a.decoder_hidden = j.value("decoder_hidden", a.decoder_hidden);
  a.validate();
  return a;
}

// ---------------------------------------------------------------------------
// Output-directory lock: one run owns a directory at a time. flock releases
// on process exit, so stale locks cannot wedge reruns.
// ---------------------------------------------------------------------------

class DirLock {
 public:
  explicit DirLock(const std::string& dir) {
    std::filesystem::create_directories(dir);
    path_ = (std::filesystem::path(dir) / ".danf.lock").string();
    fd_ = ::open(path_.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw InvalidConfig("cannot create lock file in " + dir);
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      fd_ = -1;
      throw InvalidConfig("output directory is locked by another run: " + dir);
    }
  }
  ~DirLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  int fd_ = -1;
  std::string path_;
};

// ---------------------------------------------------------------------------
// Experiment manifest: what a run produced, with content hashes that must
// verify whenever the manifest is read back.
// ---------------------------------------------------------------------------

struct ArtifactRef {
  std::string path;  // relative to the experiment directory
  std::string fnv64;
};

struct ExperimentManifest {
  std::string id;
  std::string command;  // gen | train | eval | adapt | sweep
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 0;
  nlohmann::json config;   // command-specific parameters
  nlohmann::json summary;  // aggregate metrics and counters
  std::vector<ArtifactRef> artifacts;
};

inline void write_experiment(const std::string& dir, ExperimentManifest m) {
  namespace fs = std::filesystem;
  for (auto& a : m.artifacts)
    a.fnv64 = hash_hex(hash_file((fs::path(dir) / a.path).string()));
  if (m.id.empty())
    m.id = m.command + "-" +
           hash_hex(fnv1a(m.config.dump() + std::to_string(m.seed)));
  nlohmann::json j;
  j["schema_version"] = kExperimentSchemaVersion;
  j["id"] = m.id;
  j["command"] = m.command;
  j["tool_version"] = m.tool_version;
  j["seed"] = m.seed;
  j["config"] = m.config;
  j["summary"] = m.summary;
  nlohmann::json arts = nlohmann::json::array();
  for (const auto& a : m.artifacts)
    arts.push_back({{"path", a.path}, {"fnv64", a.fnv64}});
  j["artifacts"] = arts;
  std::ofstream f(fs::path(dir) / "experiment.json", std::ios::trunc);
  if (!f) throw InvalidInput("cannot write experiment manifest in " + dir);
  f << j.dump(2) << "\n";
}

inline ExperimentManifest load_experiment(const std::string& dir,
                                          bool verify = true) {
  namespace fs = std::filesystem;
  std::ifstream f(fs::path(dir) / "experiment.json");
  if (!f) throw InvalidInput("no experiment.json in " + dir);
  nlohmann::json j = nlohmann::json::parse(f);
  if (j.value("schema_version", -1) != kExperimentSchemaVersion)
    throw InvalidInput("unsupported experiment schema in " + dir);
  ExperimentManifest m;
  m.id = j.value("id", "");
  m.command = j.value("command", "");
  m.tool_version = j.value("tool_version", "");
  m.seed = j.value("seed", std::uint64_t{0});
  m.config = j.value("config", nlohmann::json::object());
  m.summary = j.value("summary", nlohmann::json::object());
  for (const auto& a : j.value("artifacts", nlohmann::json::array())) {
    ArtifactRef ref{a.at("path").get<std::string>(),
                    a.at("fnv64").get<std::string>()};
    if (verify) {
      std::string full = (fs::path(dir) / ref.path).string();
      if (hash_hex(hash_file(full)) != ref.fnv64)
        throw InvalidInput("artifact hash mismatch for " + full);
    }
    m.artifacts.push_back(std::move(ref));
  }
  return m;
}

inline nlohmann::json metrics_summary_json(const MetricsReport& rep) {
  return {
      {"t60_err_pct", rep.t60_err_pct},
      {"c50_err_db", rep.c50_err_db},
      {"edt_err_ms", rep.edt_err_ms},
      {"doa_err_deg", rep.doa_err_deg},
      {"elev_err_deg", rep.elev_err_deg},
      {"scenes", rep.rows.size()},
      {"excluded",
       {{"t60", rep.t60_excluded},
        {"c50", rep.c50_excluded},
        {"edt", rep.edt_excluded},
        {"doa", rep.doa_excluded}}},
  };
}

// ---------------------------------------------------------------------------
// Report aggregation: lambda curves, per-scene scatter pairs, adaptation
// comparison table, optional static SVG scatter plots.
// ---------------------------------------------------------------------------

struct MetricScatterPoint {
  std::string metric;
  int scene_id;
  double oracle;
  double estimate;
};

// Per-scene (oracle, estimate) pairs for each metric from a metrics report.
inline std::vector<MetricScatterPoint> scatter_points(
    const MetricsReport& rep) {
  std::vector<MetricScatterPoint> pts;
  for (const SceneMetrics& r : rep.rows) {
    if (r.t60_ref && r.t60_est)
      pts.push_back({"t60", r.scene_id, *r.t60_ref, *r.t60_est});
    if (r.c50_ref && r.c50_est && std::isfinite(*r.c50_ref) &&
        std::isfinite(*r.c50_est))
      pts.push_back({"c50", r.scene_id, *r.c50_ref, *r.c50_est});
    if (r.edt_ref && r.edt_est)
      pts.push_back({"edt", r.scene_id, *r.edt_ref, *r.edt_est});
  }
  return pts;
}

// One row per (metric, scene) pair with min-max normalization per metric
// over the union of both columns.
inline std::string scatter_to_csv(const std::vector<MetricScatterPoint>& pts) {
  std::map<std::string, std::pair<double, double>> range;
  for (const auto& p : pts) {
    auto it = range.find(p.metric);
    if (it == range.end()) {
      range[p.metric] = {std::min(p.oracle, p.estimate),
                         std::max(p.oracle, p.estimate)};
    } else {
      it->second.first = std::min({it->second.first, p.oracle, p.estimate});
      it->second.second = std::max({it->second.second, p.oracle, p.estimate});
    }
  }
  std::ostringstream out;
  out << "metric,oracle_value,estimated_value,oracle_norm,estimated_norm\n";
  out.precision(10);
  for (const auto& p : pts) {
    auto [lo, hi] = range[p.metric];
    double span = hi - lo;
    double on = span > 0 ? (p.oracle - lo) / span : 0.5;
    double en = span > 0 ? (p.estimate - lo) / span : 0.5;
    out << p.metric << ',' << p.oracle << ',' << p.estimate << ',' << on
        << ',' << en << '\n';
  }
  return out.str();
}

struct LambdaCurveRow {
  double lambda = 0;
  double t60_err_pct = 0, c50_err_db = 0, edt_err_ms = 0, doa_err_deg = 0;
};

// One row per lambda; the lambda = 0 baseline row comes first when present.
inline std::string lambda_curve_to_csv(std::vector<LambdaCurveRow> rows) {
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
  std::ostringstream out;
  out << "lambda,t60_err_pct,c50_err_db,edt_err_ms,doa_err_deg,baseline\n";
  out.precision(10);
  for (const auto& r : rows)
    out << r.lambda << ',' << r.t60_err_pct << ',' << r.c50_err_db << ','
        << r.edt_err_ms << ',' << r.doa_err_deg << ','
        << (r.lambda == 0 ? 1 : 0) << '\n';
  return out.str();
}

struct AdaptTableRow {
  std::string mode;
  std::size_t n_params = 0;
  int n_train = 0;
  double t60_err_pct = 0, c50_err_db = 0, edt_err_ms = 0, doa_err_deg = 0;
};

inline std::string adapt_table_to_csv(std::vector<AdaptTableRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.n_train, a.mode) < std::tie(b.n_train, b.mode);
  });
  std::ostringstream out;
  out << "mode,n_params,n_train,t60_err_pct,c50_err_db,edt_err_ms,doa_err_deg\n";
  out.precision(10);
  for (const auto& r : rows)
    out << r.mode << ',' << r.n_params << ',' << r.n_train << ','
        << r.t60_err_pct << ',' << r.c50_err_db << ',' << r.edt_err_ms << ','
        << r.doa_err_deg << '\n';
  return out.str();
}

// Minimal static scatter rendering, one panel per metric.
inline std::string scatter_to_svg(const std::vector<MetricScatterPoint>& pts) {
  std::vector<std::string> metrics;
  for (const auto& p : pts)
    if (std::find(metrics.begin(), metrics.end(), p.metric) == metrics.end())
      metrics.push_back(p.metric);
  const int panel = 220, pad = 30;
  int width = pad + static_cast<int>(metrics.size()) * (panel + pad);
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << (panel + 2 * pad) << "\">\n";
  std::map<std::string, std::pair<double, double>> range;
  for (const auto& p : pts) {
    auto it = range.find(p.metric);
    if (it == range.end())
      range[p.metric] = {std::min(p.oracle, p.estimate),
                         std::max(p.oracle, p.estimate)};
    else {
      it->second.first = std::min({it->second.first, p.oracle, p.estimate});
      it->second.second = std::max({it->second.second, p.oracle, p.estimate});
    }
  }
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    int x0 = pad + static_cast<int>(m) * (panel + pad);
    out << "<rect x=\"" << x0 << "\" y=\"" << pad << "\" width=\"" << panel
        << "\" height=\"" << panel
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << (x0 + panel / 2) << "\" y=\"" << (pad - 8)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << metrics[m]
        << "</text>\n";
    out << "<line x1=\"" << x0 << "\" y1=\"" << (pad + panel) << "\" x2=\""
        << (x0 + panel) << "\" y2=\"" << pad
        << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4\"/>\n";
    auto [lo, hi] = range[metrics[m]];
    double span = hi > lo ? hi - lo : 1.0;
    for (const auto& p : pts) {
      if (p.metric != metrics[m]) continue;
      double xn = (p.oracle - lo) / span;
      double yn = (p.estimate - lo) / span;
      out << "<circle cx=\"" << (x0 + xn * panel) << "\" cy=\""
          << (pad + (1.0 - yn) * panel)
          << "\" r=\"2.5\" fill=\"steelblue\" fill-opacity=\"0.6\"/>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

// Reads rows of our metrics CSV back (comment lines skipped).
inline MetricsReport metrics_from_csv(const std::string& csv) {
  MetricsReport rep;
  std::istringstream in(csv);
  std::string line;
  auto parse_cell = [](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("scene_id", 0) == 0)
      continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    cells.resize(12);
    if (cells[0] == "aggregate") {
      rep.t60_err_pct = parse_cell(cells[3]).value_or(0);
      rep.c50_err_db = parse_cell(cells[6]).value_or(0);
      rep.edt_err_ms = parse_cell(cells[9]).value_or(0);
      rep.doa_err_deg = parse_cell(cells[10]).value_or(0);
      rep.elev_err_deg = parse_cell(cells[11]).value_or(0);
      continue;
    }
    SceneMetrics row;
    row.scene_id = std::stoi(cells[0]);
    row.t60_ref = parse_cell(cells[1]);
    row.t60_est = parse_cell(cells[2]);
    row.t60_err_pct = parse_cell(cells[3]);
    row.c50_ref = parse_cell(cells[4]);
    row.c50_est = parse_cell(cells[5]);
    row.c50_err_db = parse_cell(cells[6]);
    row.edt_ref = parse_cell(cells[7]);
    row.edt_est = parse_cell(cells[8]);
    row.edt_err_ms = parse_cell(cells[9]);
    row.doa_err_deg = parse_cell(cells[10]);
    row.elev_err_deg = parse_cell(cells[11]);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace danf
