// Copyright 2026 The danf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
#pragma once

#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "danf/foa.hpp"

namespace danf {

// Room-acoustics metrics operate on the omnidirectional W channel.
// T60 uses a T20-range fit: least squares on the Schroeder curve between
// -5 and -25 dB, extrapolated to -60 dB.

// Backward-integrated energy decay in dB, normalized to 0 dB at t=0.
template <typename T>
Vec<T> schroeder_decay(const Vec<T>& channel) {
  const Eigen::Index n = channel.size();
  if (n < 1) throw InvalidInput("schroeder_decay: empty channel");
  Vec<T> curve(n);
  double acc = 0.0;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    acc += static_cast<double>(channel[i]) * static_cast<double>(channel[i]);
    curve[i] = static_cast<T>(acc);
  }
  double total = static_cast<double>(curve[0]);
  if (!(total > 0.0)) throw InvalidInput("schroeder_decay: zero-energy channel");
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = static_cast<double>(curve[i]) / total;
    curve[i] = static_cast<T>(v > 0.0 ? 10.0 * std::log10(v)
                                      : -std::numeric_limits<double>::infinity());
  }
  return curve;
}

namespace metrics_detail {

// First (linearly interpolated) time the curve crosses `level` dB.
template <typename T>
double crossing_time(const Vec<T>& curve_db, double level, int sample_rate) {
  for (Eigen::Index i = 0; i < curve_db.size(); ++i) {
    if (static_cast<double>(curve_db[i]) <= level) {
      if (i == 0) return 0.0;
      double a = static_cast<double>(curve_db[i - 1]);
      double b = static_cast<double>(curve_db[i]);
      double frac = std::isfinite(b) ? (a - level) / (a - b) : 1.0;
      return (static_cast<double>(i - 1) + frac) / sample_rate;
    }
  }
  return -1.0;
}

}  // namespace metrics_detail

template <typename T>
double t60(const FoaRir<T>& h) {
  Vec<T> curve = schroeder_decay<T>(Vec<T>(h.samples.row(kW).transpose()));
  // least-squares line over the [-25, -5] dB span
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (Eigen::Index i = 0; i < curve.size(); ++i) {
    double v = static_cast<double>(curve[i]);
    if (v <= -5.0 && v >= -25.0) {
      double t = static_cast<double>(i) / h.sample_rate;
      sx += t;
      sy += v;
      sxx += t * t;
      sxy += t * v;
      ++count;
    }
  }
  bool reached = metrics_detail::crossing_time(curve, -25.0, h.sample_rate) >= 0.0;
  if (!reached || count < 2)
    throw InsufficientDecay("t60: decay never reaches -25 dB");
  double denom = count * sxx - sx * sx;
  if (!(std::abs(denom) > 0)) throw InsufficientDecay("t60: degenerate fit");
  double slope = (count * sxy - sx * sy) / denom;  // dB per second
  if (!(slope < 0)) throw InsufficientDecay("t60: non-decaying fit");
  return -60.0 / slope;
}

template <typename T>
double edt(const FoaRir<T>& h) {
  Vec<T> curve = schroeder_decay<T>(Vec<T>(h.samples.row(kW).transpose()));
  double t10 = metrics_detail::crossing_time(curve, -10.0, h.sample_rate);
  if (t10 < 0.0) throw InsufficientDecay("edt: decay never reaches -10 dB");
  return 6.0 * t10;
}

// Early/late energy ratio in dB with the 50 ms boundary anchored at the
// direct-sound onset (first |sample| above -20 dB of peak). Zero late
// energy yields +infinity, which evaluate_set flags.
template <typename T>
double c50(const FoaRir<T>& h) {
  const auto w = h.samples.row(kW);
  double peak = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    peak = std::max(peak, std::abs(static_cast<double>(w[i])));
  if (!(peak > 0.0)) throw InvalidInput("c50: zero-energy channel");
  double threshold = peak * 0.1;  // -20 dB
  Eigen::Index onset = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (std::abs(static_cast<double>(w[i])) > threshold) {
      onset = i;
      break;
    }
  }
  Eigen::Index boundary = onset + h.sample_rate / 20;  // 50 ms
  double early = 0.0, late = 0.0;
  for (Eigen::Index i = onset; i < w.size(); ++i) {
    double e = static_cast<double>(w[i]) * static_cast<double>(w[i]);
    (i < boundary ? early : late) += e;
  }
  if (!(late > 0.0)) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(early / late);
}

// Absolute circular azimuth difference of the integrated intensity DoAs.
template <typename T>
double doa_error(const FoaRir<T>& h_ref, const FoaRir<T>& h_est,
                 const StftParams& p = {}) {
  Direction<T> a = doa_from_intensity(integrated_intensity(h_ref, p));
  Direction<T> b = doa_from_intensity(integrated_intensity(h_est, p));
  return static_cast<double>(
      circular_azimuth_error(a.azimuth_deg, b.azimuth_deg));
}

struct SceneMetrics {
  int scene_id = 0;
  std::optional<double> t60_ref, t60_est, t60_err_pct;
  std::optional<double> c50_ref, c50_est, c50_err_db;
  std::optional<double> edt_ref, edt_est, edt_err_ms;
  std::optional<double> doa_err_deg;
  std::optional<double> elev_err_deg;  // informational
};

struct MetricsReport {
  std::vector<SceneMetrics> rows;
  double t60_err_pct = 0, c50_err_db = 0, edt_err_ms = 0, doa_err_deg = 0;
  double elev_err_deg = 0;
  int t60_excluded = 0, c50_excluded = 0, edt_excluded = 0, doa_excluded = 0;
};

// Per-scene metric errors between parallel reference and estimate lists.
// A scene that fails one metric is excluded from that metric only.
template <typename T>
MetricsReport evaluate_set(const std::vector<FoaRir<T>>& ref,
                           const std::vector<FoaRir<T>>& est,
                           const StftParams& p = {}) {
  if (ref.size() != est.size())
    throw InvalidInput("evaluate_set: list length mismatch");
  if (ref.empty()) throw InvalidInput("evaluate_set: empty input");

  MetricsReport rep;
  rep.rows.resize(ref.size());
  parallel_for(ref.size(), [&](std::size_t i) {
    SceneMetrics& row = rep.rows[i];
    row.scene_id = static_cast<int>(i);
    try {
      double a = t60(ref[i]), b = t60(est[i]);
      row.t60_ref = a;
      row.t60_est = b;
      row.t60_err_pct = std::abs(a - b) / a * 100.0;
    } catch (const Error&) {
    }
    try {
      double a = c50(ref[i]), b = c50(est[i]);
      row.c50_ref = a;
      row.c50_est = b;
      if (std::isfinite(a) && std::isfinite(b))
        row.c50_err_db = std::abs(a - b);
    } catch (const Error&) {
    }
    try {
      double a = edt(ref[i]), b = edt(est[i]);
      row.edt_ref = a;
      row.edt_est = b;
      row.edt_err_ms = std::abs(a - b) * 1000.0;
    } catch (const Error&) {
    }
    try {
      Direction<T> da = doa_from_intensity(integrated_intensity(ref[i], p));
      Direction<T> db = doa_from_intensity(integrated_intensity(est[i], p));
      row.doa_err_deg = static_cast<double>(
          circular_azimuth_error(da.azimuth_deg, db.azimuth_deg));
      row.elev_err_deg =
          std::abs(static_cast<double>(da.elevation_deg - db.elevation_deg));
    } catch (const Error&) {
    }
  });

  auto aggregate = [&](auto field, int& excluded) {
    double sum = 0.0;
    int n = 0;
    for (const SceneMetrics& row : rep.rows) {
      const std::optional<double>& v = row.*field;
      if (v.has_value()) {
        sum += *v;
        ++n;
      } else {
        ++excluded;
      }
    }
    return n > 0 ? sum / n : 0.0;
  };
  rep.t60_err_pct = aggregate(&SceneMetrics::t60_err_pct, rep.t60_excluded);
  rep.c50_err_db = aggregate(&SceneMetrics::c50_err_db, rep.c50_excluded);
  rep.edt_err_ms = aggregate(&SceneMetrics::edt_err_ms, rep.edt_excluded);
  rep.doa_err_deg = aggregate(&SceneMetrics::doa_err_deg, rep.doa_excluded);
  int ignored = 0;
  rep.elev_err_deg = aggregate(&SceneMetrics::elev_err_deg, ignored);
  return rep;
}

namespace metrics_detail {

inline std::string cell(const std::optional<double>& v) {
  if (!v.has_value()) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", *v);
  return buf;
}

}  // namespace metrics_detail

// One row per scene plus a final aggregate row.
inline std::string metrics_to_csv(const MetricsReport& rep) {
  std::ostringstream out;
  out << "# t60_method=T20_fit_x3 doa=azimuth_circular elev=informational\n";
  out << "scene_id,t60_ref,t60_est,t60_err_pct,c50_ref,c50_est,c50_err_db,"
         "edt_ref,edt_est,edt_err_ms,doa_err_deg,elev_err_deg\n";
  using metrics_detail::cell;
  for (const SceneMetrics& r : rep.rows) {
    out << r.scene_id << ',' << cell(r.t60_ref) << ',' << cell(r.t60_est)
        << ',' << cell(r.t60_err_pct) << ',' << cell(r.c50_ref) << ','
        << cell(r.c50_est) << ',' << cell(r.c50_err_db) << ','
        << cell(r.edt_ref) << ',' << cell(r.edt_est) << ','
        << cell(r.edt_err_ms) << ',' << cell(r.doa_err_deg) << ','
        << cell(r.elev_err_deg) << '\n';
  }
  out << "aggregate,,," << cell(rep.t60_err_pct) << ",,,"
      << cell(rep.c50_err_db) << ",,," << cell(rep.edt_err_ms) << ','
      << cell(rep.doa_err_deg) << ',' << cell(rep.elev_err_deg) << '\n';
  return out.str();
}

}  // namespace danf
