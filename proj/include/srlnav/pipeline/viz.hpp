#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "srlnav/eval/chart.hpp"
#include "srlnav/eval/pca.hpp"
#include "srlnav/pipeline/stages.hpp"

namespace srlnav::pipeline {

enum class XAxis { episodes, steps };

/// Config stored in an upstream manifest; lets viz rebuild encoders and worlds without --config.
inline ExperimentConfig config_from_manifest(const json& manifest, const fs::path& where) {
  if (!manifest.contains("config")) throw UsageError(where.string() + " carries no config");
  return parse_config(manifest.at("config"));
}

inline std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path, std::string* header = nullptr) {
  std::istringstream is(read_text(require_file(path)));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (first) {
      first = false;
      if (header) *header = line;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

/// CSV path paired with an SVG; creates the directory both live in.
inline fs::path csv_beside(const fs::path& svg) {
  if (svg.has_parent_path()) ensure_dir(svg.parent_path());
  auto p = svg;
  return p.replace_extension(".csv");
}

// ---------------------------------------------------------------------------

/// Learned states of a dataset projected on their two leading principal axes,
/// colored by the true x coordinate.
inline void viz_pca(const fs::path& srl_dir, const fs::path& data, const fs::path& out_svg,
                    std::size_t max_points = 2000) {
  const auto manifest = read_manifest(srl_dir / kManifestName);
  const auto cfg = config_from_manifest(manifest, srl_dir);
  const auto encoder = load_encoder(cfg, srl_dir / "encoder.ckpt");
  const auto ds = srl::load_dataset(require_file(data));
  if (ds.size() < 3) throw UsageError("dataset " + data.string() + " has fewer than 3 samples");
  if (ds.poses.size() != ds.size()) throw UsageError("dataset " + data.string() + " has no pose side channel");

  std::vector<sim::Observation> obs;
  obs.reserve(ds.size());
  for (const auto& s : ds.samples) obs.push_back(s.obs);
  const auto enc = encoder.encode_batch(obs);
  const auto proj = eval::pca_project(enc, ds.size(), encoder.state_dim());

  auto os = open_out(csv_beside(out_svg));
  os << "pc1,pc2,x_true,y_true\n";
  os.precision(17);
  for (std::size_t i = 0; i < ds.size(); ++i)
    os << proj.scores[2 * i] << ',' << proj.scores[2 * i + 1] << ',' << ds.poses[i].pose.x << ','
       << ds.poses[i].pose.y << '\n';
  os.close();

  double lo = ds.poses[0].pose.x, hi = lo;
  for (const auto& p : ds.poses) lo = std::min(lo, p.pose.x), hi = std::max(hi, p.pose.x);
  const std::size_t stride = std::max<std::size_t>(1, (ds.size() + max_points - 1) / max_points);
  eval::Series s;
  s.name = to_string(cfg.method) + " states";
  for (std::size_t i = 0; i < ds.size(); i += stride) {
    s.x.push_back(proj.scores[2 * i]);
    s.y.push_back(proj.scores[2 * i + 1]);
    s.color_value.push_back(hi > lo ? (ds.poses[i].pose.x - lo) / (hi - lo) : 0.5);
  }
  char title[96];
  std::snprintf(title, sizeof title, "Learned states, PCA (%.0f%% + %.0f%% of variance)", 100 * proj.explained[0],
                100 * proj.explained[1]);
  eval::emit_chart({s}, {eval::ChartKind::scatter, title, "PC 1", "PC 2 (color: true x)"}, out_svg);
}

// ---------------------------------------------------------------------------

struct SuccessCurve {
  std::string name;
  std::vector<double> episode, steps, mean, low, high;
};

/// Trailing success ratio per episode, averaged over the seeds of one train-rl directory.
inline SuccessCurve success_curve(const fs::path& rl_dir, std::size_t window = 100) {
  const auto manifest = read_manifest(rl_dir / kManifestName);
  SuccessCurve c;
  c.name = manifest.at("config").value("method", std::string{"run"});
  std::vector<std::vector<double>> ratio, cum_steps;
  for (const auto& sj : manifest.at("seeds")) {
    const auto rows = read_csv_rows(seed_dir(rl_dir, sj.get<std::uint64_t>()) / "training_log.csv");
    std::vector<double> r, st;
    std::size_t hits = 0, total = 0;
    std::vector<int> success;
    for (const auto& row : rows) {
      if (row.size() < 4) throw std::runtime_error("malformed training log row in " + rl_dir.string());
      success.push_back(std::stoi(row[3]));
      hits += static_cast<std::size_t>(success.back());
      if (success.size() > window) hits -= static_cast<std::size_t>(success[success.size() - window - 1]);
      total += std::stoul(row[2]);
      r.push_back(static_cast<double>(hits) / static_cast<double>(std::min(success.size(), window)));
      st.push_back(static_cast<double>(total));
    }
    ratio.push_back(std::move(r));
    cum_steps.push_back(std::move(st));
  }
  std::size_t n = ratio.empty() ? 0 : ratio[0].size();
  for (const auto& r : ratio) n = std::min(n, r.size());
  for (std::size_t e = 0; e < n; ++e) {
    double sum = 0, lo = 1, hi = 0, steps = 0;
    for (std::size_t k = 0; k < ratio.size(); ++k) {
      sum += ratio[k][e];
      lo = std::min(lo, ratio[k][e]);
      hi = std::max(hi, ratio[k][e]);
      steps += cum_steps[k][e];
    }
    const double m = static_cast<double>(ratio.size());
    c.episode.push_back(static_cast<double>(e + 1));
    c.steps.push_back(steps / m);
    c.mean.push_back(sum / m);
    c.low.push_back(lo);
    c.high.push_back(hi);
  }
  return c;
}

inline void viz_success(const std::vector<fs::path>& rl_dirs, const fs::path& out_svg, XAxis axis) {
  std::vector<SuccessCurve> curves;
  std::map<std::string, int> used;
  for (const auto& d : rl_dirs) {
    curves.push_back(success_curve(d));
    if (used[curves.back().name]++) curves.back().name += " (" + d.filename().string() + ")";
  }
  auto os = open_out(csv_beside(out_svg));
  os << "series,episode,steps,mean,low,high\n";
  os.precision(17);
  std::vector<eval::Series> series;
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.episode.size(); ++i)
      os << c.name << ',' << c.episode[i] << ',' << c.steps[i] << ',' << c.mean[i] << ',' << c.low[i] << ','
         << c.high[i] << '\n';
    series.push_back({c.name, axis == XAxis::episodes ? c.episode : c.steps, c.mean, c.low, c.high, {}});
  }
  os.close();
  eval::emit_chart(series,
                   {eval::ChartKind::line, "Training success ratio (trailing 100 episodes)",
                    axis == XAxis::episodes ? "episode" : "environment steps", "success ratio"},
                   out_svg);
}

// ---------------------------------------------------------------------------

/// Paths of the recorded evaluation episodes of the first seed, over the arena outline.
inline void viz_traj(const fs::path& eval_dir, const fs::path& out_svg) {
  const auto manifest = read_manifest(eval_dir / kManifestName);
  const auto cfg = config_from_manifest(manifest, eval_dir);
  if (manifest.at("seeds").empty()) throw UsageError(eval_dir.string() + " holds no evaluated seeds");
  const auto s = manifest.at("seeds")[0].get<std::uint64_t>();
  const auto rows = read_csv_rows(eval_dir / ("trajectories_seed_" + std::to_string(s) + ".csv"));
  const auto world = make_world(cfg);

  std::vector<eval::Series> series;
  const double ex = world.grid().extent_x(), ey = world.grid().extent_y();
  series.push_back({"arena", {0, ex, ex, 0, 0}, {0, 0, ey, ey, 0}, {}, {}, {}});
  auto os = open_out(csv_beside(out_svg));
  os << "episode,t,x,y,terminal_kind\n";
  std::string current;
  for (const auto& row : rows) {
    if (row.size() < 9) throw std::runtime_error("malformed trajectory row in " + eval_dir.string());
    if (row[0] != current) {
      current = row[0];
      series.push_back({"episode " + current, {}, {}, {}, {}, {}});
    }
    series.back().x.push_back(std::stod(row[2]));
    series.back().y.push_back(std::stod(row[3]));
    if (row[8] != "none") series.back().name = "episode " + current + " (" + row[8] + ")";
    os << row[0] << ',' << row[1] << ',' << row[2] << ',' << row[3] << ',' << row[8] << '\n';
  }
  os.close();
  eval::emit_chart(series, {eval::ChartKind::line, "Evaluation trajectories, seed " + std::to_string(s), "x (m)",
                            "y (m)", 560, 480},
                   out_svg);
}

}  // namespace srlnav::pipeline
