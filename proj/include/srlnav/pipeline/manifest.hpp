#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "srlnav/pipeline/config.hpp"

namespace srlnav::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kManifestName = "manifest.json";

/// Manifest of a single-file artifact such as a dataset: `<file>.manifest.json`.
inline fs::path sidecar_manifest(const fs::path& file) { return fs::path(file.string() + ".manifest.json"); }

inline std::string file_digest(const fs::path& path) { return hex64(fnv1a(read_text(path))); }

/// Provenance record written next to every stage output. Paths are stored relative to
/// the manifest so a directory can be moved without invalidating it.
struct Manifest {
  std::string stage;
  std::string config_hash;
  json config;
  json seeds = json::array();
  json inputs = json::array();
  json outputs = json::array();
  json extra = json::object();

  void add_input(const std::string& role, const fs::path& path, const std::string& upstream_hash) {
    inputs.push_back({{"role", role}, {"file", path.filename().string()}, {"fnv1a", file_digest(path)},
                      {"config_hash", upstream_hash}});
  }

  void add_output(const fs::path& path, const fs::path& base) {
    outputs.push_back({{"file", fs::relative(path, base).generic_string()}, {"fnv1a", file_digest(path)}});
  }

  json to_json() const {
    return {{"stage", stage}, {"config_hash", config_hash}, {"config", config}, {"seeds", seeds},
            {"inputs", inputs}, {"outputs", outputs}, {"extra", extra}};
  }
};

inline Manifest make_manifest(const std::string& stage, const ExperimentConfig& cfg) {
  Manifest m;
  m.stage = stage;
  m.config_hash = config_hash(cfg);
  m.config = to_json(cfg, false);
  return m;
}

inline void write_manifest(const fs::path& path, const Manifest& m) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << m.to_json().dump(2) << '\n';
}

inline json read_manifest(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("missing upstream manifest: expected " + path.string());
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

/// Refuses an upstream artifact produced under another config unless `allow` is set.
inline void check_upstream(const json& upstream, const fs::path& where, const ExperimentConfig& cfg, bool allow) {
  const auto theirs = upstream.value("config_hash", std::string{});
  const auto ours = config_hash(cfg);
  if (theirs == ours) return;
  const std::string msg = where.string() + " was produced with config hash " + theirs + ", current config hashes to " +
                          ours;
  if (!allow) throw UsageError(msg + " (pass --allow-config-mismatch to use it anyway)");
  spdlog::warn("{}; continuing because --allow-config-mismatch was given", msg);
}

inline fs::path require_file(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("missing upstream artifact: expected " + path.string());
  return path;
}

}  // namespace srlnav::pipeline
