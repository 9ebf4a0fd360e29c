#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "srlnav/random.hpp"
#include "srlnav/rl/ddpg.hpp"
#include "srlnav/sim/types.hpp"
#include "srlnav/srl/encoder.hpp"
#include "srlnav/srl/priors.hpp"
#include "srlnav/srl/train.hpp"

namespace srlnav::pipeline {

using nlohmann::json;

/// Bad flags, bad config, missing or mismatched upstream artifacts. Maps to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Method { ours, original_priors, autoencoder, true_state };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::ours: return "ours";
    case Method::original_priors: return "original_priors";
    case Method::autoencoder: return "autoencoder";
    case Method::true_state: return "true_state";
  }
  return "unknown";
}

inline Method parse_method(const std::string& s) {
  for (Method m : {Method::ours, Method::original_priors, Method::autoencoder, Method::true_state})
    if (to_string(m) == s) return m;
  throw UsageError("method '" + s + "' is not one of ours, original_priors, autoencoder, true_state");
}

struct ExperimentConfig {
  std::string world = "env1";
  std::uint64_t world_seed = 0;
  sim::SimConfig sim;
  Method method = Method::ours;
  std::size_t transitions = 20000;
  srl::PriorHyper prior;
  srl::SrlTrainOptions srl;  // seed is filled from `seeds` at run time
  srl::AutoEncoderOptions autoencoder;
  rl::RLHyper rl;
  std::size_t rl_episodes = 1500;
  std::size_t eval_episodes = 100;
  std::size_t trajectories = 5;  // evaluation episodes whose paths are written out
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "runs";

  /// Seed driving data collection and representation learning.
  std::uint64_t base_seed() const { return seeds.front(); }

  srl::EncoderConfig encoder_config() const {
    srl::EncoderConfig c;
    c.lidar_dim = sim.beams;
    c.patch_dim = sim.patch_size * sim.patch_size;
    if (method == Method::autoencoder) c.state_dim = autoencoder.latent;
    return c;
  }
};

namespace detail {

inline bool is_count(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

// Walks one JSON object, remembering which keys were consumed so leftovers can be reported.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw UsageError(where() + " must be an object");
  }

  const json* take(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (auto* v = take(key)) {
      if (!v->is_number()) throw UsageError(field(key) + " must be a number");
      out = v->get<double>();
    }
  }

  template <typename U>
  void count(const std::string& key, U& out) {
    if (auto* v = take(key)) {
      if (!is_count(*v)) throw UsageError(field(key) + " must be a non-negative integer");
      out = static_cast<U>(v->get<std::uint64_t>());
    }
  }

  void text(const std::string& key, std::string& out) {
    if (auto* v = take(key)) {
      if (!v->is_string()) throw UsageError(field(key) + " must be a string");
      out = v->get<std::string>();
    }
  }

  ObjectReader child(const std::string& key) {
    static const json empty = json::object();
    auto* v = take(key);
    return ObjectReader(v ? *v : empty, path_.empty() ? key : path_ + "." + key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw UsageError("unknown key " + field(it.key()));
  }

  std::string field(const std::string& key) const { return "'" + (path_.empty() ? key : path_ + "." + key) + "'"; }

 private:
  std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace detail

/// Parses a config document. Missing keys keep their defaults; unknown keys are rejected.
inline ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig c;
  detail::ObjectReader top(doc, "");
  top.text("world", c.world);
  top.count("world_seed", c.world_seed);
  std::string method = to_string(c.method);
  top.text("method", method);
  c.method = parse_method(method);
  top.text("output_dir", c.output_dir);
  if (auto* s = top.take("seeds")) {
    if (!s->is_array() || s->empty()) throw UsageError("'seeds' must be a non-empty array of integers");
    c.seeds.clear();
    for (const auto& v : *s) {
      if (!detail::is_count(v)) throw UsageError("'seeds' must contain non-negative integers");
      c.seeds.push_back(v.get<std::uint64_t>());
    }
  }

  {
    auto s = top.child("sim");
    s.count("beams", c.sim.beams);
    s.number("r_max", c.sim.r_max);
    s.number("v_max", c.sim.v_max);
    s.number("w_max", c.sim.w_max);
    s.number("dt", c.sim.dt);
    s.count("max_steps", c.sim.max_steps);
    s.number("robot_radius", c.sim.robot_radius);
    s.number("clearance_margin", c.sim.clearance_margin);
    s.number("goal_margin", c.sim.goal_margin);
    s.count("patch_size", c.sim.patch_size);
    s.number("patch_resolution", c.sim.patch_resolution);
    auto r = s.child("reward");
    r.number("r_reached", c.sim.reward.r_reached);
    r.number("r_crashed", c.sim.reward.r_crashed);
    r.number("d_min", c.sim.reward.d_min);
    r.number("zeta", c.sim.reward.zeta);
    r.number("gamma", c.sim.reward.gamma);
    r.finish();
    s.finish();
  }
  {
    auto d = top.child("data");
    d.count("transitions", c.transitions);
    d.finish();
  }
  {
    auto p = top.child("prior");
    p.number("alpha", c.prior.alpha);
    p.number("beta", c.prior.beta);
    p.number("lambda_reg", c.prior.lambda_reg);
    if (auto* w = p.take("omega")) {
      if (!w->is_array() || w->size() != 5) throw UsageError("'prior.omega' must be an array of 5 numbers");
      for (std::size_t i = 0; i < 5; ++i) {
        if (!(*w)[i].is_number()) throw UsageError("'prior.omega' must be an array of 5 numbers");
        c.prior.omega[i] = (*w)[i].get<double>();
      }
    }
    p.finish();
  }
  {
    auto s = top.child("srl");
    s.count("epochs", c.srl.epochs);
    s.count("batch_size", c.srl.batch_size);
    s.number("learning_rate", c.srl.learning_rate);
    s.number("action_threshold", c.srl.action_threshold);
    s.finish();
  }
  {
    auto a = top.child("autoencoder");
    a.count("latent", c.autoencoder.latent);
    a.count("epochs", c.autoencoder.epochs);
    a.count("batch_size", c.autoencoder.batch_size);
    a.number("learning_rate", c.autoencoder.learning_rate);
    a.finish();
  }
  {
    auto r = top.child("rl");
    r.number("gamma", c.rl.gamma);
    r.number("rho", c.rl.rho);
    r.number("actor_lr", c.rl.actor_lr);
    r.number("critic_lr", c.rl.critic_lr);
    r.number("noise_start", c.rl.noise_start);
    r.number("noise_end", c.rl.noise_end);
    r.number("noise_decay_fraction", c.rl.noise_decay_fraction);
    r.count("batch_size", c.rl.batch_size);
    r.count("capacity", c.rl.capacity);
    r.count("warmup", c.rl.warmup);
    r.count("hidden", c.rl.hidden);
    r.count("hidden_layers", c.rl.hidden_layers);
    r.count("episodes", c.rl_episodes);
    r.finish();
  }
  {
    auto e = top.child("eval");
    e.count("episodes", c.eval_episodes);
    e.count("trajectories", c.trajectories);
    e.finish();
  }
  top.finish();

  try {
    c.sim.validate();
    c.prior.validate();
    c.rl.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (c.srl.batch_size < 2 || c.autoencoder.batch_size < 1) throw UsageError("SRL batch sizes must be at least 2");
  if (!(c.srl.learning_rate > 0 && c.autoencoder.learning_rate > 0))
    throw UsageError("SRL learning rates must be positive");
  if (c.autoencoder.latent == 0) throw UsageError("'autoencoder.latent' must be positive");
  return c;
}

/// Canonical form with every default filled in. Keys sort alphabetically.
inline json to_json(const ExperimentConfig& c, bool include_output = true) {
  json j;
  j["world"] = c.world;
  j["world_seed"] = c.world_seed;
  j["method"] = to_string(c.method);
  j["seeds"] = c.seeds;
  if (include_output) j["output_dir"] = c.output_dir;
  const auto& s = c.sim;
  j["sim"] = {{"beams", s.beams},
              {"r_max", s.r_max},
              {"v_max", s.v_max},
              {"w_max", s.w_max},
              {"dt", s.dt},
              {"max_steps", s.max_steps},
              {"robot_radius", s.robot_radius},
              {"clearance_margin", s.clearance_margin},
              {"goal_margin", s.goal_margin},
              {"patch_size", s.patch_size},
              {"patch_resolution", s.patch_resolution},
              {"reward",
               {{"r_reached", s.reward.r_reached},
                {"r_crashed", s.reward.r_crashed},
                {"d_min", s.reward.d_min},
                {"zeta", s.reward.zeta},
                {"gamma", s.reward.gamma}}}};
  j["data"] = {{"transitions", c.transitions}};
  j["prior"] = {{"alpha", c.prior.alpha},
                {"beta", c.prior.beta},
                {"lambda_reg", c.prior.lambda_reg},
                {"omega", c.prior.omega}};
  j["srl"] = {{"epochs", c.srl.epochs},
              {"batch_size", c.srl.batch_size},
              {"learning_rate", c.srl.learning_rate},
              {"action_threshold", c.srl.action_threshold}};
  j["autoencoder"] = {{"latent", c.autoencoder.latent},
                      {"epochs", c.autoencoder.epochs},
                      {"batch_size", c.autoencoder.batch_size},
                      {"learning_rate", c.autoencoder.learning_rate}};
  const auto& r = c.rl;
  j["rl"] = {{"gamma", r.gamma},
             {"rho", r.rho},
             {"actor_lr", r.actor_lr},
             {"critic_lr", r.critic_lr},
             {"noise_start", r.noise_start},
             {"noise_end", r.noise_end},
             {"noise_decay_fraction", r.noise_decay_fraction},
             {"batch_size", r.batch_size},
             {"capacity", r.capacity},
             {"warmup", r.warmup},
             {"hidden", r.hidden},
             {"hidden_layers", r.hidden_layers},
             {"episodes", c.rl_episodes}};
  j["eval"] = {{"episodes", c.eval_episodes}, {"trajectories", c.trajectories}};
  return j;
}

inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Hash of the canonical config. The output directory does not take part, so the same
/// experiment written to two places carries one hash.
inline std::string config_hash(const ExperimentConfig& c) { return hex64(fnv1a(to_json(c, false).dump())); }

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  const auto text = read_text(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

}  // namespace srlnav::pipeline
