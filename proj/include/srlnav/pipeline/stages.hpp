#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "srlnav/ad/checkpoint.hpp"
#include "srlnav/eval/evaluate.hpp"
#include "srlnav/eval/quality.hpp"
#include "srlnav/pipeline/config.hpp"
#include "srlnav/pipeline/manifest.hpp"
#include "srlnav/rl/train.hpp"
#include "srlnav/sim/world.hpp"
#include "srlnav/srl/dataset.hpp"
#include "srlnav/srl/train.hpp"

namespace srlnav::pipeline {

// Seed streams hanging off a run seed, kept apart from those used inside train_rl (0..3).
inline constexpr std::uint64_t kDataStream = 11;
inline constexpr std::uint64_t kSrlStream = 12;
inline constexpr std::uint64_t kEvalStream = 13;
inline constexpr std::uint64_t kQualityStream = 14;
inline constexpr std::size_t kQualityPairs = 1000;

inline sim::World make_world(const ExperimentConfig& cfg) {
  if (!sim::is_builtin_world(cfg.world) && !fs::exists(cfg.world))
    throw UsageError("world '" + cfg.world + "' is neither env1..env5 nor an existing world file");
  try {
    return sim::build_world(cfg.world, cfg.world_seed, cfg.sim);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

inline std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------

inline void gen_data(const ExperimentConfig& cfg, const fs::path& out, std::optional<std::size_t> transitions = {}) {
  auto world = make_world(cfg);
  const std::size_t n = transitions.value_or(cfg.transitions);
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  spdlog::info("collecting {} random transitions in {}", n, cfg.world);
  const auto ds = srl::collect_random_dataset(world, n, derive_seed(cfg.base_seed(), kDataStream));
  srl::save_dataset(out, ds);

  auto m = make_manifest("gen-data", cfg);
  m.seeds.push_back(cfg.base_seed());
  m.extra["transitions"] = n;
  m.add_output(out, out.has_parent_path() ? out.parent_path() : fs::path("."));
  write_manifest(sidecar_manifest(out), m);
}

// ---------------------------------------------------------------------------

inline srl::Encoder load_encoder(const ExperimentConfig& cfg, const fs::path& checkpoint) {
  Rng rng(0);
  auto enc = srl::Encoder::create(cfg.encoder_config(), rng);
  ad::restore_into(ad::load_checkpoint(require_file(checkpoint)), enc.named_parameters());
  return enc;
}

inline void train_srl(const ExperimentConfig& cfg, const fs::path& data, const fs::path& out, bool allow_mismatch) {
  if (cfg.method == Method::true_state)
    throw UsageError("method=true_state has no representation stage; run train-rl without --encoder");
  const auto upstream = read_manifest(sidecar_manifest(require_file(data)));
  check_upstream(upstream, data, cfg, allow_mismatch);
  const auto ds = srl::load_dataset(data);
  const auto enc_cfg = cfg.encoder_config();
  if (ds.lidar_dim != enc_cfg.lidar_dim || ds.patch_dim != enc_cfg.patch_dim)
    throw UsageError("dataset observation layout does not match the sim settings of the config");
  ensure_dir(out);

  const std::uint64_t seed = derive_seed(cfg.base_seed(), kSrlStream);
  auto m = make_manifest("train-srl", cfg);
  m.seeds.push_back(cfg.base_seed());
  m.add_input("dataset", data, upstream.value("config_hash", std::string{}));

  srl::Encoder encoder;
  srl::Encoder untrained;
  if (cfg.method == Method::autoencoder) {
    auto opt = cfg.autoencoder;
    opt.seed = seed;
    spdlog::info("training auto-encoder (latent {}) for {} epochs on {} samples", opt.latent, opt.epochs, ds.size());
    {
      Rng rng(derive_seed(seed, 0));
      untrained = srl::AutoEncoder::create(enc_cfg, opt, rng).encoder;
    }
    auto res = srl::autoencoder_train(ds.samples, enc_cfg, opt);
    encoder = res.model.encoder.clone();
    ad::save_checkpoint(out / "autoencoder.ckpt", res.model.named_parameters());
    auto os = open_out(out / "ae_trace.csv");
    srl::write_ae_trace_csv(os, res.trace);
    os.close();
    m.add_output(out / "autoencoder.ckpt", out);
    m.add_output(out / "ae_trace.csv", out);
  } else {
    auto opt = cfg.srl;
    opt.seed = seed;
    opt.objective = cfg.method == Method::ours ? srl::PriorObjective::continuous : srl::PriorObjective::original;
    spdlog::info("training encoder with {} priors for {} epochs on {} samples", to_string(cfg.method), opt.epochs,
                 ds.size());
    {
      Rng rng(derive_seed(seed, 0));
      untrained = srl::Encoder::create(enc_cfg, rng);
    }
    auto res = srl::train_srl(ds.samples, enc_cfg, cfg.prior, opt);
    encoder = std::move(res.encoder);
    auto os = open_out(out / "loss_trace.csv");
    srl::write_loss_trace_csv(os, res.trace);
    os.close();
    m.add_output(out / "loss_trace.csv", out);
  }
  ad::save_checkpoint(out / "encoder.ckpt", encoder.named_parameters());
  m.add_output(out / "encoder.ckpt", out);

  if (ds.poses.size() == ds.size() && ds.size() >= 2) {
    const auto q_seed = derive_seed(cfg.base_seed(), kQualityStream);
    const auto trained_q = eval::representation_quality(encoder, ds, kQualityPairs, q_seed);
    const auto untrained_q = eval::representation_quality(untrained, ds, kQualityPairs, q_seed);
    m.extra["quality"] = {{"pairs", kQualityPairs},
                          {"trained_spearman", trained_q.correlation},
                          {"untrained_spearman", untrained_q.correlation}};
    spdlog::info("representation quality (Spearman, {} pairs): trained {:.4f}, untrained {:.4f}", kQualityPairs,
                 trained_q.correlation, untrained_q.correlation);
  }
  write_manifest(out / kManifestName, m);
}

// ---------------------------------------------------------------------------

inline fs::path seed_dir(const fs::path& root, std::uint64_t seed) { return root / ("seed_" + std::to_string(seed)); }

inline rl::StateSource make_source(const ExperimentConfig& cfg, const fs::path& encoder_ckpt) {
  if (cfg.method == Method::true_state) return rl::StateSource::true_pose();
  return rl::StateSource::learned(load_encoder(cfg, encoder_ckpt));
}

inline void train_rl(const ExperimentConfig& cfg, const std::optional<fs::path>& encoder_dir, const fs::path& out,
                     bool allow_mismatch, const std::vector<std::uint64_t>& only_seeds = {}) {
  auto m = make_manifest("train-rl", cfg);
  if (cfg.method == Method::true_state) {
    if (encoder_dir) throw UsageError("--encoder must be omitted when method=true_state");
  } else if (!encoder_dir) {
    throw UsageError("--encoder is required when method=" + to_string(cfg.method));
  }
  ensure_dir(out);
  if (encoder_dir) {
    const auto upstream = read_manifest(*encoder_dir / kManifestName);
    check_upstream(upstream, *encoder_dir, cfg, allow_mismatch);
    const auto src = require_file(*encoder_dir / "encoder.ckpt");
    fs::copy_file(src, out / "encoder.ckpt", fs::copy_options::overwrite_existing);
    m.add_input("encoder", src, upstream.value("config_hash", std::string{}));
    m.add_output(out / "encoder.ckpt", out);
  }
  const auto source = make_source(cfg, out / "encoder.ckpt");

  std::vector<std::uint64_t> seeds = only_seeds.empty() ? cfg.seeds : only_seeds;
  for (std::uint64_t s : seeds) {
    const auto dir = seed_dir(out, s);
    ensure_dir(dir);
    auto world = make_world(cfg);
    rl::RlTrainOptions opt;
    opt.episodes = cfg.rl_episodes;
    opt.seed = s;
    opt.dump_on_failure = dir / "failure.ckpt";
    spdlog::info("DDPG seed {}: {} episodes, method {}", s, opt.episodes, to_string(cfg.method));
    auto res = rl::train_rl(world, source, cfg.rl, opt);
    ad::save_checkpoint(dir / "agent.ckpt", res.agent.named_parameters());
    auto os = open_out(dir / "training_log.csv");
    rl::write_training_log_csv(os, res.log);
    os.close();

    auto sm = make_manifest("train-rl", cfg);
    sm.seeds.push_back(s);
    sm.extra["total_steps"] = res.total_steps;
    sm.extra["final_trailing_success"] = rl::trailing_success(res.log, res.log.size(), 100);
    sm.add_output(dir / "agent.ckpt", dir);
    sm.add_output(dir / "training_log.csv", dir);
    write_manifest(dir / kManifestName, sm);
    m.seeds.push_back(s);
    m.add_output(dir / kManifestName, out);
  }
  write_manifest(out / kManifestName, m);
}

// ---------------------------------------------------------------------------

inline rl::DdpgAgent load_agent(const ExperimentConfig& cfg, const rl::StateSource& source, const fs::path& ckpt) {
  Rng rng(0);
  rl::DdpgAgent agent(source.extended_dim(), cfg.rl, rng);
  ad::restore_into(ad::load_checkpoint(require_file(ckpt)), agent.named_parameters());
  return agent;
}

inline void write_trajectories_csv(std::ostream& os, const eval::EvalReport& report, std::size_t limit) {
  os << "episode,t,x,y,theta,v,w,reward,terminal_kind,goal_x,goal_y\n";
  os.precision(17);
  for (std::size_t e = 0; e < report.trajectories.size() && e < limit; ++e) {
    const auto& goal = report.episodes[e].goal;
    for (const auto& r : report.trajectories[e])
      os << e << ',' << r.t << ',' << r.pose.x << ',' << r.pose.y << ',' << r.pose.theta << ',' << r.v << ',' << r.w
         << ',' << r.reward << ',' << sim::to_string(r.kind) << ',' << goal.x << ',' << goal.y << '\n';
  }
}

inline void evaluate(const ExperimentConfig& cfg, const fs::path& rl_dir, const fs::path& out, bool allow_mismatch) {
  const auto upstream = read_manifest(rl_dir / kManifestName);
  check_upstream(upstream, rl_dir, cfg, allow_mismatch);
  if (upstream.value("stage", std::string{}) != "train-rl")
    throw UsageError(rl_dir.string() + " is not a train-rl output directory");
  const auto source = make_source(cfg, rl_dir / "encoder.ckpt");
  ensure_dir(out);

  auto m = make_manifest("eval", cfg);
  json per_seed = json::array();
  double mean_success = 0.0;
  for (const auto& sj : upstream.at("seeds")) {
    const auto s = sj.get<std::uint64_t>();
    const auto ckpt = seed_dir(rl_dir, s) / "agent.ckpt";
    const auto agent = load_agent(cfg, source, ckpt);
    m.add_input("agent", ckpt, upstream.value("config_hash", std::string{}));
    auto world = make_world(cfg);
    eval::EvalOptions opt;
    opt.episodes = cfg.eval_episodes;
    opt.seed = derive_seed(s, kEvalStream);
    opt.gamma = cfg.rl.gamma;
    opt.record_trajectories = cfg.trajectories > 0;
    const auto report = eval::evaluate_policy(world, eval::policy_controller(agent.actor(), source), opt);

    const auto tag = "seed_" + std::to_string(s);
    auto os = open_out(out / ("eval_" + tag + ".csv"));
    eval::write_eval_csv(os, report);
    os.close();
    m.add_output(out / ("eval_" + tag + ".csv"), out);
    if (opt.record_trajectories) {
      auto ts = open_out(out / ("trajectories_" + tag + ".csv"));
      write_trajectories_csv(ts, report, cfg.trajectories);
      ts.close();
      m.add_output(out / ("trajectories_" + tag + ".csv"), out);
    }
    spdlog::info("eval seed {}: success {:.3f}, mean return {:.3f}, mean length {:.1f}", s, report.success_ratio,
                 report.mean_return, report.mean_length);
    per_seed.push_back({{"seed", s},
                        {"success_ratio", report.success_ratio},
                        {"mean_return", report.mean_return},
                        {"mean_length", report.mean_length}});
    m.seeds.push_back(s);
    mean_success += report.success_ratio;
  }
  if (!per_seed.empty()) mean_success /= static_cast<double>(per_seed.size());
  m.extra["per_seed"] = per_seed;
  m.extra["mean_success_ratio"] = mean_success;
  write_manifest(out / kManifestName, m);
}

}  // namespace srlnav::pipeline
