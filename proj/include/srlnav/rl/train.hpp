#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "srlnav/rl/ddpg.hpp"
#include "srlnav/rl/state.hpp"
#include "srlnav/sim/world.hpp"

namespace srlnav::rl {

struct EpisodeLog {
  std::size_t episode = 0;
  double discounted_return = 0.0;
  std::size_t steps = 0;
  bool success = false;
  sim::TerminalKind terminal_kind = sim::TerminalKind::none;
  double noise_sigma = 0.0;
};

inline void write_training_log_csv(std::ostream& os, const std::vector<EpisodeLog>& log) {
  os << "episode,return,steps,success,terminal_kind,noise_sigma\n";
  os.precision(17);
  for (const auto& e : log)
    os << e.episode << ',' << e.discounted_return << ',' << e.steps << ',' << (e.success ? 1 : 0) << ','
       << sim::to_string(e.terminal_kind) << ',' << e.noise_sigma << '\n';
}

/// Fraction of successes over the trailing `window` entries ending at `end` (exclusive).
inline double trailing_success(const std::vector<EpisodeLog>& log, std::size_t end, std::size_t window) {
  const std::size_t begin = end > window ? end - window : 0;
  if (end == begin) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = begin; i < end; ++i) hits += log[i].success;
  return static_cast<double>(hits) / static_cast<double>(end - begin);
}

struct RlTrainOptions {
  std::size_t episodes = 1500;
  std::uint64_t seed = 0;
  // Stop once the trailing-window success ratio reaches this value (disabled when unset).
  std::optional<double> stop_at_success;
  std::size_t success_window = 100;
  // Where to write network parameters if a loss turns non-finite.
  std::optional<std::filesystem::path> dump_on_failure;
  std::function<void(const EpisodeLog&)> on_episode;
};

struct RlResult {
  DdpgAgent agent;
  std::vector<EpisodeLog> log;
  std::size_t total_steps = 0;
};

/// DDPG on a frozen state source. Seed streams: 0 networks, 1 exploration,
/// 2 replay sampling, 3 episode start/goal draws.
inline RlResult train_rl(sim::World& world, const StateSource& source, const RLHyper& hyper,
                         const RlTrainOptions& opt) {
  hyper.validate();
  Rng net_rng(derive_seed(opt.seed, 0));
  Rng noise_rng(derive_seed(opt.seed, 1));
  Rng replay_rng(derive_seed(opt.seed, 2));
  const std::uint64_t episode_base = derive_seed(opt.seed, 3);

  RlResult res{DdpgAgent(source.extended_dim(), hyper, net_rng), {}, 0};
  ReplayBuffer buffer(hyper.capacity);
  std::uniform_real_distribution<double> uv(0.0, 1.0), uw(-1.0, 1.0);

  for (std::size_t ep = 0; ep < opt.episodes; ++ep) {
    EpisodeLog entry;
    entry.episode = ep;
    entry.noise_sigma = hyper.noise_sigma(ep, opt.episodes);

    auto current = world.reset(derive_seed(episode_base, ep));
    sim::Action prev{0.0, 0.0};
    auto state = source.extended(current, prev);
    double discount = 1.0;
    while (!current.terminal) {
      sim::Action a = res.total_steps < hyper.warmup ? sim::Action{uv(noise_rng), uw(noise_rng)}
                                                     : select_action(res.agent.actor(), state, entry.noise_sigma,
                                                                     noise_rng);
      auto next = world.step(a);
      auto next_state = source.extended(next, a);
      buffer.push({state, a, next.reward, next_state, next.terminal});
      entry.discounted_return += discount * next.reward;
      discount *= hyper.gamma;
      ++entry.steps;
      ++res.total_steps;

      if (buffer.size() >= std::max(hyper.warmup, hyper.batch_size)) {
        try {
          res.agent.update(buffer.sample(hyper.batch_size, replay_rng));
        } catch (const std::runtime_error& e) {
          if (opt.dump_on_failure) {
            ad::save_checkpoint(*opt.dump_on_failure, res.agent.named_parameters());
            spdlog::error("{} at episode {} step {}; parameters written to {}", e.what(), ep, entry.steps,
                          opt.dump_on_failure->string());
          }
          throw std::runtime_error(std::string("train_rl: ") + e.what() + " at episode " + std::to_string(ep));
        }
      }
      current = std::move(next);
      state = std::move(next_state);
      prev = a;
    }
    entry.terminal_kind = current.terminal_kind;
    entry.success = current.terminal_kind == sim::TerminalKind::reached;
    res.log.push_back(entry);
    if (opt.on_episode) opt.on_episode(entry);

    const double ratio = trailing_success(res.log, res.log.size(), opt.success_window);
    if (ep % 50 == 49) spdlog::info("episode {}: trailing success {:.2f}, sigma {:.3f}", ep + 1, ratio, entry.noise_sigma);
    if (opt.stop_at_success && res.log.size() >= opt.success_window && ratio >= *opt.stop_at_success) {
      spdlog::info("trailing success {:.2f} reached after {} episodes; stopping", ratio, ep + 1);
      break;
    }
  }
  return res;
}

}  // namespace srlnav::rl
