#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "srlnav/random.hpp"
#include "srlnav/rl/networks.hpp"
#include "srlnav/rl/state.hpp"
#include "srlnav/sim/world.hpp"

namespace srlnav::eval {

/// Σ_t γ^t r_{t+1}
inline double compute_return(std::span<const double> rewards, double gamma) {
  if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("compute_return: gamma must lie in (0, 1)");
  double total = 0.0, discount = 1.0;
  for (double r : rewards) {
    total += discount * r;
    discount *= gamma;
  }
  return total;
}

struct EpisodeRecord {
  std::size_t episode = 0;
  double discounted_return = 0.0;
  std::size_t steps = 0;
  bool success = false;
  sim::TerminalKind terminal_kind = sim::TerminalKind::none;
  sim::Vec2 goal;
};

struct EvalReport {
  double success_ratio = 0.0;
  double mean_return = 0.0;
  double mean_length = 0.0;
  std::vector<EpisodeRecord> episodes;
  std::vector<std::vector<sim::TrajectoryRow>> trajectories;  // filled only on request
};

inline void write_eval_csv(std::ostream& os, const EvalReport& report) {
  os << "episode,return,steps,success,terminal_kind\n";
  os.precision(17);
  for (const auto& e : report.episodes)
    os << e.episode << ',' << e.discounted_return << ',' << e.steps << ',' << (e.success ? 1 : 0) << ','
       << sim::to_string(e.terminal_kind) << '\n';
}

/// Maps the latest step result and the previous normalized action to the next action.
using Controller = std::function<sim::Action(const sim::StepResult&, const sim::Action&)>;

/// Noise-free actor on top of a state source.
inline Controller policy_controller(const rl::Actor& actor, const rl::StateSource& source) {
  return [&actor, &source](const sim::StepResult& r, const sim::Action& prev) {
    return actor.act(source.extended(r, prev)).clamped();
  };
}

/// Turn toward the goal, drive forward once roughly aligned. Reads the true pose.
inline Controller straight_to_goal_controller() {
  return [](const sim::StepResult& r, const sim::Action&) {
    const auto g = sim::goal_in_robot_frame(r.true_pose, r.goal);
    const double bearing = std::atan2(g.y, g.x);
    const double w = std::clamp(2.0 * bearing, -1.0, 1.0);
    const double v = std::abs(bearing) < 0.3 ? 1.0 : 0.0;
    return sim::Action{v, w};
  };
}

struct EvalOptions {
  std::size_t episodes = 100;
  std::uint64_t seed = 0;
  double gamma = 0.99;
  bool record_trajectories = false;
};

/// Runs `episodes` rollouts; episode i starts from world.reset(derive_seed(seed, i)).
inline EvalReport evaluate_policy(sim::World& world, const Controller& controller, const EvalOptions& opt) {
  EvalReport report;
  for (std::size_t ep = 0; ep < opt.episodes; ++ep) {
    EpisodeRecord rec;
    rec.episode = ep;
    auto r = world.reset(derive_seed(opt.seed, ep));
    rec.goal = r.goal;
    std::vector<sim::TrajectoryRow> traj;
    if (opt.record_trajectories) traj.push_back({0, r.true_pose, 0.0, 0.0, 0.0, sim::TerminalKind::none});
    sim::Action prev{0.0, 0.0};
    double discount = 1.0;
    while (!r.terminal) {
      const auto a = controller(r, prev).clamped();
      r = world.step(a);
      rec.discounted_return += discount * r.reward;
      discount *= opt.gamma;
      ++rec.steps;
      if (opt.record_trajectories)
        traj.push_back({rec.steps, r.true_pose, a.v * world.config().v_max, a.w * world.config().w_max, r.reward,
                        r.terminal_kind});
      prev = a;
    }
    rec.terminal_kind = r.terminal_kind;
    rec.success = r.terminal_kind == sim::TerminalKind::reached;
    report.episodes.push_back(rec);
    if (opt.record_trajectories) report.trajectories.push_back(std::move(traj));
  }
  if (!report.episodes.empty()) {
    std::size_t hits = 0;
    double ret = 0, len = 0;
    for (const auto& e : report.episodes) {
      hits += e.success;
      ret += e.discounted_return;
      len += static_cast<double>(e.steps);
    }
    const double n = static_cast<double>(report.episodes.size());
    report.success_ratio = static_cast<double>(hits) / n;
    report.mean_return = ret / n;
    report.mean_length = len / n;
  }
  return report;
}

}  // namespace srlnav::eval
