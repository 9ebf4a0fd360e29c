#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <iomanip>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "srlnav/sim/grid.hpp"
#include "srlnav/sim/sensors.hpp"
#include "srlnav/sim/types.hpp"

namespace srlnav::sim {

/// Distance-based navigation reward. Reaching the goal takes precedence over a crash
/// or timeout; otherwise progress toward the goal is rewarded in proportion to zeta.
inline double reward(double d_t, double d_prev, bool reached, bool crashed_or_timeout, const RewardConfig& cfg) {
  if (d_t < 0.0 || d_prev < 0.0) throw std::invalid_argument("reward: distances must be non-negative");
  if (reached) return cfg.r_reached;
  if (crashed_or_timeout) return cfg.r_crashed;
  return -cfg.zeta * (d_t - d_prev);
}

/// Single-owner navigation environment: a grid, a differential-drive robot and a goal.
class World {
 public:
  World(OccupancyGrid grid, SimConfig cfg) : grid_(std::move(grid)), cfg_(std::move(cfg)) {
    cfg_.validate();
    if (!grid_.border_closed()) throw std::invalid_argument("world grid must have an occupied border");
    build_placement_map();
  }

  const OccupancyGrid& grid() const { return grid_; }
  const SimConfig& config() const { return cfg_; }
  const RobotPose& pose() const { return pose_; }
  Vec2 goal() const { return goal_; }
  bool terminal() const { return terminal_; }
  bool started() const { return started_; }
  std::size_t steps() const { return steps_; }
  const std::vector<std::size_t>& placement_cells() const { return placeable_; }

  /// Samples a clear start pose and a reachable goal; deterministic in `seed`.
  StepResult reset(std::uint64_t seed) {
    if (placeable_.empty()) throw std::runtime_error("world has no cell with enough clearance for the robot");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, placeable_.size() - 1);
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    std::uniform_real_distribution<double> heading(-std::numbers::pi, std::numbers::pi);
    const double min_sep = cfg_.reward.d_min + cfg_.goal_margin;
    auto sample_point = [&](std::size_t cell) {
      const long ix = static_cast<long>(cell % grid_.width()), iy = static_cast<long>(cell / grid_.width());
      Vec2 c = grid_.cell_center(ix, iy);
      return Vec2{c.x + jitter(rng) * grid_.resolution(), c.y + jitter(rng) * grid_.resolution()};
    };
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const std::size_t sc = placeable_[pick(rng)];
      const std::size_t gc = placeable_[pick(rng)];
      Vec2 s = sample_point(sc);
      Vec2 g = sample_point(gc);
      const double theta = wrap_angle(heading(rng));
      if (component_[sc] != component_[gc]) continue;
      if (distance(s, g) < min_sep) continue;
      if (grid_.disc_collides(s.x, s.y, cfg_.robot_radius + cfg_.clearance_margin)) continue;
      if (grid_.disc_collides(g.x, g.y, cfg_.robot_radius + cfg_.clearance_margin)) continue;
      return place({s.x, s.y, theta}, g);
    }
    throw std::runtime_error("reset: no valid start/goal placement after 1000 attempts");
  }

  /// Puts the robot and goal at explicit positions and starts a fresh episode.
  StepResult place(RobotPose pose, Vec2 goal) {
    pose.theta = wrap_angle(pose.theta);
    pose_ = pose;
    goal_ = goal;
    steps_ = 0;
    terminal_ = false;
    started_ = true;
    last_distance_ = distance(pose_.position(), goal_);
    StepResult r;
    r.observation = observe(grid_, pose_, cfg_);
    r.true_pose = pose_;
    r.goal = goal_;
    r.goal_distance = last_distance_;
    return r;
  }

  StepResult step(const Action& action) { return step(action, cfg_.dt); }

  /// Unicycle Euler step, then collision, goal and timeout checks.
  StepResult step(const Action& action, double dt) {
    if (!started_) throw std::logic_error("step: world has not been reset");
    if (terminal_) throw std::logic_error("step: episode already terminated");
    const Action a = action.clamped();
    const double v = a.v * cfg_.v_max, w = a.w * cfg_.w_max;
    pose_.x += v * std::cos(pose_.theta) * dt;
    pose_.y += v * std::sin(pose_.theta) * dt;
    pose_.theta = wrap_angle(pose_.theta + w * dt);
    ++steps_;

    const double d = distance(pose_.position(), goal_);
    const bool crashed = grid_.disc_collides(pose_.x, pose_.y, cfg_.robot_radius);
    const bool reached = d <= cfg_.reward.d_min;
    const bool timeout = steps_ >= cfg_.max_steps;

    StepResult r;
    r.reward = reward(d, last_distance_, reached, crashed || timeout, cfg_.reward);
    if (reached) r.terminal_kind = TerminalKind::reached;
    else if (crashed) r.terminal_kind = TerminalKind::crashed;
    else if (timeout) r.terminal_kind = TerminalKind::timeout;
    r.terminal = r.terminal_kind != TerminalKind::none;
    terminal_ = r.terminal;
    last_distance_ = d;
    r.observation = observe(grid_, pose_, cfg_);
    r.true_pose = pose_;
    r.goal = goal_;
    r.goal_distance = d;
    return r;
  }

 private:
  // Cells whose centers keep robot_radius + clearance_margin of free space, labelled
  // by 4-connected component so start and goal are mutually reachable.
  void build_placement_map() {
    const std::size_t n = grid_.width() * grid_.height();
    std::vector<bool> ok(n, false);
    const double need = cfg_.robot_radius + cfg_.clearance_margin;
    for (std::size_t iy = 0; iy < grid_.height(); ++iy)
      for (std::size_t ix = 0; ix < grid_.width(); ++ix) {
        Vec2 c = grid_.cell_center(static_cast<long>(ix), static_cast<long>(iy));
        if (!grid_.disc_collides(c.x, c.y, need + 0.5 * grid_.resolution() * std::sqrt(2.0)))
          ok[iy * grid_.width() + ix] = true;
      }
    component_.assign(n, -1);
    int label = 0;
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < n; ++i) {
      if (!ok[i] || component_[i] >= 0) continue;
      component_[i] = label;
      queue.push_back(i);
      while (!queue.empty()) {
        const std::size_t c = queue.front();
        queue.pop_front();
        const std::size_t cx = c % grid_.width(), cy = c / grid_.width();
        auto visit = [&](std::size_t j) {
          if (ok[j] && component_[j] < 0) {
            component_[j] = label;
            queue.push_back(j);
          }
        };
        if (cx > 0) visit(c - 1);
        if (cx + 1 < grid_.width()) visit(c + 1);
        if (cy > 0) visit(c - grid_.width());
        if (cy + 1 < grid_.height()) visit(c + grid_.width());
      }
      ++label;
    }
    placeable_.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (ok[i]) placeable_.push_back(i);
  }

  OccupancyGrid grid_;
  SimConfig cfg_;
  RobotPose pose_;
  Vec2 goal_;
  std::size_t steps_ = 0;
  bool terminal_ = false;
  bool started_ = false;
  double last_distance_ = 0.0;
  std::vector<int> component_;
  std::vector<std::size_t> placeable_;
};

inline World build_world(const std::string& spec, std::uint64_t seed, const SimConfig& cfg = {}) {
  return World(build_grid(spec, seed), cfg);
}

struct TrajectoryRow {
  std::size_t t;
  RobotPose pose;
  double v;  // m/s
  double w;  // rad/s
  double reward;
  TerminalKind kind;
};

inline void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& rows) {
  os << "t,x,y,theta,v,w,reward,terminal_kind\n";
  os << std::setprecision(17);
  for (const auto& r : rows)
    os << r.t << ',' << r.pose.x << ',' << r.pose.y << ',' << r.pose.theta << ',' << r.v << ',' << r.w << ','
       << r.reward << ',' << to_string(r.kind) << '\n';
}

}  // namespace srlnav::sim
