#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace srlnav::sim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

struct RobotPose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {x, y}; }
};

/// Command in normalized units: v in [0,1], w in [-1,1].
struct Action {
  double v = 0.0;
  double w = 0.0;

  Action clamped() const { return {std::clamp(v, 0.0, 1.0), std::clamp(w, -1.0, 1.0)}; }
  double norm() const { return std::hypot(v, w); }
};

struct Observation {
  std::vector<double> lidar;  // normalized ranges in [0,1]
  std::vector<double> patch;  // P*P occupancy values in {0,1}, row-major, row 0 farthest ahead

  std::size_t size() const { return lidar.size() + patch.size(); }

  std::vector<double> flattened() const {
    std::vector<double> out(lidar);
    out.insert(out.end(), patch.begin(), patch.end());
    return out;
  }
};

struct RewardConfig {
  double r_reached = 100.0;
  double r_crashed = -100.0;
  double d_min = 0.2;
  double zeta = 10.0;
  double gamma = 0.99;

  void validate() const {
    if (!(r_reached > 0.0 && r_crashed < 0.0)) throw std::invalid_argument("reward config: need r_reached > 0 > r_crashed");
    if (!(d_min > 0.0)) throw std::invalid_argument("reward config: d_min must be positive");
    if (!(zeta > 0.0)) throw std::invalid_argument("reward config: zeta must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("reward config: gamma must lie in (0,1)");
  }
};

struct SimConfig {
  std::size_t beams = 36;
  double r_max = 3.5;
  double v_max = 0.26;
  double w_max = 1.82;
  double dt = 0.1;
  std::size_t max_steps = 500;
  double robot_radius = 0.15;
  double clearance_margin = 0.1;  // extra free space required around sampled start/goal
  double goal_margin = 0.3;       // start-goal distance must exceed d_min + goal_margin
  std::size_t patch_size = 16;
  double patch_resolution = 0.1;
  RewardConfig reward;

  std::size_t observation_size() const { return beams + patch_size * patch_size; }

  void validate() const {
    if (beams == 0) throw std::invalid_argument("sim config: beams must be positive");
    if (patch_size == 0) throw std::invalid_argument("sim config: patch_size must be positive");
    if (!(r_max > 0 && v_max > 0 && w_max > 0 && dt > 0 && robot_radius > 0 && patch_resolution > 0))
      throw std::invalid_argument("sim config: physical constants must be positive");
    if (max_steps == 0) throw std::invalid_argument("sim config: max_steps must be positive");
    reward.validate();
  }
};

enum class TerminalKind { none, reached, crashed, timeout };

inline std::string_view to_string(TerminalKind k) {
  switch (k) {
    case TerminalKind::none: return "none";
    case TerminalKind::reached: return "reached";
    case TerminalKind::crashed: return "crashed";
    case TerminalKind::timeout: return "timeout";
  }
  return "unknown";
}

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool terminal = false;
  TerminalKind terminal_kind = TerminalKind::none;
  RobotPose true_pose;  // evaluation side channel
  Vec2 goal;
  double goal_distance = 0.0;
};

/// Goal position expressed in the robot frame (x ahead, y to the left).
inline Vec2 goal_in_robot_frame(const RobotPose& pose, Vec2 goal) {
  const double dx = goal.x - pose.x, dy = goal.y - pose.y;
  const double c = std::cos(pose.theta), s = std::sin(pose.theta);
  return {c * dx + s * dy, -s * dx + c * dy};
}

}  // namespace srlnav::sim
