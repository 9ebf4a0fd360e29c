#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srlnav/ad/tensor.hpp"
#include "srlnav/sim/types.hpp"
#include "srlnav/srl/encoder.hpp"

namespace srlnav::rl {

/// Agent input: state ⊕ goal (x, y) in the robot frame ⊕ previous normalized action.
inline std::vector<double> extend_state(std::span<const double> s_hat, sim::Vec2 goal_robot_frame,
                                        const sim::Action& prev_action, std::size_t expected_state_dim) {
  if (s_hat.size() != expected_state_dim)
    throw ad::ShapeError("extend_state: state has " + std::to_string(s_hat.size()) + " values, expected " +
                         std::to_string(expected_state_dim));
  std::vector<double> out(s_hat.begin(), s_hat.end());
  out.push_back(goal_robot_frame.x);
  out.push_back(goal_robot_frame.y);
  out.push_back(prev_action.v);
  out.push_back(prev_action.w);
  return out;
}

/// Where the state part of the agent input comes from: a frozen encoder applied to
/// the observation, or the simulator's true pose (x, y, θ).
class StateSource {
 public:
  static StateSource learned(srl::Encoder encoder) {
    StateSource s;
    s.encoder_ = std::move(encoder);
    return s;
  }
  static StateSource true_pose() { return StateSource{}; }

  bool uses_true_pose() const { return !encoder_.has_value(); }
  const srl::Encoder* encoder() const { return encoder_ ? &*encoder_ : nullptr; }
  std::size_t state_dim() const { return encoder_ ? encoder_->state_dim() : 3; }
  std::size_t extended_dim() const { return state_dim() + 4; }

  std::vector<double> features(const sim::StepResult& r) const {
    if (encoder_) return encoder_->encode(r.observation);
    return {r.true_pose.x, r.true_pose.y, r.true_pose.theta};
  }

  std::vector<double> extended(const sim::StepResult& r, const sim::Action& prev_action) const {
    return extend_state(features(r), sim::goal_in_robot_frame(r.true_pose, r.goal), prev_action, state_dim());
  }

 private:
  std::optional<srl::Encoder> encoder_;
};

}  // namespace srlnav::rl
