#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "srlnav/ad/checkpoint.hpp"
#include "srlnav/ad/optim.hpp"
#include "srlnav/ad/tape.hpp"
#include "srlnav/rl/networks.hpp"
#include "srlnav/rl/replay.hpp"

namespace srlnav::rl {

struct RLHyper {
  double gamma = 0.99;
  double rho = 0.005;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double noise_start = 0.3;
  double noise_end = 0.05;
  double noise_decay_fraction = 0.6;  // of the episode budget
  std::size_t batch_size = 128;
  std::size_t capacity = 100000;
  std::size_t warmup = 1000;
  std::size_t hidden = 128;
  std::size_t hidden_layers = 3;

  void validate() const {
    if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("rl.gamma must lie in (0, 1)");
    if (!(rho > 0 && rho <= 1)) throw std::invalid_argument("rl.rho must lie in (0, 1]");
    if (actor_lr < 0 || critic_lr < 0) throw std::invalid_argument("rl learning rates must be >= 0");
    if (noise_start < 0 || noise_end < 0) throw std::invalid_argument("rl noise sigma must be >= 0");
    if (noise_decay_fraction < 0 || noise_decay_fraction > 1)
      throw std::invalid_argument("rl.noise_decay_fraction must lie in [0, 1]");
    if (batch_size == 0 || capacity == 0 || hidden == 0 || hidden_layers == 0)
      throw std::invalid_argument("rl batch_size, capacity, hidden and hidden_layers must be positive");
  }

  /// Linear decay from noise_start to noise_end over the first fraction of episodes.
  double noise_sigma(std::size_t episode, std::size_t episodes) const {
    const double span = noise_decay_fraction * static_cast<double>(episodes);
    if (span <= 0) return noise_end;
    const double t = std::min(1.0, static_cast<double>(episode) / span);
    return noise_start + t * (noise_end - noise_start);
  }
};

/// y = r + γ Q'(s', π'(s')) for non-terminal rows, y = r otherwise. Plain values: no graph.
inline std::vector<double> td_targets(const TransitionBatch& b, const Actor& target_actor,
                                      const Critic& target_critic, double gamma) {
  auto next_q = target_critic.forward(b.next_states, target_actor.forward(b.next_states, true), true).values();
  const auto& r = b.rewards.values();
  std::vector<double> y(b.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = b.terminal[i] ? r[i] : r[i] + gamma * next_q[i];
  return y;
}

inline Tensor critic_loss(const TransitionBatch& b, const Critic& critic, const Actor& target_actor,
                          const Critic& target_critic, double gamma) {
  if (b.size() == 0) throw std::invalid_argument("critic_loss: empty batch");
  auto y = Tensor::matrix(b.size(), 1, td_targets(b, target_actor, target_critic, gamma));
  return ad::mean(ad::square(critic.forward(b.states, b.actions) - y));
}

/// -mean Q(s, π(s)) with the critic entering as constants.
inline Tensor actor_loss(const TransitionBatch& b, const Actor& actor, const Critic& critic) {
  if (b.size() == 0) throw std::invalid_argument("actor_loss: empty batch");
  return -ad::mean(critic.forward(b.states, actor.forward(b.states), true));
}

struct UpdateStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
};

/// Online and target networks plus their optimizers.
class DdpgAgent {
 public:
  DdpgAgent() = default;
  DdpgAgent(std::size_t state_dim, const RLHyper& hyper, Rng& rng)
      : hyper_(hyper),
        actor_(state_dim, hyper.hidden, rng, hyper.hidden_layers),
        critic_(state_dim, hyper.hidden, rng, hyper.hidden_layers),
        actor_opt_(ad::Optimizer::adam(hyper.actor_lr)),
        critic_opt_(ad::Optimizer::adam(hyper.critic_lr)) {
    hyper.validate();
    target_actor_ = actor_.clone();
    target_critic_ = critic_.clone();
    target_actor_.set_requires_grad(false);
    target_critic_.set_requires_grad(false);
  }

  const RLHyper& hyper() const { return hyper_; }
  const Actor& actor() const { return actor_; }
  const Critic& critic() const { return critic_; }
  const Actor& target_actor() const { return target_actor_; }
  const Critic& target_critic() const { return target_critic_; }

  /// One critic step, one actor step, then soft updates of both targets.
  UpdateStats update(const TransitionBatch& b) {
    UpdateStats st;
    auto lc = critic_loss(b, critic_, target_actor_, target_critic_, hyper_.gamma);
    st.critic_loss = lc.item();
    if (!std::isfinite(st.critic_loss)) throw std::runtime_error("non-finite critic loss");
    ad::backward(lc);
    auto cp = critic_.parameters();
    critic_opt_.step(cp);

    auto la = actor_loss(b, actor_, critic_);
    st.actor_loss = la.item();
    if (!std::isfinite(st.actor_loss)) throw std::runtime_error("non-finite actor loss");
    ad::backward(la);
    auto ap = actor_.parameters();
    actor_opt_.step(ap);

    soft_update(critic_.parameters(), target_critic_.parameters(), hyper_.rho);
    soft_update(actor_.parameters(), target_actor_.parameters(), hyper_.rho);
    return st;
  }

  ad::NamedTensors named_parameters() const {
    ad::NamedTensors out;
    actor_.append_named("actor", out);
    critic_.append_named("critic", out);
    target_actor_.append_named("target_actor", out);
    target_critic_.append_named("target_critic", out);
    return out;
  }

 private:
  RLHyper hyper_;
  Actor actor_, target_actor_;
  Critic critic_, target_critic_;
  ad::Optimizer actor_opt_ = ad::Optimizer::adam(1e-4);
  ad::Optimizer critic_opt_ = ad::Optimizer::adam(1e-3);
};

}  // namespace srlnav::rl
