#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "srlnav/ad/tensor.hpp"
#include "srlnav/random.hpp"
#include "srlnav/sim/types.hpp"

namespace srlnav::rl {

struct Transition {
  std::vector<double> state;
  sim::Action action;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
};

/// Minibatch as constant tensors, row i = one transition.
struct TransitionBatch {
  ad::Tensor states;       // (B, d)
  ad::Tensor actions;      // (B, 2)
  ad::Tensor rewards;      // (B, 1)
  ad::Tensor next_states;  // (B, d)
  std::vector<bool> terminal;

  std::size_t size() const { return terminal.size(); }
};

inline TransitionBatch make_batch(const std::vector<const Transition*>& rows) {
  if (rows.empty()) throw std::invalid_argument("transition batch must not be empty");
  const std::size_t n = rows.size(), d = rows.front()->state.size();
  std::vector<double> s, a, r, sn;
  s.reserve(n * d);
  sn.reserve(n * d);
  TransitionBatch b;
  for (const auto* t : rows) {
    if (t->state.size() != d || t->next_state.size() != d)
      throw ad::ShapeError("transition batch: inconsistent state dimension");
    s.insert(s.end(), t->state.begin(), t->state.end());
    sn.insert(sn.end(), t->next_state.begin(), t->next_state.end());
    a.push_back(t->action.v);
    a.push_back(t->action.w);
    r.push_back(t->reward);
    b.terminal.push_back(t->terminal);
  }
  b.states = ad::Tensor::matrix(n, d, std::move(s));
  b.actions = ad::Tensor::matrix(n, 2, std::move(a));
  b.rewards = ad::Tensor::matrix(n, 1, std::move(r));
  b.next_states = ad::Tensor::matrix(n, d, std::move(sn));
  return b;
}

/// Fixed-capacity ring buffer; once full, the oldest transition is overwritten.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
    data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
  }

  void push(Transition t) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(t));
    } else {
      data_[head_] = std::move(t);
    }
    head_ = (head_ + 1) % capacity_;
  }

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return data_[i]; }

  /// Uniform with replacement.
  std::vector<std::size_t> sample_indices(std::size_t batch_size, Rng& rng) const {
    if (data_.empty()) throw std::logic_error("cannot sample from an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
    std::vector<std::size_t> idx(batch_size);
    for (auto& i : idx) i = pick(rng);
    return idx;
  }

  TransitionBatch sample(std::size_t batch_size, Rng& rng) const {
    std::vector<const Transition*> rows;
    for (auto i : sample_indices(batch_size, rng)) rows.push_back(&data_[i]);
    return make_batch(rows);
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<Transition> data_;
};

}  // namespace srlnav::rl
