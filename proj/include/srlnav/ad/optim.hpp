#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "srlnav/ad/tensor.hpp"

namespace srlnav::ad {

enum class OptimizerKind { sgd, adam };

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First-order optimizer over a fixed, ordered parameter list.
///
/// Adam moments are keyed by position in the list, so callers must pass the
/// same parameters in the same order on every step.
class Optimizer {
 public:
  static Optimizer sgd(double learning_rate) { return Optimizer(OptimizerKind::sgd, learning_rate, {}); }
  static Optimizer adam(double learning_rate, AdamSettings settings = {}) {
    return Optimizer(OptimizerKind::adam, learning_rate, settings);
  }

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) {
    if (!(lr >= 0.0)) throw std::invalid_argument("learning rate must be non-negative");
    lr_ = lr;
  }
  std::uint64_t steps() const { return t_; }

  /// Applies one update and zeroes the gradients.
  void step(std::span<Tensor> params) {
    for (std::size_t i = 0; i < params.size(); ++i)
      if (!params[i].has_grad())
        throw std::logic_error("optimizer step: parameter " + std::to_string(i) + " of shape " +
                               shape_str(params[i].shape()) + " has no gradient");
    ++t_;
    if (kind_ == OptimizerKind::adam) {
      if (first_.empty()) {
        for (const auto& p : params) {
          first_.emplace_back(p.size(), 0.0);
          second_.emplace_back(p.size(), 0.0);
        }
      }
      if (first_.size() != params.size())
        throw std::logic_error("optimizer step: parameter list changed between steps");
    }
    if (lr_ == 0.0) {
      for (auto& p : params) p.zero_grad();
      return;
    }
    const double bc1 = 1.0 - std::pow(adam_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(adam_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto w = params[i].mutable_data();
      auto g = params[i].mutable_grad();
      if (kind_ == OptimizerKind::sgd) {
        for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr_ * g[j];
      } else {
        auto& m = first_[i];
        auto& v = second_[i];
        if (m.size() != w.size()) throw std::logic_error("optimizer step: parameter shape changed");
        for (std::size_t j = 0; j < w.size(); ++j) {
          m[j] = adam_.beta1 * m[j] + (1.0 - adam_.beta1) * g[j];
          v[j] = adam_.beta2 * v[j] + (1.0 - adam_.beta2) * g[j] * g[j];
          const double mhat = m[j] / bc1;
          const double vhat = v[j] / bc2;
          w[j] -= lr_ * mhat / (std::sqrt(vhat) + adam_.epsilon);
        }
      }
      std::fill(g.begin(), g.end(), 0.0);
    }
  }

 private:
  Optimizer(OptimizerKind kind, double lr, AdamSettings s) : kind_(kind), adam_(s) { set_learning_rate(lr); }

  OptimizerKind kind_;
  double lr_ = 0.0;
  AdamSettings adam_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
};

}  // namespace srlnav::ad
