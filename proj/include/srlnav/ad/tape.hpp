#pragma once

#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "srlnav/ad/tensor.hpp"

namespace srlnav::ad {

/// Operations reachable from a root, in topological order (producers first).
class GradientTape {
 public:
  static GradientTape record(const Tensor& root) {
    GradientTape tape;
    if (!root.requires_grad()) return tape;
    // Iterative post-order DFS keeps deep graphs off the call stack.
    std::unordered_set<const detail::Node*> seen;
    std::vector<std::pair<detail::Node*, std::size_t>> stack;
    stack.emplace_back(&root.node(), 0);
    seen.insert(&root.node());
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->parents.size()) {
        detail::Node* p = node->parents[next++].get();
        if (p->requires_grad && !seen.count(p)) {
          seen.insert(p);
          stack.emplace_back(p, 0);
        }
        continue;
      }
      if (!node->is_leaf()) tape.ops_.push_back(node);
      else tape.leaves_.push_back(node);
      stack.pop_back();
    }
    return tape;
  }

  std::size_t size() const { return ops_.size(); }
  const std::vector<detail::Node*>& operations() const { return ops_; }
  const std::vector<detail::Node*>& leaves() const { return leaves_; }

  /// Seeds the last operation with ones and replays backward rules in reverse.
  void replay() const {
    if (ops_.empty()) return;
    for (auto* op : ops_) op->grad.assign(op->data.size(), 0.0);
    auto* root = ops_.back();
    std::fill(root->grad.begin(), root->grad.end(), 1.0);
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
      if ((*it)->backward) (*it)->backward(**it);
    }
  }

 private:
  std::vector<detail::Node*> ops_;
  std::vector<detail::Node*> leaves_;
};

/// Accumulates d(loss)/d(leaf) into every leaf that requires grad.
inline void backward(const Tensor& loss) {
  if (loss.size() != 1)
    throw ShapeError("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
  if (!loss.requires_grad()) return;
  if (loss.node().is_leaf()) {
    auto& g = loss.node().ensure_grad();
    g[0] += 1.0;
    return;
  }
  GradientTape::record(loss).replay();
}

}  // namespace srlnav::ad
