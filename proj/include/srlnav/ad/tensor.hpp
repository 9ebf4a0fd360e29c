#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace srlnav::ad {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into parents that require grad.
  std::function<void(Node&)> backward;

  bool is_leaf() const { return parents.empty(); }

  std::vector<double>& ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

/// Dense row-major float64 array with an optional reverse-mode gradient.
///
/// Tensors are cheap handles: copies share the same node. Operations on
/// tensors that require gradients record their backward rule on the result,
/// so the graph reachable from a loss is the tape replayed by `backward`.
class Tensor {
 public:
  Tensor() = default;

  static Tensor from(Shape shape, std::vector<double> data, bool requires_grad = false) {
    if (shape.empty()) throw ShapeError("tensor shape must have at least one extent");
    for (auto e : shape)
      if (e == 0) throw ShapeError("tensor extents must be positive, got " + shape_str(shape));
    if (shape_size(shape) != data.size())
      throw ShapeError("tensor data length " + std::to_string(data.size()) +
                       " does not match shape " + shape_str(shape));
    auto node = std::make_shared<detail::Node>();
    node->shape = std::move(shape);
    node->data = std::move(data);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
  }

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    auto n = shape_size(shape);
    return from(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
  }

  static Tensor full(Shape shape, double value, bool requires_grad = false) {
    auto n = shape_size(shape);
    return from(std::move(shape), std::vector<double>(n, value), requires_grad);
  }

  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> data,
                       bool requires_grad = false) {
    return from({rows, cols}, std::move(data), requires_grad);
  }

  static Tensor scalar(double v, bool requires_grad = false) {
    return from({1, 1}, {v}, requires_grad);
  }

  bool defined() const { return node_ != nullptr; }

  const Shape& shape() const { return node().shape; }
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const { return node().data.size(); }

  // Rank-1 tensors are treated as a single row.
  std::size_t rows() const {
    const auto& s = shape();
    if (s.size() == 1) return 1;
    if (s.size() == 2) return s[0];
    throw ShapeError("rows() requires rank <= 2, got " + shape_str(s));
  }
  std::size_t cols() const {
    const auto& s = shape();
    if (s.size() <= 2) return s.back();
    throw ShapeError("cols() requires rank <= 2, got " + shape_str(s));
  }

  std::span<const double> data() const { return node().data; }
  std::span<double> mutable_data() { return node().data; }
  const std::vector<double>& values() const { return node().data; }

  double operator()(std::size_t r, std::size_t c) const { return node().data[r * cols() + c]; }
  double item() const {
    if (size() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
    return node().data[0];
  }

  bool requires_grad() const { return node().requires_grad; }
  void set_requires_grad(bool on) { node().requires_grad = on; }

  bool has_grad() const { return node().grad.size() == node().data.size(); }
  std::span<const double> grad() const {
    if (!has_grad()) throw std::logic_error("tensor has no gradient populated");
    return node().grad;
  }
  std::span<double> mutable_grad() { return node().ensure_grad(); }
  void zero_grad() {
    auto& g = node().grad;
    std::fill(g.begin(), g.end(), 0.0);
  }
  void clear_grad() { node().grad.clear(); }

  /// Copy of the values with no gradient history.
  Tensor detach() const { return from(shape(), node().data, false); }

  const char* op_name() const { return node().op; }

  // Identity of the underlying storage; copies of a handle compare equal.
  bool same_as(const Tensor& other) const { return node_ == other.node_; }

  detail::Node& node() const {
    if (!node_) throw std::logic_error("use of undefined tensor");
    return *node_;
  }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

  explicit Tensor(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

namespace detail {

using BackwardFn = std::function<void(Node&)>;

inline Tensor make_result(const char* op, Shape shape, std::vector<double> data,
                          std::initializer_list<Tensor> inputs, BackwardFn fn) {
  auto out = std::make_shared<Node>();
  out->shape = std::move(shape);
  out->data = std::move(data);
  out->op = op;
  bool any = false;
  for (const auto& in : inputs) any = any || in.requires_grad();
  if (any) {
    out->requires_grad = true;
    for (const auto& in : inputs) out->parents.push_back(in.node_ptr());
    out->backward = std::move(fn);
  }
  return Tensor(std::move(out));
}

inline void accumulate(Node& target, std::span<const double> g) {
  if (!target.requires_grad) return;
  auto& tg = target.ensure_grad();
  for (std::size_t i = 0; i < g.size(); ++i) tg[i] += g[i];
}

}  // namespace detail

}  // namespace srlnav::ad
