#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "srlnav/ad/tensor.hpp"

namespace srlnav::ad {

namespace detail {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

[[noreturn]] inline void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) + " and " +
                   shape_str(b.shape()));
}

struct Broadcast {
  std::size_t rows, cols;
  std::size_t a_rows, a_cols, b_rows, b_cols;
  Shape out_shape;

  std::size_t a_index(std::size_t r, std::size_t c) const {
    return (a_rows == 1 ? 0 : r) * a_cols + (a_cols == 1 ? 0 : c);
  }
  std::size_t b_index(std::size_t r, std::size_t c) const {
    return (b_rows == 1 ? 0 : r) * b_cols + (b_cols == 1 ? 0 : c);
  }
};

inline Broadcast broadcast(const char* op, const Tensor& a, const Tensor& b) {
  if (a.rank() > 2 || b.rank() > 2) {
    if (a.shape() != b.shape()) shape_fail(op, a, b);
  }
  Broadcast bc{};
  if (a.shape() == b.shape()) {
    bc.out_shape = a.shape();
    bc.a_rows = bc.b_rows = bc.rows = a.rank() <= 2 ? a.rows() : 1;
    bc.a_cols = bc.b_cols = bc.cols = a.rank() <= 2 ? a.cols() : a.size();
    return bc;
  }
  bc.a_rows = a.rows();
  bc.a_cols = a.cols();
  bc.b_rows = b.rows();
  bc.b_cols = b.cols();
  auto merge = [&](std::size_t x, std::size_t y) -> std::size_t {
    if (x == y) return x;
    if (x == 1) return y;
    if (y == 1) return x;
    shape_fail(op, a, b);
  };
  bc.rows = merge(bc.a_rows, bc.b_rows);
  bc.cols = merge(bc.a_cols, bc.b_cols);
  bc.out_shape = {bc.rows, bc.cols};
  return bc;
}

template <class Fwd, class DA, class DB>
Tensor binary(const char* op, const Tensor& a, const Tensor& b, Fwd fwd, DA da, DB db) {
  auto bc = broadcast(op, a, b);
  std::vector<double> out(bc.rows * bc.cols);
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t r = 0; r < bc.rows; ++r)
    for (std::size_t c = 0; c < bc.cols; ++c)
      out[r * bc.cols + c] = fwd(av[bc.a_index(r, c)], bv[bc.b_index(r, c)]);
  return make_result(op, bc.out_shape, std::move(out), {a, b}, [bc, da, db](Node& self) {
    Node& na = *self.parents[0];
    Node& nb = *self.parents[1];
    const auto& g = self.grad;
    if (na.requires_grad) {
      auto& ga = na.ensure_grad();
      for (std::size_t r = 0; r < bc.rows; ++r)
        for (std::size_t c = 0; c < bc.cols; ++c) {
          auto ia = bc.a_index(r, c), ib = bc.b_index(r, c);
          ga[ia] += g[r * bc.cols + c] * da(na.data[ia], nb.data[ib]);
        }
    }
    if (nb.requires_grad) {
      auto& gb = nb.ensure_grad();
      for (std::size_t r = 0; r < bc.rows; ++r)
        for (std::size_t c = 0; c < bc.cols; ++c) {
          auto ia = bc.a_index(r, c), ib = bc.b_index(r, c);
          gb[ib] += g[r * bc.cols + c] * db(na.data[ia], nb.data[ib]);
        }
    }
  });
}

// Elementwise map whose derivative is expressed through input x and output y.
template <class Fwd, class Deriv>
Tensor unary(const char* op, const Tensor& x, Fwd fwd, Deriv deriv) {
  const auto& xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = fwd(xv[i]);
  return make_result(op, x.shape(), std::move(out), {x}, [deriv](Node& self) {
    Node& nx = *self.parents[0];
    if (!nx.requires_grad) return;
    auto& gx = nx.ensure_grad();
    for (std::size_t i = 0; i < gx.size(); ++i)
      gx[i] += self.grad[i] * deriv(nx.data[i], self.data[i]);
  });
}

inline void require_rank2(const char* op, const Tensor& x) {
  if (x.rank() > 2) throw ShapeError(std::string(op) + ": expected rank <= 2, got " + shape_str(x.shape()));
}

}  // namespace detail

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  detail::require_rank2("matmul", a);
  detail::require_rank2("matmul", b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) detail::shape_fail("matmul", a, b);
  std::vector<double> out(m * n);
  detail::MutMap(out.data(), m, n).noalias() =
      detail::ConstMap(a.values().data(), m, k) * detail::ConstMap(b.values().data(), k, n);
  return detail::make_result("matmul", {m, n}, std::move(out), {a, b}, [m, k, n](detail::Node& self) {
    detail::Node& na = *self.parents[0];
    detail::Node& nb = *self.parents[1];
    detail::ConstMap g(self.grad.data(), m, n);
    if (na.requires_grad) {
      detail::MutMap(na.ensure_grad().data(), m, k).noalias() +=
          g * detail::ConstMap(nb.data.data(), k, n).transpose();
    }
    if (nb.requires_grad) {
      detail::MutMap(nb.ensure_grad().data(), k, n).noalias() +=
          detail::ConstMap(na.data.data(), m, k).transpose() * g;
    }
  });
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  return detail::binary(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  return detail::binary(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  return detail::binary(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

inline Tensor scale(const Tensor& x, double c) {
  return detail::unary(
      "scale", x, [c](double v) { return c * v; }, [c](double, double) { return c; });
}

inline Tensor add_scalar(const Tensor& x, double c) {
  return detail::unary(
      "add_scalar", x, [c](double v) { return v + c; }, [](double, double) { return 1.0; });
}

inline Tensor relu(const Tensor& x) {
  return detail::unary(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

inline Tensor tanh(const Tensor& x) {
  return detail::unary(
      "tanh", x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

inline Tensor sigmoid(const Tensor& x) {
  return detail::unary(
      "sigmoid", x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

inline Tensor exp(const Tensor& x) {
  return detail::unary(
      "exp", x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

inline Tensor square(const Tensor& x) {
  return detail::unary(
      "square", x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

/// Full reduction to a (1,1) tensor.
inline Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  return detail::make_result("sum", {1, 1}, {s}, {x}, [](detail::Node& self) {
    detail::Node& nx = *self.parents[0];
    if (!nx.requires_grad) return;
    auto& gx = nx.ensure_grad();
    for (double& v : gx) v += self.grad[0];
  });
}

inline Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.size())); }

/// Per-row reduction: (m,n) -> (m,1).
inline Tensor sum_rows(const Tensor& x) {
  detail::require_rank2("sum_rows", x);
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> out(m, 0.0);
  const auto& xv = x.values();
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) out[r] += xv[r * n + c];
  return detail::make_result("sum_rows", {m, 1}, std::move(out), {x}, [m, n](detail::Node& self) {
    detail::Node& nx = *self.parents[0];
    if (!nx.requires_grad) return;
    auto& gx = nx.ensure_grad();
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < n; ++c) gx[r * n + c] += self.grad[r];
  });
}

inline Tensor mean_rows(const Tensor& x) {
  return scale(sum_rows(x), 1.0 / static_cast<double>(x.cols()));
}

/// Euclidean norm of each row: (m,n) -> (m,1). The subgradient at a zero row is 0.
inline Tensor l2_norm_rows(const Tensor& x) {
  detail::require_rank2("l2_norm_rows", x);
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> out(m, 0.0);
  const auto& xv = x.values();
  for (std::size_t r = 0; r < m; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += xv[r * n + c] * xv[r * n + c];
    out[r] = std::sqrt(s);
  }
  return detail::make_result("l2_norm_rows", {m, 1}, std::move(out), {x}, [m, n](detail::Node& self) {
    detail::Node& nx = *self.parents[0];
    if (!nx.requires_grad) return;
    auto& gx = nx.ensure_grad();
    for (std::size_t r = 0; r < m; ++r) {
      const double norm = self.data[r];
      if (norm == 0.0) continue;
      const double k = self.grad[r] / norm;
      for (std::size_t c = 0; c < n; ++c) gx[r * n + c] += k * nx.data[r * n + c];
    }
  });
}

/// Joins each row of `a` with the matching row of `b`: (m,p),(m,q) -> (m,p+q).
inline Tensor concat_rows(const Tensor& a, const Tensor& b) {
  detail::require_rank2("concat_rows", a);
  detail::require_rank2("concat_rows", b);
  const std::size_t m = a.rows();
  if (b.rows() != m) detail::shape_fail("concat_rows", a, b);
  const std::size_t p = a.cols(), q = b.cols(), n = p + q;
  std::vector<double> out(m * n);
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t r = 0; r < m; ++r) {
    std::copy_n(av.begin() + r * p, p, out.begin() + r * n);
    std::copy_n(bv.begin() + r * q, q, out.begin() + r * n + p);
  }
  return detail::make_result("concat_rows", {m, n}, std::move(out), {a, b}, [m, p, q, n](detail::Node& self) {
    detail::Node& na = *self.parents[0];
    detail::Node& nb = *self.parents[1];
    if (na.requires_grad) {
      auto& ga = na.ensure_grad();
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < p; ++c) ga[r * p + c] += self.grad[r * n + c];
    }
    if (nb.requires_grad) {
      auto& gb = nb.ensure_grad();
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < q; ++c) gb[r * q + c] += self.grad[r * n + p + c];
    }
  });
}

/// Columns [begin, end) of a matrix.
inline Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
  detail::require_rank2("slice_cols", x);
  const std::size_t m = x.rows(), n = x.cols();
  if (begin >= end || end > n)
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") out of bounds for shape " + shape_str(x.shape()));
  const std::size_t w = end - begin;
  std::vector<double> out(m * w);
  const auto& xv = x.values();
  for (std::size_t r = 0; r < m; ++r) std::copy_n(xv.begin() + r * n + begin, w, out.begin() + r * w);
  return detail::make_result("slice_cols", {m, w}, std::move(out), {x}, [m, n, w, begin](detail::Node& self) {
    detail::Node& nx = *self.parents[0];
    if (!nx.requires_grad) return;
    auto& gx = nx.ensure_grad();
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < w; ++c) gx[r * n + begin + c] += self.grad[r * w + c];
  });
}

/// Selects rows by index (repeats allowed); the backward pass scatter-adds.
inline Tensor gather_rows(const Tensor& x, std::span<const std::size_t> index) {
  detail::require_rank2("gather_rows", x);
  const std::size_t m = x.rows(), n = x.cols(), k = index.size();
  if (k == 0) throw ShapeError("gather_rows: empty index");
  std::vector<std::size_t> idx(index.begin(), index.end());
  std::vector<double> out(k * n);
  const auto& xv = x.values();
  for (std::size_t i = 0; i < k; ++i) {
    if (idx[i] >= m)
      throw ShapeError("gather_rows: index " + std::to_string(idx[i]) + " out of range for shape " +
                       shape_str(x.shape()));
    std::copy_n(xv.begin() + idx[i] * n, n, out.begin() + i * n);
  }
  return detail::make_result("gather_rows", {k, n}, std::move(out), {x}, [idx, n](detail::Node& self) {
    detail::Node& nx = *self.parents[0];
    if (!nx.requires_grad) return;
    auto& gx = nx.ensure_grad();
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t c = 0; c < n; ++c) gx[idx[i] * n + c] += self.grad[i * n + c];
  });
}

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator-(const Tensor& x) { return scale(x, -1.0); }
inline Tensor operator*(double c, const Tensor& x) { return scale(x, c); }
inline Tensor operator*(const Tensor& x, double c) { return scale(x, c); }

}  // namespace srlnav::ad
