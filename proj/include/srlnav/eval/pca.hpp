#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace srlnav::eval {

struct SymmetricEigen {
  std::vector<double> values;   // descending
  std::vector<double> vectors;  // column j (row-major k×k) pairs with values[j]
};

/// Cyclic Jacobi rotations on a dense symmetric k×k matrix (row-major).
inline SymmetricEigen jacobi_eigen(std::vector<double> a, std::size_t k, double tol = 1e-14,
                                   std::size_t max_sweeps = 100) {
  if (a.size() != k * k) throw std::invalid_argument("jacobi_eigen: matrix is not k x k");
  std::vector<double> v(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) v[i * k + i] = 1.0;
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * k + j]; };

  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) off += at(i, j) * at(i, j);
    if (std::sqrt(off) <= tol * std::max(scale, 1e-300)) break;

    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = p + 1; q < k; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t r = 0; r < k; ++r) {
          const double arp = at(r, p), arq = at(r, q);
          at(r, p) = c * arp - s * arq;
          at(r, q) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < k; ++r) {
          const double apr = at(p, r), aqr = at(q, r);
          at(p, r) = c * apr - s * aqr;
          at(q, r) = s * apr + c * aqr;
        }
        for (std::size_t r = 0; r < k; ++r) {
          const double vrp = v[r * k + p], vrq = v[r * k + q];
          v[r * k + p] = c * vrp - s * vrq;
          v[r * k + q] = s * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return at(x, x) > at(y, y); });
  SymmetricEigen out;
  out.values.resize(k);
  out.vectors.resize(k * k);
  for (std::size_t j = 0; j < k; ++j) {
    out.values[j] = at(order[j], order[j]);
    for (std::size_t r = 0; r < k; ++r) out.vectors[r * k + j] = v[r * k + order[j]];
  }
  return out;
}

struct Projection2D {
  std::vector<double> scores;             // N×2 row-major
  std::array<std::vector<double>, 2> axes;
  std::array<double, 2> eigenvalues{};
  std::array<double, 2> explained{};      // fraction of total variance
  std::vector<double> mean;
};

/// Sample covariance (divides by N-1) of row-major N×k data.
inline std::vector<double> covariance(std::span<const double> data, std::size_t n, std::size_t k,
                                      std::vector<double>* mean_out = nullptr) {
  std::vector<double> mean(k, 0.0), cov(k * k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) mean[j] += data[i * k + j];
  for (auto& m : mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < k; ++a) {
      const double da = data[i * k + a] - mean[a];
      for (std::size_t b = a; b < k; ++b) cov[a * k + b] += da * (data[i * k + b] - mean[b]);
    }
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a; b < k; ++b) {
      cov[a * k + b] /= static_cast<double>(n - 1);
      cov[b * k + a] = cov[a * k + b];
    }
  if (mean_out) *mean_out = std::move(mean);
  return cov;
}

/// Projects row-major N×k data on its two leading principal axes. Each axis is
/// signed so that its largest-magnitude component is positive.
inline Projection2D pca_project(std::span<const double> data, std::size_t n, std::size_t k) {
  if (n < 3 || k < 2) throw std::invalid_argument("pca_project: need N >= 3 and k >= 2");
  if (data.size() != n * k)
    throw std::invalid_argument("pca_project: data has " + std::to_string(data.size()) + " values, expected " +
                                std::to_string(n * k));
  Projection2D p;
  auto eig = jacobi_eigen(covariance(data, n, k, &p.mean), k);
  double total = 0.0;
  for (double v : eig.values) total += std::max(v, 0.0);
  if (!(total > 0.0)) throw std::runtime_error("pca_project: data has zero variance");

  for (std::size_t c = 0; c < 2; ++c) {
    auto& axis = p.axes[c];
    axis.resize(k);
    for (std::size_t r = 0; r < k; ++r) axis[r] = eig.vectors[r * k + c];
    const auto big = std::max_element(axis.begin(), axis.end(),
                                      [](double x, double y) { return std::abs(x) < std::abs(y); });
    if (*big < 0)
      for (auto& x : axis) x = -x;
    p.eigenvalues[c] = eig.values[c];
    p.explained[c] = std::max(eig.values[c], 0.0) / total;
  }
  p.scores.resize(n * 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < 2; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += (data[i * k + j] - p.mean[j]) * p.axes[c][j];
      p.scores[i * 2 + c] = s;
    }
  return p;
}

}  // namespace srlnav::eval
