#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <spdlog/spdlog.h>

#include "srlnav/sim/types.hpp"
#include "srlnav/srl/dataset.hpp"
#include "srlnav/srl/encoder.hpp"

namespace srlnav::eval {

/// 1-based ranks; ties share the average of the ranks they span.
inline std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> rank(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = r;
    i = j + 1;
  }
  return rank;
}

/// Pearson correlation; returns NaN when either side has zero variance.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("pearson: need two equal-length samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n, my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nan("");
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  auto rx = average_ranks(x), ry = average_ranks(y);
  return pearson(rx, ry);
}

inline double pose_distance(const sim::RobotPose& a, const sim::RobotPose& b, double lambda_theta = 0.5) {
  const double dx = a.x - b.x, dy = a.y - b.y, dt = lambda_theta * sim::wrap_angle(a.theta - b.theta);
  return std::sqrt(dx * dx + dy * dy + dt * dt);
}

struct QualityResult {
  double correlation = 0.0;
  std::size_t pairs = 0;
  bool degenerate = false;
};

/// Rank correlation between distances of encodings (row-major N×k) and pose distances
/// over `n_pairs` seeded pairs of distinct rows.
inline QualityResult representation_quality(std::span<const double> encodings, std::size_t k,
                                            std::span<const sim::RobotPose> poses, std::size_t n_pairs,
                                            std::uint64_t seed, double lambda_theta = 0.5) {
  const std::size_t n = poses.size();
  if (n < 2) throw std::invalid_argument("representation_quality: need at least two samples");
  if (k == 0 || encodings.size() != n * k)
    throw std::invalid_argument("representation_quality: encodings do not match the pose count");
  if (n_pairs < 2) throw std::invalid_argument("representation_quality: need at least two pairs");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1), other(0, n - 2);
  std::vector<double> learned(n_pairs), truth(n_pairs);
  for (std::size_t p = 0; p < n_pairs; ++p) {
    const std::size_t i = pick(rng);
    std::size_t j = other(rng);
    if (j >= i) ++j;
    double s = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double d = encodings[i * k + c] - encodings[j * k + c];
      s += d * d;
    }
    learned[p] = std::sqrt(s);
    truth[p] = pose_distance(poses[i], poses[j], lambda_theta);
  }
  QualityResult q;
  q.pairs = n_pairs;
  q.correlation = spearman(learned, truth);
  if (std::isnan(q.correlation)) {
    spdlog::warn("representation_quality: encodings are constant over the sampled pairs; reporting 0");
    q.correlation = 0.0;
    q.degenerate = true;
  }
  return q;
}

/// Encodes every observation of a dataset (with its pose side channel) and scores it.
inline QualityResult representation_quality(const srl::Encoder& encoder, const srl::Dataset& ds, std::size_t n_pairs,
                                            std::uint64_t seed, double lambda_theta = 0.5) {
  if (ds.poses.size() != ds.samples.size())
    throw std::invalid_argument("representation_quality: dataset carries no pose side channel");
  std::vector<double> enc;
  std::vector<sim::RobotPose> poses;
  enc.reserve(ds.size() * encoder.state_dim());
  constexpr std::size_t kChunk = 1024;
  for (std::size_t start = 0; start < ds.size(); start += kChunk) {
    std::vector<sim::Observation> obs;
    for (std::size_t i = start; i < std::min(ds.size(), start + kChunk); ++i) {
      obs.push_back(ds.samples[i].obs);
      poses.push_back(ds.poses[i].pose);
    }
    auto part = encoder.encode_batch(obs);
    enc.insert(enc.end(), part.begin(), part.end());
  }
  return representation_quality(enc, encoder.state_dim(), poses, n_pairs, seed, lambda_theta);
}

}  // namespace srlnav::eval
