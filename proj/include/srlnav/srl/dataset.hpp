#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "srlnav/ad/checkpoint.hpp"
#include "srlnav/random.hpp"
#include "srlnav/sim/world.hpp"

namespace srlnav::srl {

/// One environment step as seen by representation learning. Carries no pose:
/// the ground truth lives in a parallel `PoseRecord` array that loss code never receives.
struct Sample {
  sim::Observation obs;
  sim::Action action;
  double reward = 0.0;
  sim::Observation next_obs;
  bool terminal = false;
};

struct PoseRecord {
  sim::RobotPose pose;       // pose at obs
  sim::RobotPose next_pose;  // pose at next_obs
};

template <class T>
concept CarriesTruePose = requires(const T& t) { t.true_pose; } || requires(const T& t) { t.pose; };

static_assert(!CarriesTruePose<Sample>, "training samples must not expose ground-truth pose");

struct Dataset {
  std::size_t lidar_dim = 0;
  std::size_t patch_dim = 0;
  std::vector<Sample> samples;
  std::vector<PoseRecord> poses;

  std::size_t size() const { return samples.size(); }
  std::size_t observation_dim() const { return lidar_dim + patch_dim; }

  std::vector<std::size_t> non_terminal_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (!samples[i].terminal) out.push_back(i);
    return out;
  }
};

/// Drives the world with uniformly random actions, resetting after every terminal step.
inline Dataset collect_random_dataset(sim::World& world, std::size_t transitions, std::uint64_t seed) {
  Dataset ds;
  ds.lidar_dim = world.config().beams;
  ds.patch_dim = world.config().patch_size * world.config().patch_size;
  ds.samples.reserve(transitions);
  ds.poses.reserve(transitions);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uv(0.0, 1.0), uw(-1.0, 1.0);
  std::uint64_t episode = 0;
  sim::StepResult current;
  bool need_reset = true;
  while (ds.samples.size() < transitions) {
    if (need_reset) {
      current = world.reset(derive_seed(seed, episode++));
      need_reset = false;
    }
    sim::Action a{uv(rng), uw(rng)};
    auto next = world.step(a);
    ds.samples.push_back({current.observation, a, next.reward, next.observation, next.terminal});
    ds.poses.push_back({current.true_pose, next.true_pose});
    need_reset = next.terminal;
    current = std::move(next);
  }
  return ds;
}

// Layout (little-endian):
//   "SRLNDATA" | u32 version | u64 count | u32 lidar_dim | u32 patch_dim |
//   count x { f64[lidar] obs.lidar, u8[patch] obs.patch, f64 v, f64 w, f64 reward,
//             f64[lidar] next.lidar, u8[patch] next.patch, u8 terminal,
//             f64 x, f64 y, f64 theta, f64 next_x, f64 next_y, f64 next_theta }
inline constexpr char kDatasetMagic[8] = {'S', 'R', 'L', 'N', 'D', 'A', 'T', 'A'};
inline constexpr std::uint32_t kDatasetVersion = 1;

namespace detail {

inline void put_obs(std::ostream& os, const sim::Observation& o, std::size_t lidar_dim, std::size_t patch_dim) {
  if (o.lidar.size() != lidar_dim || o.patch.size() != patch_dim)
    throw std::invalid_argument("dataset write: observation dimensions differ from header");
  ad::binio::put_doubles(os, o.lidar);
  for (double v : o.patch) ad::binio::put<std::uint8_t>(os, v != 0.0 ? 1 : 0);
}

inline sim::Observation get_obs(std::istream& is, std::size_t lidar_dim, std::size_t patch_dim) {
  sim::Observation o;
  o.lidar.resize(lidar_dim);
  ad::binio::get_doubles(is, o.lidar);
  std::vector<std::uint8_t> raw(patch_dim);
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(patch_dim));
  if (!is) throw std::runtime_error("dataset: unexpected end of file");
  o.patch.assign(raw.begin(), raw.end());
  return o;
}

inline void put_pose(std::ostream& os, const sim::RobotPose& p) {
  ad::binio::put(os, p.x);
  ad::binio::put(os, p.y);
  ad::binio::put(os, p.theta);
}

inline sim::RobotPose get_pose(std::istream& is) {
  sim::RobotPose p;
  p.x = ad::binio::get<double>(is);
  p.y = ad::binio::get<double>(is);
  p.theta = ad::binio::get<double>(is);
  return p;
}

}  // namespace detail

inline void write_dataset(std::ostream& os, const Dataset& ds) {
  os.write(kDatasetMagic, sizeof kDatasetMagic);
  ad::binio::put<std::uint32_t>(os, kDatasetVersion);
  ad::binio::put<std::uint64_t>(os, ds.samples.size());
  ad::binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(ds.lidar_dim));
  ad::binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(ds.patch_dim));
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& s = ds.samples[i];
    detail::put_obs(os, s.obs, ds.lidar_dim, ds.patch_dim);
    ad::binio::put(os, s.action.v);
    ad::binio::put(os, s.action.w);
    ad::binio::put(os, s.reward);
    detail::put_obs(os, s.next_obs, ds.lidar_dim, ds.patch_dim);
    ad::binio::put<std::uint8_t>(os, s.terminal ? 1 : 0);
    detail::put_pose(os, ds.poses[i].pose);
    detail::put_pose(os, ds.poses[i].next_pose);
  }
}

inline Dataset read_dataset(std::istream& is) {
  char magic[sizeof kDatasetMagic];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kDatasetMagic, sizeof magic) != 0)
    throw std::runtime_error("not a dataset file (bad magic)");
  const auto version = ad::binio::get<std::uint32_t>(is);
  if (version != kDatasetVersion) throw std::runtime_error("unsupported dataset version " + std::to_string(version));
  Dataset ds;
  const auto count = ad::binio::get<std::uint64_t>(is);
  ds.lidar_dim = ad::binio::get<std::uint32_t>(is);
  ds.patch_dim = ad::binio::get<std::uint32_t>(is);
  ds.samples.reserve(count);
  ds.poses.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Sample s;
    s.obs = detail::get_obs(is, ds.lidar_dim, ds.patch_dim);
    s.action.v = ad::binio::get<double>(is);
    s.action.w = ad::binio::get<double>(is);
    s.reward = ad::binio::get<double>(is);
    s.next_obs = detail::get_obs(is, ds.lidar_dim, ds.patch_dim);
    s.terminal = ad::binio::get<std::uint8_t>(is) != 0;
    PoseRecord p;
    p.pose = detail::get_pose(is);
    p.next_pose = detail::get_pose(is);
    ds.samples.push_back(std::move(s));
    ds.poses.push_back(p);
  }
  return ds;
}

inline void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open dataset for writing: " + path.string());
  write_dataset(os, ds);
  if (!os) throw std::runtime_error("failed writing dataset: " + path.string());
}

inline Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open dataset: " + path.string());
  return read_dataset(is);
}

}  // namespace srlnav::srl
