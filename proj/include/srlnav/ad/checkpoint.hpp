#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "srlnav/ad/tensor.hpp"

namespace srlnav::ad {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace binio {

template <class T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw std::runtime_error("unexpected end of file");
  return value;
}

inline void put_string(std::ostream& os, const std::string& s) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& is, std::size_t limit = 1 << 16) {
  auto n = get<std::uint32_t>(is);
  if (n > limit) throw std::runtime_error("string field too long");
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw std::runtime_error("unexpected end of file");
  return s;
}

inline void put_doubles(std::ostream& os, std::span<const double> v) {
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

inline void get_doubles(std::istream& is, std::span<double> v) {
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!is) throw std::runtime_error("unexpected end of file");
}

}  // namespace binio

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// Layout (little-endian):
//   "SRLNCKPT" | u32 version | u32 count |
//   count x { u32 name_len, name bytes, u32 rank, rank x u64 extent, f64 payload (row-major) }
inline constexpr char kCheckpointMagic[8] = {'S', 'R', 'L', 'N', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void write_checkpoint(std::ostream& os, const NamedTensors& params) {
  os.write(kCheckpointMagic, sizeof kCheckpointMagic);
  binio::put<std::uint32_t>(os, kCheckpointVersion);
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    binio::put_string(os, name);
    binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(t.rank()));
    for (auto e : t.shape()) binio::put<std::uint64_t>(os, e);
    binio::put_doubles(os, t.data());
  }
}

inline NamedTensors read_checkpoint(std::istream& is) {
  char magic[sizeof kCheckpointMagic];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    throw std::runtime_error("not a checkpoint file (bad magic)");
  auto version = binio::get<std::uint32_t>(is);
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  auto count = binio::get<std::uint32_t>(is);
  NamedTensors out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name = binio::get_string(is);
    auto rank = binio::get<std::uint32_t>(is);
    if (rank == 0 || rank > 8) throw std::runtime_error("checkpoint entry '" + name + "' has invalid rank");
    Shape shape(rank);
    for (auto& e : shape) e = binio::get<std::uint64_t>(is);
    std::vector<double> data(shape_size(shape));
    binio::get_doubles(is, data);
    out.emplace_back(std::move(name), Tensor::from(std::move(shape), std::move(data)));
  }
  return out;
}

inline void save_checkpoint(const std::filesystem::path& path, const NamedTensors& params) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  write_checkpoint(os, params);
  if (!os) throw std::runtime_error("failed writing checkpoint: " + path.string());
}

inline NamedTensors load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path.string());
  return read_checkpoint(is);
}

/// Copies stored values into existing parameters, matching by name and shape.
inline void restore_into(const NamedTensors& stored, const NamedTensors& params) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& [name, t] : stored) by_name[name] = &t;
  for (const auto& [name, t] : params) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw std::runtime_error("checkpoint is missing parameter '" + name + "'");
    if (it->second->shape() != t.shape())
      throw std::runtime_error("checkpoint parameter '" + name + "' has shape " + shape_str(it->second->shape()) +
                               ", expected " + shape_str(t.shape()));
    auto dst = Tensor(t).mutable_data();
    auto src = it->second->data();
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

}  // namespace srlnav::ad
