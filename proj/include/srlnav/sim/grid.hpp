#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "srlnav/sim/types.hpp"

namespace srlnav::sim {

/// Boolean occupancy map. Cell (ix, iy) covers [ix*res, (ix+1)*res) x [iy*res, (iy+1)*res)
/// with the world origin at the lower-left corner of cell (0, 0).
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(std::size_t width, std::size_t height, double resolution)
      : width_(width), height_(height), resolution_(resolution), cells_(width * height, false) {
    if (width < 3 || height < 3) throw std::invalid_argument("occupancy grid must be at least 3x3 cells");
    if (!(resolution > 0.0)) throw std::invalid_argument("occupancy grid resolution must be positive");
  }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  double resolution() const { return resolution_; }
  double extent_x() const { return static_cast<double>(width_) * resolution_; }
  double extent_y() const { return static_cast<double>(height_) * resolution_; }
  const std::vector<bool>& cells() const { return cells_; }

  bool in_bounds(long ix, long iy) const {
    return ix >= 0 && iy >= 0 && ix < static_cast<long>(width_) && iy < static_cast<long>(height_);
  }
  // Cells outside the map count as occupied.
  bool occupied(long ix, long iy) const { return !in_bounds(ix, iy) || cells_[index(ix, iy)]; }
  void set(long ix, long iy, bool occ) { cells_.at(index(ix, iy)) = occ; }

  bool occupied_at(double x, double y) const { return occupied(cell_x(x), cell_y(y)); }
  long cell_x(double x) const { return static_cast<long>(std::floor(x / resolution_)); }
  long cell_y(double y) const { return static_cast<long>(std::floor(y / resolution_)); }
  Vec2 cell_center(long ix, long iy) const {
    return {(static_cast<double>(ix) + 0.5) * resolution_, (static_cast<double>(iy) + 0.5) * resolution_};
  }

  void close_border() {
    for (std::size_t x = 0; x < width_; ++x) {
      set(static_cast<long>(x), 0, true);
      set(static_cast<long>(x), static_cast<long>(height_ - 1), true);
    }
    for (std::size_t y = 0; y < height_; ++y) {
      set(0, static_cast<long>(y), true);
      set(static_cast<long>(width_ - 1), static_cast<long>(y), true);
    }
  }

  bool border_closed() const {
    for (std::size_t x = 0; x < width_; ++x)
      if (!occupied(static_cast<long>(x), 0) || !occupied(static_cast<long>(x), static_cast<long>(height_ - 1)))
        return false;
    for (std::size_t y = 0; y < height_; ++y)
      if (!occupied(0, static_cast<long>(y)) || !occupied(static_cast<long>(width_ - 1), static_cast<long>(y)))
        return false;
    return true;
  }

  /// Occupied fraction of the non-border cells.
  double interior_occupancy() const {
    std::size_t occ = 0, total = 0;
    for (std::size_t y = 1; y + 1 < height_; ++y)
      for (std::size_t x = 1; x + 1 < width_; ++x) {
        ++total;
        occ += cells_[y * width_ + x] ? 1 : 0;
      }
    return total ? static_cast<double>(occ) / static_cast<double>(total) : 0.0;
  }

  /// True when a disc intersects any occupied cell.
  bool disc_collides(double x, double y, double radius) const {
    const long x0 = cell_x(x - radius), x1 = cell_x(x + radius);
    const long y0 = cell_y(y - radius), y1 = cell_y(y + radius);
    const double r2 = radius * radius;
    for (long iy = y0; iy <= y1; ++iy)
      for (long ix = x0; ix <= x1; ++ix) {
        if (!occupied(ix, iy)) continue;
        const double lo_x = static_cast<double>(ix) * resolution_, lo_y = static_cast<double>(iy) * resolution_;
        const double cx = std::clamp(x, lo_x, lo_x + resolution_);
        const double cy = std::clamp(y, lo_y, lo_y + resolution_);
        if ((cx - x) * (cx - x) + (cy - y) * (cy - y) < r2) return true;
      }
    return false;
  }

  bool operator==(const OccupancyGrid&) const = default;

 private:
  std::size_t index(long ix, long iy) const {
    return static_cast<std::size_t>(iy) * width_ + static_cast<std::size_t>(ix);
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  double resolution_ = 0.05;
  std::vector<bool> cells_;
};

/// Procedural arena parameters for the built-in worlds.
struct WorldPreset {
  std::string name;
  double size_m;              // square arena side, including the border
  double target_occupancy;    // interior fraction to reach; 0 for an empty arena
  double occupancy_tolerance; // accepted overshoot above the target
  double min_side, max_side;  // obstacle rectangle sides (m)
  double max_aspect;          // elongation of obstacle rectangles
};

inline constexpr double kGridResolution = 0.05;

inline WorldPreset world_preset(const std::string& id) {
  if (id == "env1") return {"env1", 4.0, 0.0, 0.0, 0.0, 0.0, 1.0};
  if (id == "env2") return {"env2", 5.0, 0.04, 0.02, 0.3, 0.6, 1.5};
  if (id == "env3") return {"env3", 5.0, 0.08, 0.02, 0.3, 0.7, 2.0};
  if (id == "env4") return {"env4", 5.0, 0.12, 0.02, 0.2, 0.8, 4.0};
  if (id == "env5") return {"env5", 5.0, 0.16, 0.02, 0.2, 0.9, 6.0};
  throw std::invalid_argument("unknown world identifier '" + id + "' (expected env1..env5 or a grid file)");
}

inline bool is_builtin_world(const std::string& id) {
  return id == "env1" || id == "env2" || id == "env3" || id == "env4" || id == "env5";
}

/// Bordered arena with random rectangular obstacles until the preset occupancy band is met.
inline OccupancyGrid generate_world(const WorldPreset& preset, std::uint64_t seed) {
  const auto cells = static_cast<std::size_t>(std::lround(preset.size_m / kGridResolution));
  OccupancyGrid grid(cells, cells, kGridResolution);
  grid.close_border();
  if (preset.target_occupancy <= 0.0) return grid;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> side(preset.min_side, preset.max_side);
  std::uniform_real_distribution<double> aspect(1.0, preset.max_aspect);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double upper = preset.target_occupancy + preset.occupancy_tolerance;
  for (int attempt = 0; attempt < 100000 && grid.interior_occupancy() < preset.target_occupancy; ++attempt) {
    double w = side(rng), h = side(rng);
    const double stretch = aspect(rng);
    if (unit(rng) < 0.5) w *= stretch;
    else h *= stretch;
    const double x0 = unit(rng) * (grid.extent_x() - w), y0 = unit(rng) * (grid.extent_y() - h);
    OccupancyGrid candidate = grid;
    for (long iy = grid.cell_y(y0); iy <= grid.cell_y(y0 + h); ++iy)
      for (long ix = grid.cell_x(x0); ix <= grid.cell_x(x0 + w); ++ix)
        if (candidate.in_bounds(ix, iy)) candidate.set(ix, iy, true);
    if (candidate.interior_occupancy() <= upper) grid = std::move(candidate);
  }
  if (grid.interior_occupancy() < preset.target_occupancy)
    throw std::runtime_error("world generation for " + preset.name + " did not reach its occupancy band");
  return grid;
}

// World file: first line "width height resolution", then `height` rows of '#' (occupied)
// or '.' (free). The first row is the top of the map (largest y).
inline OccupancyGrid parse_world(std::istream& is) {
  std::string line;
  std::size_t line_no = 1;
  auto fail = [&](const std::string& what) -> std::runtime_error {
    return std::runtime_error("world file line " + std::to_string(line_no) + ": " + what);
  };
  if (!std::getline(is, line)) throw fail("missing header 'width height resolution'");
  std::istringstream header(line);
  long w = 0, h = 0;
  double res = 0.0;
  if (!(header >> w >> h >> res) || w < 3 || h < 3 || !(res > 0.0))
    throw fail("bad header '" + line + "', expected 'width height resolution'");
  std::string extra;
  if (header >> extra) throw fail("unexpected trailing token '" + extra + "' in header");
  OccupancyGrid grid(static_cast<std::size_t>(w), static_cast<std::size_t>(h), res);
  for (long row = 0; row < h; ++row) {
    ++line_no;
    if (!std::getline(is, line)) throw fail("expected " + std::to_string(h) + " map rows, file ended early");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<long>(line.size()) != w)
      throw fail("row has " + std::to_string(line.size()) + " cells, expected " + std::to_string(w));
    const long iy = h - 1 - row;
    for (long ix = 0; ix < w; ++ix) {
      const char c = line[static_cast<std::size_t>(ix)];
      if (c != '#' && c != '.') throw fail(std::string("invalid cell character '") + c + "'");
      grid.set(ix, iy, c == '#');
    }
  }
  if (!grid.border_closed()) throw fail("map border must be fully occupied");
  return grid;
}

inline void write_world(std::ostream& os, const OccupancyGrid& grid) {
  os << grid.width() << ' ' << grid.height() << ' ' << grid.resolution() << '\n';
  for (long iy = static_cast<long>(grid.height()) - 1; iy >= 0; --iy) {
    for (long ix = 0; ix < static_cast<long>(grid.width()); ++ix) os << (grid.occupied(ix, iy) ? '#' : '.');
    os << '\n';
  }
}

inline OccupancyGrid load_world_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open world file: " + path.string());
  return parse_world(is);
}

/// Built-in identifier (env1..env5) or a path to a world file.
inline OccupancyGrid build_grid(const std::string& spec, std::uint64_t seed) {
  if (is_builtin_world(spec)) return generate_world(world_preset(spec), seed);
  return load_world_file(spec);
}

}  // namespace srlnav::sim
