#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "srlnav/sim/grid.hpp"
#include "srlnav/sim/types.hpp"

namespace srlnav::sim {

/// Distance from (x, y) along `angle` to the first occupied cell, capped at r_max.
/// Traverses cells with the Amanatides-Woo grid walk.
inline double cast_ray(const OccupancyGrid& grid, double x, double y, double angle, double r_max) {
  long ix = grid.cell_x(x), iy = grid.cell_y(y);
  if (grid.occupied(ix, iy)) return 0.0;
  const double res = grid.resolution();
  const double dx = std::cos(angle), dy = std::sin(angle);
  constexpr double inf = std::numeric_limits<double>::infinity();
  const long step_x = dx > 0 ? 1 : -1;
  const long step_y = dy > 0 ? 1 : -1;
  double t_max_x = inf, t_max_y = inf, t_delta_x = inf, t_delta_y = inf;
  if (dx != 0.0) {
    const double edge = static_cast<double>(ix + (step_x > 0 ? 1 : 0)) * res;
    t_max_x = (edge - x) / dx;
    t_delta_x = res / std::abs(dx);
  }
  if (dy != 0.0) {
    const double edge = static_cast<double>(iy + (step_y > 0 ? 1 : 0)) * res;
    t_max_y = (edge - y) / dy;
    t_delta_y = res / std::abs(dy);
  }
  for (;;) {
    double t;
    if (t_max_x < t_max_y) {
      t = t_max_x;
      ix += step_x;
      t_max_x += t_delta_x;
    } else {
      t = t_max_y;
      iy += step_y;
      t_max_y += t_delta_y;
    }
    if (t >= r_max) return r_max;
    if (grid.occupied(ix, iy)) return std::max(t, 0.0);
  }
}

/// `beams` rays evenly spaced over 360 degrees starting at the heading, counter-clockwise,
/// each normalized by r_max.
inline std::vector<double> lidar_scan(const OccupancyGrid& grid, const RobotPose& pose, std::size_t beams,
                                      double r_max) {
  std::vector<double> out(beams);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(beams);
  for (std::size_t k = 0; k < beams; ++k)
    out[k] = cast_ray(grid, pose.x, pose.y, pose.theta + step * static_cast<double>(k), r_max) / r_max;
  return out;
}

/// Robot-centric occupancy window rotated to the heading. Row 0 is farthest ahead,
/// column 0 farthest to the left; the robot sits at the window center.
inline std::vector<double> local_patch(const OccupancyGrid& grid, const RobotPose& pose, std::size_t size,
                                       double cell) {
  std::vector<double> out(size * size);
  const double c = std::cos(pose.theta), s = std::sin(pose.theta);
  const double half = static_cast<double>(size) / 2.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double ahead = (half - static_cast<double>(i) - 0.5) * cell;
    for (std::size_t j = 0; j < size; ++j) {
      const double left = (half - static_cast<double>(j) - 0.5) * cell;
      const double wx = pose.x + c * ahead - s * left;
      const double wy = pose.y + s * ahead + c * left;
      out[i * size + j] = grid.occupied_at(wx, wy) ? 1.0 : 0.0;
    }
  }
  return out;
}

inline Observation observe(const OccupancyGrid& grid, const RobotPose& pose, const SimConfig& cfg) {
  return {lidar_scan(grid, pose, cfg.beams, cfg.r_max), local_patch(grid, pose, cfg.patch_size, cfg.patch_resolution)};
}

}  // namespace srlnav::sim
