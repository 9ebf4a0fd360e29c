#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "srlnav/sim/world.hpp"
#include "support/sim_oracles.hpp"

using namespace srlnav::sim;

using oracle::grid_with;
using oracle::oracle_range;
using oracle::Rect;

TEST(Worlds, Env1InteriorIsFree) {
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    auto g = build_grid("env1", seed);
    EXPECT_TRUE(g.border_closed());
    EXPECT_EQ(g.interior_occupancy(), 0.0);
  }
}

TEST(Worlds, DeterministicPerSeed) {
  for (const char* id : {"env2", "env3", "env4", "env5"}) {
    EXPECT_EQ(build_grid(id, 11), build_grid(id, 11)) << id;
    EXPECT_NE(build_grid(id, 11), build_grid(id, 12)) << id;
  }
}

TEST(Worlds, OccupancyBandsIncrease) {
  auto g3 = build_grid("env3", 7);
  auto p3 = world_preset("env3");
  EXPECT_GE(g3.interior_occupancy(), p3.target_occupancy);
  EXPECT_LE(g3.interior_occupancy(), p3.target_occupancy + p3.occupancy_tolerance);
  double prev = 0.0;
  for (const char* id : {"env2", "env3", "env4", "env5"}) {
    auto g = build_grid(id, 3);
    EXPECT_TRUE(g.border_closed());
    EXPECT_GT(g.interior_occupancy(), prev) << id;
    prev = g.interior_occupancy();
  }
}

TEST(Worlds, UnknownIdentifierFails) { EXPECT_THROW(build_grid("env9", 0), std::runtime_error); }

TEST(WorldFile, ParsesAndRoundTrips) {
  std::istringstream in("5 4 0.1\n#####\n#..##\n#...#\n#####\n");
  auto g = parse_world(in);
  EXPECT_EQ(g.width(), 5u);
  EXPECT_EQ(g.height(), 4u);
  EXPECT_DOUBLE_EQ(g.resolution(), 0.1);
  EXPECT_TRUE(g.occupied(3, 2));   // second text row is iy = 2
  EXPECT_FALSE(g.occupied(3, 1));
  std::ostringstream out;
  write_world(out, g);
  std::istringstream again(out.str());
  EXPECT_EQ(parse_world(again), g);
}

TEST(WorldFile, ErrorsCarryLineNumbers) {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_world(in);
    } catch (const std::runtime_error& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("5 x 0.1\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("4 3 0.1\n####\n#..\n####\n").find("line 3"), std::string::npos);
  EXPECT_NE(message("4 3 0.1\n####\n#.x#\n####\n").find("line 3"), std::string::npos);
  EXPECT_NE(message("4 3 0.1\n####\n#..#\n").find("ended early"), std::string::npos);
  EXPECT_NE(message("4 3 0.1\n####\n...#\n####\n").find("border"), std::string::npos);
}

TEST(Reward, Cases) {
  RewardConfig cfg;
  EXPECT_EQ(reward(0.1, 0.3, true, false, cfg), cfg.r_reached);
  EXPECT_EQ(reward(0.5, 0.3, false, true, cfg), cfg.r_crashed);
  EXPECT_EQ(reward(0.1, 0.3, true, true, cfg), cfg.r_reached);
  cfg.zeta = 1.0;
  EXPECT_DOUBLE_EQ(reward(1.0, 1.5, false, false, cfg), 0.5);
  EXPECT_THROW(reward(-1.0, 1.0, false, false, cfg), std::invalid_argument);
}

TEST(Reset, Env1StartAndGoalAreClear) {
  auto world = build_world("env1", 0);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto r = world.reset(seed);
    EXPECT_FALSE(r.terminal);
    EXPECT_EQ(r.reward, 0.0);
    EXPECT_FALSE(world.grid().disc_collides(r.true_pose.x, r.true_pose.y, world.config().robot_radius));
    EXPECT_FALSE(world.grid().disc_collides(r.goal.x, r.goal.y, world.config().robot_radius));
  }
}

TEST(Reset, DeterministicPerSeed) {
  auto world = build_world("env3", 4);
  auto a = world.reset(42);
  auto b = world.reset(42);
  EXPECT_EQ(a.true_pose.x, b.true_pose.x);
  EXPECT_EQ(a.true_pose.theta, b.true_pose.theta);
  EXPECT_EQ(a.goal.x, b.goal.x);
  EXPECT_EQ(a.goal.y, b.goal.y);
}

TEST(Reset, StartGoalSeparation) {
  auto world = build_world("env2", 1);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto r = world.reset(seed);
    EXPECT_GE(distance(r.true_pose.position(), r.goal), world.config().reward.d_min + world.config().goal_margin);
  }
}

TEST(Reset, FailsWithoutRoom) {
  std::istringstream in("6 6 0.05\n######\n#....#\n#....#\n#....#\n#....#\n######\n");
  World world(parse_world(in), SimConfig{});
  EXPECT_THROW(world.reset(0), std::runtime_error);
}

TEST(Step, ZeroActionHoldsPose) {
  auto world = build_world("env1", 0);
  auto start = world.reset(3);
  auto r = world.step({0.0, 0.0});
  EXPECT_EQ(r.true_pose.x, start.true_pose.x);
  EXPECT_EQ(r.true_pose.y, start.true_pose.y);
  EXPECT_EQ(r.true_pose.theta, start.true_pose.theta);
  EXPECT_EQ(r.reward, 0.0);
}

TEST(Step, ForwardKinematics) {
  auto world = build_world("env1", 0);
  world.place({2.0, 2.0, 0.0}, {0.5, 0.5});
  auto r = world.step({1.0, 0.0}, 0.1);
  EXPECT_NEAR(r.true_pose.x, 2.026, 1e-12);
  EXPECT_EQ(r.true_pose.y, 2.0);
  world.place({2.0, 2.0, std::numbers::pi - 0.01}, {0.5, 0.5});
  r = world.step({0.0, 1.0}, 0.1);
  EXPECT_NEAR(r.true_pose.theta, -std::numbers::pi - 0.01 + 0.182, 1e-12);  // wrapped
}

TEST(Step, ActionsAreClamped) {
  auto world = build_world("env1", 0);
  world.place({2.0, 2.0, 0.0}, {0.5, 0.5});
  auto r = world.step({5.0, -3.0}, 0.1);
  EXPECT_NEAR(r.true_pose.x, 2.026, 1e-12);
  EXPECT_NEAR(r.true_pose.theta, -0.182, 1e-12);
}

TEST(Step, ReachingGoalTerminates) {
  auto world = build_world("env1", 0);
  world.place({2.0, 2.0, 0.0}, {2.2, 2.0});
  auto r = world.step({1.0, 0.0});
  EXPECT_TRUE(r.terminal);
  EXPECT_EQ(r.terminal_kind, TerminalKind::reached);
  EXPECT_EQ(r.reward, world.config().reward.r_reached);
  EXPECT_THROW(world.step({0.0, 0.0}), std::logic_error);
}

TEST(Step, CrashAndTimeout) {
  auto world = build_world("env1", 0);
  world.place({0.22, 2.0, std::numbers::pi}, {3.0, 2.0});
  auto r = world.step({1.0, 0.0});
  EXPECT_EQ(r.terminal_kind, TerminalKind::crashed);
  EXPECT_EQ(r.reward, world.config().reward.r_crashed);

  SimConfig cfg;
  cfg.max_steps = 3;
  World short_world(build_grid("env1", 0), cfg);
  short_world.place({2.0, 2.0, 0.0}, {3.0, 3.0});
  short_world.step({0.0, 0.0});
  short_world.step({0.0, 0.0});
  r = short_world.step({0.0, 0.0});
  EXPECT_EQ(r.terminal_kind, TerminalKind::timeout);
  EXPECT_EQ(r.reward, cfg.reward.r_crashed);
}

TEST(Step, RequiresReset) {
  auto world = build_world("env1", 0);
  EXPECT_THROW(world.step({0.0, 0.0}), std::logic_error);
}

TEST(Step, SameSeedAndActionsGiveIdenticalTrajectories) {
  auto run = [] {
    auto world = build_world("env4", 2);
    world.reset(17);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<RobotPose> poses;
    for (int i = 0; i < 300 && !world.terminal(); ++i) poses.push_back(world.step({u(rng), 2 * u(rng) - 1}).true_pose);
    return poses;
  };
  auto a = run(), b = run();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].x, b[i].x);
    EXPECT_EQ(a[i].y, b[i].y);
    EXPECT_EQ(a[i].theta, b[i].theta);
  }
}

TEST(Step, NonCrashedPoseIsFree) {
  auto world = build_world("env5", 8);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::uint64_t ep = 0; ep < 50; ++ep) {
    world.reset(ep);
    while (!world.terminal()) {
      auto r = world.step({u(rng), 2 * u(rng) - 1});
      EXPECT_TRUE(-std::numbers::pi < r.true_pose.theta && r.true_pose.theta <= std::numbers::pi);
      if (r.terminal_kind != TerminalKind::crashed) {
        EXPECT_FALSE(world.grid().occupied_at(r.true_pose.x, r.true_pose.y));
        EXPECT_FALSE(world.grid().disc_collides(r.true_pose.x, r.true_pose.y, world.config().robot_radius));
      }
      for (double v : r.observation.lidar) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
      for (double v : r.observation.patch) EXPECT_TRUE(v == 0.0 || v == 1.0);
    }
  }
}

TEST(Step, ShapedRewardTelescopes) {
  auto world = build_world("env1", 0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double zeta = world.config().reward.zeta;
  for (std::uint64_t ep = 0; ep < 100; ++ep) {
    auto start = world.reset(ep);
    double d_last = start.goal_distance, total = 0.0;
    for (int i = 0; i < 200; ++i) {
      auto r = world.step({u(rng), 2 * u(rng) - 1});
      if (r.terminal) break;
      total += r.reward;
      d_last = r.goal_distance;
    }
    EXPECT_NEAR(total, zeta * (start.goal_distance - d_last), 1e-9);
  }
}

TEST(Lidar, OpenSpaceIsCapped) {
  OccupancyGrid g(200, 200, kGridResolution);
  g.close_border();
  auto scan = lidar_scan(g, {5.0, 5.0, 0.3}, 36, 3.5);
  for (double v : scan) EXPECT_EQ(v, 1.0);
}

TEST(Lidar, WallAhead) {
  // wall face at x = 3.0 m (cell 60), robot at x = 2.0 m facing +x
  auto g = grid_with(100, 80, {{60, 1, 62, 78}});
  auto scan = lidar_scan(g, {2.0, 2.0, 0.0}, 36, 3.5);
  EXPECT_NEAR(scan[0], 1.0 / 3.5, kGridResolution / 3.5);
  scan = lidar_scan(g, {2.0, 2.0, std::numbers::pi / 2}, 36, 3.5);
  EXPECT_NEAR(scan[27], 1.0 / 3.5, kGridResolution / 3.5);  // beam pointing along -90 deg relative
}

TEST(Lidar, RotationShiftsBeams) {
  auto g = build_grid("env1", 0);
  const double inc = 2.0 * std::numbers::pi / 36.0;
  for (double base : {0.0, 0.4, -2.0}) {
    auto a = lidar_scan(g, {1.3, 2.4, base}, 36, 3.5);
    auto b = lidar_scan(g, {1.3, 2.4, base + inc}, 36, 3.5);
    for (std::size_t k = 0; k < 36; ++k) EXPECT_NEAR(b[k], a[(k + 1) % 36], kGridResolution / 3.5);
  }
}

TEST(Lidar, MatchesGeometricOracleOnHandBuiltGrids) {
  const std::vector<std::vector<Rect>> layouts = {
      {},
      {{30, 30, 40, 40}},
      {{20, 1, 22, 50}, {50, 30, 52, 78}},
      {{10, 10, 12, 12}, {45, 45, 49, 60}, {60, 5, 75, 8}},
      {{25, 25, 55, 27}, {25, 53, 55, 55}, {25, 28, 27, 52}},
  };
  std::mt19937_64 rng(3);
  for (std::size_t li = 0; li < layouts.size(); ++li) {
    auto g = grid_with(80, 80, layouts[li]);
    std::uniform_real_distribution<double> pos(0.2, 3.8), ang(-3.14, 3.14);
    int checked = 0;
    while (checked < 40) {
      RobotPose p{pos(rng), pos(rng), ang(rng)};
      if (g.disc_collides(p.x, p.y, 0.05)) continue;
      ++checked;
      auto scan = lidar_scan(g, p, 36, 3.5);
      for (std::size_t k = 0; k < 36; ++k) {
        const double angle = p.theta + 2.0 * std::numbers::pi * static_cast<double>(k) / 36.0;
        EXPECT_NEAR(scan[k] * 3.5, oracle_range(g, layouts[li], p.x, p.y, angle, 3.5), g.resolution())
            << "layout " << li << " beam " << k;
      }
    }
  }
}

TEST(Patch, SeesWallAhead) {
  auto g = grid_with(100, 80, {{60, 1, 70, 78}});
  auto patch = local_patch(g, {2.5, 2.0, 0.0}, 16, 0.1);  // wall 0.5 m ahead
  for (std::size_t j = 0; j < 16; ++j) {
    EXPECT_EQ(patch[0 * 16 + j], 1.0);   // 0.75 m ahead
    EXPECT_EQ(patch[15 * 16 + j], 0.0);  // 0.75 m behind
  }
}

TEST(Trajectory, CsvHeader) {
  std::ostringstream os;
  write_trajectory_csv(os, {{0, {1, 2, 0.5}, 0.1, 0.2, -0.3, TerminalKind::none}});
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,x,y,theta,v,w,reward,terminal_kind");
  EXPECT_NE(os.str().find(",none"), std::string::npos);
}
