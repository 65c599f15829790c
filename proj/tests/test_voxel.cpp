#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "support.hpp"

using namespace vantage;
using testing_support::uniform_in;

namespace {

VoxelGrid3 random_grid(std::mt19937_64& rng, double fill) {
  std::uniform_int_distribution<int> dim(4, 16);
  std::uniform_real_distribution<double> res(0.05, 0.5);
  std::bernoulli_distribution occ(fill);
  VoxelGrid3 g(uniform_in(rng, Vec3::Constant(-2), Vec3::Constant(2)), res(rng), {dim(rng), dim(rng), dim(rng)});
  for (std::size_t n = 0; n < g.size(); ++n)
    if (occ(rng)) g.set(g.unravel(n));
  return g;
}

AxisBox random_box_in(std::mt19937_64& rng, const AxisBox& around) {
  const Vec3 a = uniform_in(rng, around.min(), around.max());
  const Vec3 b = uniform_in(rng, around.min(), around.max());
  return AxisBox(a.cwiseMin(b), a.cwiseMax(b));
}

}  // namespace

TEST(BuildFromPoints, SinglePointAndEmpty) {
  const AxisBox unit(Vec3::Zero(), Vec3::Ones());
  const std::vector<Vec3> one{Vec3::Zero()};
  const auto g = build_from_points(one, 0.1, unit).grid;
  EXPECT_EQ(g.occupied_count(), 1u);
  EXPECT_TRUE(g.occupied({0, 0, 0}));
  EXPECT_EQ(build_from_points(std::vector<Vec3>{}, 0.1, unit).grid.occupied_count(), 0u);
}

TEST(BuildFromPoints, EveryPointLandsInAnOccupiedVoxel) {
  std::mt19937_64 rng(8);
  const AxisBox box(Vec3(-1, -2, 0), Vec3(3, 1, 2));
  std::vector<Vec3> pts;
  for (int i = 0; i < 1000; ++i) pts.push_back(uniform_in(rng, box.min(), box.max()));
  const auto g = build_from_points(pts, 0.13, box).grid;
  EXPECT_LE(g.occupied_count(), 1000u);
  for (const auto& p : pts) {
    const Vec3 rel = (p - box.min()) / 0.13;
    GridIndex i{static_cast<int>(std::floor(rel.x())), static_cast<int>(std::floor(rel.y())),
                static_cast<int>(std::floor(rel.z()))};
    for (int a = 0; a < 3; ++a) i[a] = std::min(i[a], g.dims()[a] - 1);
    EXPECT_TRUE(g.occupied(i));
  }
}

TEST(BuildFromPoints, RejectsHugeGrids) {
  try {
    build_from_points(std::vector<Vec3>{}, 1e-4, AxisBox(Vec3::Zero(), Vec3::Constant(10)));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("grid too large"), std::string::npos);
  }
}

TEST(Overlay, UnitCubeBecomesHollowShell) {
  // The origin offset keeps voxel centres off the exact reach distance at the corners.
  const VoxelGrid3 env(Vec3::Constant(-1.013), 0.05, {42, 42, 42});
  OrientedBox cube;
  cube.half_extents = Vec3::Constant(0.5);
  const std::vector<OrientedBox> boxes{cube};
  const VoxelGrid3 out = overlay_state(env, boxes);
  const double reach = env.half_diagonal();
  EXPECT_GT(out.occupied_count(), 0u);
  for (std::size_t n = 0; n < out.size(); ++n) {
    const Vec3 c = out.center_of(out.unravel(n));
    const Vec3 q = c.cwiseAbs();
    // Distance from the centre to the nearest cube face, computed directly.
    double d;
    if ((q.array() <= 0.5).all()) {
      d = 0.5 - q.maxCoeff();
    } else {
      d = (q - Vec3::Constant(0.5)).cwiseMax(0.0).norm();
    }
    EXPECT_EQ(out.occupied_linear(n), d <= reach + 1e-12) << c.transpose();
  }
}

TEST(Overlay, NoBoxesOrOutsideBoxesLeaveEnvAlone) {
  std::mt19937_64 rng(1);
  const VoxelGrid3 env = random_grid(rng, 0.1);
  EXPECT_TRUE(overlay_state(env, std::vector<OrientedBox>{}) == env);
  OrientedBox far;
  far.center = Vec3(100, 100, 100);
  far.half_extents = Vec3::Constant(1);
  EXPECT_TRUE(overlay_state(env, std::vector<OrientedBox>{far}) == env);
}

TEST(Raycast, EmptyGridAndDirectHit) {
  VoxelGrid3 g(Vec3::Zero(), 0.1, {20, 20, 20});
  EXPECT_FALSE(raycast_first_hit(g, Vec3(0.05, 0.05, 0.05), Vec3(1.95, 1.5, 1.2)).has_value());
  const Vec3 a(0.05, 1.0, 1.0), b(1.95, 1.0, 1.0);
  const GridIndex mid = *g.index_of(0.5 * (a + b));
  g.set(mid);
  const auto hit = raycast_first_hit(g, a, b);
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(hit->index, mid);
  EXPECT_NEAR((hit->center - g.center_of(mid)).norm(), 0.0, 1e-15);
}

TEST(Raycast, SegmentOutsideGridReturnsNone) {
  VoxelGrid3 g(Vec3::Zero(), 0.1, {10, 10, 10});
  for (std::size_t n = 0; n < g.size(); ++n) g.set(g.unravel(n));
  EXPECT_FALSE(raycast_first_hit(g, Vec3(-1, -1, 5), Vec3(3, 4, 5)).has_value());
  const auto entry = raycast_first_hit(g, Vec3(-1, 0.55, 0.55), Vec3(2, 0.55, 0.55));
  ASSERT_TRUE(entry.has_value());
  EXPECT_EQ(entry->index, (GridIndex{0, 5, 5}));
}

TEST(Raycast, MatchesDenseMarchOnRandomGrids) {
  std::mt19937_64 rng(12345);
  int mismatches = 0;
  for (int grid_no = 0; grid_no < 50; ++grid_no) {
    const VoxelGrid3 g = random_grid(rng, 0.08);
    AxisBox b = g.bounds();
    const Vec3 pad = 0.2 * b.sizes();
    for (int s = 0; s < 20; ++s) {
      const Vec3 a = uniform_in(rng, b.min() - pad, b.max() + pad);
      const Vec3 t = uniform_in(rng, b.min() - pad, b.max() + pad);
      const auto got = raycast_first_hit(g, a, t);
      const auto want = oracle::march_first_hit(g, a, t);
      if (got.has_value() != want.has_value() || (got && !(got->index == *want))) ++mismatches;
    }
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(Project, BandSelectsColumns) {
  VoxelGrid3 g(Vec3::Zero(), 0.1, {5, 5, 30});
  g.set({1, 2, 5});
  g.set({3, 3, 25});
  const OccupancyGrid2 p = project_to_2d(g, 0.0, 1.0);
  EXPECT_TRUE(p.occupied(1, 2));
  EXPECT_FALSE(p.occupied(3, 3));
  EXPECT_EQ(p.occupied_count(), 1u);
}

TEST(Project, RandomGridEqualsColumnOr) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const VoxelGrid3 g = random_grid(rng, 0.05);
    const double z0 = g.origin().z() + 0.3 * g.bounds().sizes().z();
    const double z1 = z0 + 0.4 * g.bounds().sizes().z();
    const OccupancyGrid2 p = project_to_2d(g, z0, z1);
    for (int x = 0; x < g.dims()[0]; ++x)
      for (int y = 0; y < g.dims()[1]; ++y) {
        bool any = false;
        for (int z = 0; z < g.dims()[2]; ++z) {
          const double zc = g.origin().z() + (z + 0.5) * g.resolution();
          any = any || (zc >= z0 && zc <= z1 && g.occupied({x, y, z}));
        }
        EXPECT_EQ(p.occupied(x, y), any);
      }
  }
}

TEST(RegionOccupied, KnownVoxelAndEmptyRegion) {
  VoxelGrid3 g(Vec3::Zero(), 0.1, {10, 10, 10});
  g.set({4, 4, 4});
  EXPECT_TRUE(region_occupied(g, AxisBox(Vec3::Constant(0.38), Vec3::Constant(0.52))));
  EXPECT_FALSE(region_occupied(g, AxisBox(Vec3::Constant(0.6), Vec3::Constant(0.9))));
}

TEST(RegionOccupied, RandomBoxesMatchExhaustiveScan) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const VoxelGrid3 g = random_grid(rng, 0.02);
    AxisBox around = g.bounds();
    around.min().array() -= 0.3;
    around.max().array() += 0.3;
    for (int k = 0; k < 30; ++k) {
      const AxisBox box = random_box_in(rng, around);
      EXPECT_EQ(region_occupied(g, box), oracle::scan_region(g, box));
    }
  }
}
