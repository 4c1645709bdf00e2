#include <gtest/gtest.h>

#include "oracles/oracles.hpp"
#include "scenepaint/raster/frame_io.hpp"
#include "scenepaint/raster/projection.hpp"
#include "scenepaint/raster/rasterizer.hpp"
#include "test_util.hpp"

using namespace scenepaint;

namespace {

Camera pinhole(int w, int h, double f, const Mat4& pose = Mat4::Identity()) {
  Camera c;
  c.width = w;
  c.height = h;
  c.fx = c.fy = f;
  c.cx = w / 2.0;
  c.cy = h / 2.0;
  c.pose = pose;
  return c;
}

// Flat fixtures get a small box behind the camera so the bounds have volume.
Scene single_mesh(Mesh m, int cls = 1, int classes = 3) {
  append_mesh(m, make_box(Vec3(-0.1, -0.1, -5.0), Vec3(0.1, 0.1, -4.8)));
  Scene::MeshTable meshes{{"m", std::make_shared<const Mesh>(m)}};
  return Scene::create({ObjectInstance{"o", "m", Mat4::Identity(), cls}}, meshes, classes);
}

Mesh quad_at(double z, double half) {
  Mesh m;
  m.vertices = {Vec3(-half, -half, z), Vec3(half, -half, z), Vec3(half, half, z), Vec3(-half, half, z)};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

}  // namespace

TEST(Projection, Examples) {
  const auto cam = pinhole(100, 100, 100);
  const Vec3 w = unproject(Vec2(60, 50), 2.0, cam);
  EXPECT_NEAR(w.x(), 0.2, 1e-15);
  EXPECT_NEAR(w.y(), 0.0, 1e-15);
  EXPECT_NEAR(w.z(), 2.0, 1e-15);
  const auto p = project(Vec3(0.2, 0, 2), cam);
  EXPECT_NEAR(p.pixel.x(), 60.0, 1e-12);
  EXPECT_NEAR(p.pixel.y(), 50.0, 1e-12);
  EXPECT_EQ(unproject(Vec2(50, 50), 1.0, cam), Vec3(0, 0, 1));
  const auto axis = project(Vec3(0, 0, 3), cam);
  EXPECT_EQ(axis.pixel, Vec2(50, 50));
  EXPECT_EQ(axis.depth, 3.0);
  EXPECT_THROW(unproject(Vec2(1, 1), 0.0, cam), ValidationError);
  EXPECT_THROW(project(Vec3(0, 0, -1), cam), ValidationError);
}

TEST(Projection, RoundTrip) {
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto cam = pinhole(64, 48, rng.uniform(20, 80),
                             translation(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))) *
                                 rotation_about_axis(static_cast<int>(rng.index(3)), rng.uniform(-180, 180)));
    const Vec2 px(rng.uniform(0, 64), rng.uniform(0, 48));
    const double d = rng.uniform(0.1, 10);
    const auto back = project(unproject(px, d, cam), cam);
    EXPECT_LT((back.pixel - px).norm(), 1e-6);
    EXPECT_NEAR(back.depth, d, 1e-9 * d);
  }
}

TEST(Rasterize, SquareCenterDepth) {
  const auto f = rasterize_view(single_mesh(quad_at(2.0, 1.0)), pinhole(9, 9, 10));
  const auto i = f.index(4, 4);
  EXPECT_EQ(f.label[i], 1);
  EXPECT_DOUBLE_EQ(f.depth[i], 2.0f);
}

TEST(Rasterize, CloserTriangleWins) {
  Scene::MeshTable meshes{{"far", std::make_shared<const Mesh>(quad_at(2.0, 1.0))},
                          {"near", std::make_shared<const Mesh>(quad_at(1.0, 0.5))}};
  const auto scene = Scene::create({ObjectInstance{"a", "far", Mat4::Identity(), 1},
                                    ObjectInstance{"b", "near", Mat4::Identity(), 2}},
                                   meshes, 3);
  const auto f = rasterize_view(scene, pinhole(9, 9, 10));
  EXPECT_EQ(f.label[f.index(4, 4)], 2);
  EXPECT_FLOAT_EQ(f.depth[f.index(4, 4)], 1.0f);
}

TEST(Rasterize, EqualDepthLowerObjectWins) {
  Mesh q = quad_at(2.0, 1.0);
  append_mesh(q, make_box(Vec3(-0.1, -0.1, -5.0), Vec3(0.1, 0.1, -4.8)));
  Scene::MeshTable meshes{{"q", std::make_shared<const Mesh>(q)}};
  const auto scene = Scene::create({ObjectInstance{"a", "q", Mat4::Identity(), 3},
                                    ObjectInstance{"b", "q", Mat4::Identity(), 1}},
                                   meshes, 3);
  const auto f = rasterize_view(scene, pinhole(9, 9, 10));
  EXPECT_EQ(f.label[f.index(4, 4)], 3);
}

TEST(Rasterize, InsideClosedBoxFullyCovered) {
  const auto scene = single_mesh(make_box(Vec3(-2, -2, -2), Vec3(2, 2, 2)));
  for (int k = 0; k < 6; ++k) {
    const auto cam = pinhole(32, 24, 20, rotation_about_axis(1, 60.0 * k) * rotation_about_axis(0, 17.0 * k));
    EXPECT_TRUE(rasterize_view(scene, cam).fully_covered());
  }
}

TEST(Rasterize, EmptyCoverageIsValid) {
  const auto scene = single_mesh(quad_at(-2.0, 1.0));
  const auto f = rasterize_view(scene, pinhole(8, 8, 10));
  EXPECT_EQ(f.covered_count(), 0u);
}

TEST(Rasterize, MatchesBruteForceOracle) {
  Rng rng(77);
  int checked = 0;
  for (int s = 0; s < 8; ++s) {
    const auto scene = test::random_scene(rng);
    const auto cam = pinhole(40, 30, rng.uniform(20, 40), rotation_about_axis(2, rng.uniform(-20, 20)));
    const auto f = rasterize_view(scene, cam);
    for (int k = 0; k < 150; ++k) {
      const int x = static_cast<int>(rng.index(40)), y = static_cast<int>(rng.index(30));
      const auto hit = oracle::brute_force_hit(scene, cam, x, y);
      const auto i = f.index(x, y);
      ASSERT_EQ(f.label[i], hit.label) << "scene " << s << " pixel " << x << "," << y;
      ASSERT_EQ(f.depth[i], static_cast<float>(hit.depth));
      ++checked;
    }
  }
  EXPECT_GE(checked, 100);
}

TEST(Rasterize, ReprojectionAndInvariants) {
  Rng rng(8);
  for (int s = 0; s < 5; ++s) {
    const auto scene = test::random_scene(rng);
    const auto cam = pinhole(48, 32, 30, translation(Vec3(rng.uniform(-0.3, 0.3), 0, 0)));
    const auto f = rasterize_view(scene, cam);
    for (int y = 0; y < f.height; ++y) {
      for (int x = 0; x < f.width; ++x) {
        const auto i = f.index(x, y);
        EXPECT_EQ(f.label[i] >= 1, std::isfinite(f.depth[i]));
        if (!f.covered(i)) continue;
        const auto p = project(f.world(i), cam);
        EXPECT_LE((p.pixel - Vec2(x + 0.5, y + 0.5)).norm(), 0.5);
        EXPECT_LE(std::abs(p.depth - f.depth[i]), 1e-5 * f.depth[i]);
      }
    }
  }
}

TEST(Rasterize, WorkerCountDoesNotChangeOutput) {
  Rng rng(21);
  const auto scene = test::random_scene(rng);
  const auto cam = pinhole(50, 37, 30);
  const auto one = rasterize_view(scene, cam, {1});
  EXPECT_EQ(one, rasterize_view(scene, cam, {3}));
  EXPECT_EQ(one, rasterize_view(scene, cam, {8}));
}

TEST(FrameIo, RoundTripAndCorruption) {
  Rng rng(4);
  const auto f = rasterize_view(test::random_scene(rng), pinhole(16, 12, 10));
  const auto bytes = encode_frames(f);
  EXPECT_EQ(decode_frames(bytes), f);
  EXPECT_THROW(decode_frames(bytes.substr(0, bytes.size() - 3)), CorruptDataError);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_frames(bad), CorruptDataError);
}
