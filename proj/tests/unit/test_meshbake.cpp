#include <gtest/gtest.h>

#include <cmath>

#include "scenepaint/meshbake/bake.hpp"
#include "test_util.hpp"

using namespace scenepaint;

namespace {

// n x n grid of quads in the plane z = depth, spanning [lo, hi] in x and y.
Mesh grid(double depth, double lo, double hi, int n) {
  Mesh m;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) m.vertices.emplace_back(lo + (hi - lo) * i / n, lo + (hi - lo) * j / n, depth);
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = j * (n + 1) + i;
      m.triangles.push_back({a, a + 1, a + n + 2});
      m.triangles.push_back({a, a + n + 2, a + n + 1});
    }
  }
  return m;
}

// The listed planes plus a box behind the camera that gives the scene volume.
Scene planes(const std::vector<std::pair<Mesh, int>>& parts, int classes = 3) {
  Scene::MeshTable meshes;
  std::vector<ObjectInstance> objects;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string name = "p" + std::to_string(i);
    meshes[name] = std::make_shared<const Mesh>(parts[i].first);
    objects.push_back({name, name, Mat4::Identity(), parts[i].second});
  }
  meshes["back"] = std::make_shared<const Mesh>(make_box(Vec3(-0.2, -0.2, -3.0), Vec3(0.2, 0.2, -2.6)));
  objects.push_back({"back", "back", Mat4::Identity(), classes});
  return Scene::create(objects, meshes, classes);
}

GeneratorConfig small_config(GeneratorKind kind, int classes) {
  GeneratorConfig c;
  c.kind = kind;
  c.layers = 3;
  c.hidden = 8;
  c.ne_dim = 4;
  c.ne_hidden = 4;
  c.style_dim = 4;
  c.classes = classes;
  return c;
}

// Ray from the camera center to p hits another triangle strictly in front.
bool occluded(const Scene& scene, const Camera& cam, const Vec3& p) {
  const Vec3 o = cam.center();
  const Vec3 dir = p - o;
  for (std::size_t oi = 0; oi < scene.objects().size(); ++oi) {
    const auto verts = scene.world_vertices(oi);
    for (const auto& t : scene.mesh_of(scene.objects()[oi]).triangles) {
      const auto hit = intersect_ray_triangle(o, dir, verts[t[0]], verts[t[1]], verts[t[2]]);
      if (hit && hit->t < 1.0 - 1e-3) return true;
    }
  }
  return false;
}

}  // namespace

TEST(Bake, ConstantPainterColorsEveryVisibleVertex) {
  const auto scene = planes({{grid(2.0, -0.5, 0.5, 4), 1}});
  auto gen = build_generator<float>(small_config(GeneratorKind::cnn, 3), 1);
  gen.bounds = scene.bounds();
  auto& last = gen.layers.back();
  last.kernel.fill(0.0f);
  last.bias[0] = 0.2f, last.bias[1] = -0.4f, last.bias[2] = 0.6f;
  const Camera cam = test::small_camera(Mat4::Identity(), 32, 32);
  const auto z = sample_styles(1, 4, 1)[0];
  const auto result = bake(scene, gen, {cam}, z);
  for (std::size_t i = 0; i < 25; ++i) {
    ASSERT_EQ(result.mesh.samples[i], 1u) << i;
    for (int ch = 0; ch < 3; ++ch) {
      EXPECT_NEAR(result.mesh.colors[i][ch], (std::tanh(last.bias[ch]) + 1.0f) * 0.5f, 1e-6);
    }
  }
  EXPECT_EQ(result.mesh.unpainted(), 8u);  // the box behind the camera
  for (std::size_t i = 25; i < 33; ++i) EXPECT_EQ(result.mesh.colors[i], gen.palette[2]);
  EXPECT_FALSE(result.warnings.empty());
}

TEST(Bake, OccludedVerticesNeverSampled) {
  // front plane hides the middle of the back plane
  const auto scene = planes({{grid(3.0, -1.0, 1.0, 10), 1}, {grid(1.5, -0.25, 0.25, 2), 2}});
  auto gen = build_generator<float>(small_config(GeneratorKind::cnn, 3), 2);
  gen.bounds = scene.bounds();
  const auto z = sample_styles(1, 4, 1)[0];
  for (const Mat4& pose : std::vector<Mat4>{Mat4::Identity(), translation(Vec3(0.3, -0.2, 0.0))}) {
    const Camera cam = test::small_camera(pose, 48, 48);
    const auto result = bake(scene, gen, {cam}, z);
    int hidden = 0, seen = 0;
    for (std::size_t i = 0; i < 121; ++i) {
      if (occluded(scene, cam, result.mesh.vertices[i])) {
        ++hidden;
        EXPECT_EQ(result.mesh.samples[i], 0u) << i;
      } else if (result.mesh.samples[i] > 0) {
        ++seen;
      }
    }
    EXPECT_GT(hidden, 0);
    EXPECT_GT(seen, 0);
  }
}

TEST(Bake, MlpSamplesEqualThePainterAtTheVertex) {
  const auto scene = planes({{grid(2.0, -0.5, 0.5, 4), 1}});
  auto gen = build_generator<float>(small_config(GeneratorKind::mlp, 3), 3);
  gen.bounds = scene.bounds();
  const auto z = sample_styles(1, 4, 5)[0];
  const std::vector<Camera> cams{test::small_camera(Mat4::Identity(), 32, 32),
                                 test::small_camera(translation(Vec3(0.2, 0.1, 0.1)), 32, 32)};
  const auto result = bake(scene, gen, cams, z);
  int multi = 0;
  for (std::size_t i = 0; i < 25; ++i) {
    FrameMaps one(1, 1, 3);
    one.label[0] = 1;
    one.depth[0] = 1.0f;
    for (int k = 0; k < 3; ++k) one.coord[k] = static_cast<float>(result.mesh.vertices[i][k]);
    const auto direct = paint_view(gen, one, z);
    for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(result.mesh.colors[i][ch], direct.at(0, ch));
    multi += result.mesh.samples[i] >= 2;
  }
  EXPECT_GT(multi, 10);
}

TEST(Bake, StyleChangesBakedColors) {
  const auto scene = planes({{grid(2.0, -0.5, 0.5, 4), 1}});
  auto gen = build_generator<float>(small_config(GeneratorKind::cnn, 3), 4);
  gen.bounds = scene.bounds();
  const auto zs = sample_styles(2, 4, 6);
  const Camera cam = test::small_camera(Mat4::Identity(), 32, 32);
  const auto a = bake(scene, gen, {cam}, zs[0]).mesh, b = bake(scene, gen, {cam}, zs[1]).mesh;
  double diff = 0.0;
  for (std::size_t i = 0; i < 25; ++i) {
    for (int ch = 0; ch < 3; ++ch) diff += std::abs(a.colors[i][ch] - b.colors[i][ch]);
  }
  EXPECT_GT(diff / 75.0, 1e-4);
}

TEST(Bake, Errors) {
  const auto scene = planes({{grid(2.0, -0.5, 0.5, 2), 1}});
  auto gen = build_generator<float>(small_config(GeneratorKind::cnn, 3), 1);
  gen.bounds = scene.bounds();
  const auto z = sample_styles(1, 4, 1)[0];
  EXPECT_THROW(bake(scene, gen, {}, z), ValidationError);
  auto narrow = gen;
  narrow.bounds.max.x() -= 0.1;
  EXPECT_THROW(bake(scene, narrow, {test::small_camera(Mat4::Identity())}, z), ValidationError);
  BakeOptions point;
  point.sampling = BakeSampling::point;
  EXPECT_THROW(bake(scene, gen, {test::small_camera(Mat4::Identity())}, z, point), ValidationError);
}

TEST(Ply, RoundTripAndDeterminism) {
  const auto scene = planes({{grid(2.0, -0.5, 0.5, 3), 1}});
  auto gen = build_generator<float>(small_config(GeneratorKind::mlp, 3), 1);
  gen.bounds = scene.bounds();
  const auto mesh = bake(scene, gen, {test::small_camera(Mat4::Identity())}, sample_styles(1, 4, 1)[0]).mesh;
  const auto text = format_ply(mesh);
  EXPECT_EQ(text, format_ply(mesh));
  const auto back = parse_ply("m.ply", text);
  ASSERT_EQ(back.vertices.size(), mesh.vertices.size());
  EXPECT_EQ(back.triangles, mesh.triangles);
  EXPECT_EQ(back.samples, mesh.samples);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    EXPECT_LT((back.vertices[i] - mesh.vertices[i]).norm(), 1e-6);
    for (int ch = 0; ch < 3; ++ch) EXPECT_LE(std::abs(back.colors[i][ch] - mesh.colors[i][ch]), 0.5f / 255.0f + 1e-6f);
  }
  test::TempDir dir;
  export_ply(mesh, dir.path / "m.ply");
  EXPECT_EQ(import_ply(dir.path / "m.ply").samples, mesh.samples);
}

TEST(Ply, Errors) {
  EXPECT_THROW(format_ply(ColoredMesh{}), ValidationError);
  EXPECT_THROW(parse_ply("x.ply", "plx\n"), ParseError);
  EXPECT_THROW(parse_ply("x.ply", "ply\nelement vertex 2\nend_header\n0 0 0 1 2 3 1\n"), ParseError);
}
