#include <gtest/gtest.h>

#include <filesystem>

#include "scenepaint/core/random.hpp"
#include "scenepaint/scenegraph/camera.hpp"
#include "scenepaint/scenegraph/edit.hpp"
#include "scenepaint/scenegraph/scene.hpp"
#include "scenepaint/scenegraph/style.hpp"
#include "test_util.hpp"

using namespace scenepaint;

namespace {

Scene cube_scene(const Mat4& t, int cls = 5, int classes = 8) {
  Scene::MeshTable meshes{{"cube.obj", std::make_shared<const Mesh>(make_box(Vec3(-0.5, -0.5, -0.5), Vec3(0.5, 0.5, 0.5)))}};
  return Scene::create({ObjectInstance{"cube", "cube.obj", t, cls}}, meshes, classes);
}

}  // namespace

TEST(Scene, UnitCubeBounds) {
  const auto s = cube_scene(Mat4::Identity());
  EXPECT_EQ(s.bounds().min, Vec3(-0.5, -0.5, -0.5));
  EXPECT_EQ(s.bounds().max, Vec3(0.5, 0.5, 0.5));
}

TEST(Scene, TranslatedCubeBounds) {
  const auto s = cube_scene(translation(Vec3(1, 0, 0)));
  EXPECT_EQ(s.bounds().min, Vec3(0.5, -0.5, -0.5));
  EXPECT_EQ(s.bounds().max, Vec3(1.5, 0.5, 0.5));
}

TEST(Scene, LoadFromFiles) {
  test::TempDir dir;
  save_obj(make_box(Vec3(-0.5, -0.5, -0.5), Vec3(0.5, 0.5, 0.5)), dir.path / "cube.obj");
  write_text_file(dir.path / "scene.txt",
                  "scenepaint-scene 1\nclasses 6\nobject box cube.obj 5 1 0 0 0 0 1 0 0 0 0 1 0 0 0 0 1\n");
  const auto s = load_scene(dir.path / "scene.txt");
  ASSERT_EQ(s.objects().size(), 1u);
  EXPECT_EQ(s.objects()[0].class_id, 5);
  EXPECT_EQ(s.bounds().max, Vec3(0.5, 0.5, 0.5));

  // save and reload is stable
  save_scene(s, dir.path / "copy.txt");
  EXPECT_EQ(read_text(dir.path / "copy.txt"), format_scene(load_scene(dir.path / "copy.txt"), dir.path));
}

TEST(Scene, MissingMeshIsAnError) {
  test::TempDir dir;
  write_text_file(dir.path / "scene.txt",
                  "scenepaint-scene 1\nclasses 6\nobject box nope.obj 5 1 0 0 0 0 1 0 0 0 0 1 0 0 0 0 1\n");
  EXPECT_THROW(load_scene(dir.path / "scene.txt"), IoError);
}

TEST(Scene, ClassOutOfRange) {
  EXPECT_THROW(cube_scene(Mat4::Identity(), 9, 8), ValidationError);
  EXPECT_THROW(cube_scene(Mat4::Identity(), 0, 8), ValidationError);
}

TEST(Scene, ZeroExtentBounds) {
  Mesh flat;
  flat.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  flat.triangles = {{0, 1, 2}};
  Scene::MeshTable meshes{{"tri", std::make_shared<const Mesh>(flat)}};
  EXPECT_THROW(Scene::create({ObjectInstance{"t", "tri", Mat4::Identity(), 1}}, meshes, 1), ValidationError);
}

TEST(Scene, NonRigidTransformRejected) {
  Mat4 shear = Mat4::Identity();
  shear(0, 1) = 0.5;
  EXPECT_THROW(cube_scene(shear), ValidationError);
  Mat4 mirror = Mat4::Identity();
  mirror(0, 0) = -1;
  EXPECT_THROW(cube_scene(mirror), ValidationError);
}

TEST(ApplyTransform, IdentityLeavesSceneUnchanged) {
  const auto s = cube_scene(translation(Vec3(0.2, 0, 0)));
  const auto e = apply_transform(s, "cube", Mat4::Identity());
  EXPECT_EQ(format_scene(s), format_scene(e));
}

TEST(ApplyTransform, TranslationShiftsVertices) {
  const auto s = cube_scene(Mat4::Identity());
  const auto e = apply_transform(s, "cube", translation(Vec3(0.3, 0, 0)));
  const auto a = s.world_vertices(0), b = e.world_vertices(0);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(b[i].isApprox(a[i] + Vec3(0.3, 0, 0), 1e-15));
}

TEST(ApplyTransform, YawMatchesPerVertexRotation) {
  const auto s = cube_scene(translation(Vec3(1, 0, 2)));
  const Mat4 yaw = rotation_about_axis(1, 90.0);
  const auto e = apply_transform(s, "cube", yaw);
  const auto before = s.world_vertices(0), after = e.world_vertices(0);
  const Mat3 r = yaw.topLeftCorner<3, 3>();
  for (std::size_t i = 0; i < before.size(); ++i) {
    const Vec3 expect(r(0, 0) * before[i].x() + r(0, 1) * before[i].y() + r(0, 2) * before[i].z(),
                      r(1, 0) * before[i].x() + r(1, 1) * before[i].y() + r(1, 2) * before[i].z(),
                      r(2, 0) * before[i].x() + r(2, 1) * before[i].y() + r(2, 2) * before[i].z());
    EXPECT_LT((after[i] - expect).norm(), 1e-12);
  }
}

TEST(ApplyTransform, InverseRestoresTransform) {
  Rng rng(3);
  const auto s = cube_scene(translation(Vec3(0.1, 0.2, 0.3)));
  for (int trial = 0; trial < 10; ++trial) {
    const Mat4 d = translation(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))) *
                   rotation_about_axis(static_cast<int>(rng.index(3)), rng.uniform(-180, 180));
    const auto back = apply_transform(apply_transform(s, "cube", d), "cube", rigid_inverse(d));
    EXPECT_LT((back.objects()[0].transform - s.objects()[0].transform).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ApplyTransform, Errors) {
  const auto s = cube_scene(Mat4::Identity());
  EXPECT_THROW(apply_transform(s, "ghost", Mat4::Identity()), ValidationError);
  Mat4 scale = Mat4::Identity();
  scale.topLeftCorner<3, 3>() *= 2.0;
  EXPECT_THROW(apply_transform(s, "cube", scale), ValidationError);
  EXPECT_NO_THROW(apply_transform(s, "cube", scale, true));
}

TEST(ApplyTransform, BoundsContainVertices) {
  Rng rng(9);
  auto s = cube_scene(Mat4::Identity());
  for (int i = 0; i < 20; ++i) {
    s = apply_transform(s, "cube", rotation_about_axis(static_cast<int>(rng.index(3)), rng.uniform(-90, 90)));
    for (const auto& v : s.world_vertices(0)) EXPECT_TRUE(s.bounds().contains(v));
  }
}

TEST(NormalizeCoord, Examples) {
  const AABB b{Vec3(0, 0, 0), Vec3(2, 4, 8)};
  EXPECT_EQ(normalize_coord(Vec3(1, 1, 1), b), Vec3(0, -0.5, -0.75));
  EXPECT_EQ(normalize_coord(b.min, b), Vec3(-1, -1, -1));
  EXPECT_EQ(normalize_coord(b.center(), b), Vec3(0, 0, 0));
  EXPECT_THROW(normalize_coord(Vec3(0, 0, 0), AABB{Vec3(0, 0, 0), Vec3(1, 0, 1)}), ValidationError);
}

TEST(NormalizeCoord, RoundTrip) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const Vec3 lo(rng.uniform(-5, 0), rng.uniform(-5, 0), rng.uniform(-5, 0));
    const AABB b{lo, lo + Vec3(rng.uniform(0.1, 3), rng.uniform(0.1, 3), rng.uniform(0.1, 3))};
    const Vec3 x(rng.uniform(b.min.x(), b.max.x()), rng.uniform(b.min.y(), b.max.y()), rng.uniform(b.min.z(), b.max.z()));
    const Vec3 back = unnormalize_coord(normalize_coord(x, b), b);
    EXPECT_LE((back - x).norm(), 1e-12 * std::max(1.0, x.norm()));
  }
}

TEST(Camera, ParseErrorsCarryLineNumbers) {
  const std::string bad = "scenepaint-cameras 1\ncamera 64 64 50 50 32 32 1 0 0 0 0 1 0 0 0 0 1 0\ncamera 64 64 50\n";
  try {
    parse_cameras("cams.txt", bad);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parse_cameras("c", "scenepaint-cameras 1\ncamera 64 64 -5 50 32 32 1 0 0 0 0 1 0 0 0 0 1 0\n"),
               ValidationError);
}

TEST(Camera, RoundTrip) {
  std::vector<Camera> cams{make_camera(64, 48, 70, look_at(Vec3(1, 1, 1), Vec3(0, 0, 0))),
                           make_camera(32, 32, 90, Mat4::Identity())};
  const auto back = parse_cameras("c", format_cameras(cams));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].pose, cams[0].pose);
  EXPECT_EQ(back[1].fx, cams[1].fx);
}

TEST(Styles, DeterministicAndRoundTrip) {
  const auto a = sample_styles(3, 8, 42), b = sample_styles(3, 8, 42);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[2].z, b[2].z);
  const auto back = parse_styles("s", format_styles(a));
  EXPECT_EQ(back[1].z, a[1].z);
  EXPECT_THROW(parse_styles("s", "scenepaint-styles 1\n1 2 3\n1 2\n"), ValidationError);
}

TEST(Edit, EmptyScriptKeepsScene) {
  const auto s = cube_scene(Mat4::Identity());
  EXPECT_EQ(format_scene(apply_edit_script(s, "e", "scenepaint-edit 1\n")), format_scene(s));
}

TEST(Edit, MoveRotateAddRemove) {
  const auto s = cube_scene(Mat4::Identity());
  const auto e = apply_edit_script(s, "e",
                                   "scenepaint-edit 1\n"
                                   "move cube 0.5 0 0\n"
                                   "add cube2 cube.obj 3 1 0 0 0 0 1 0 2 0 0 1 0 0 0 0 1\n"
                                   "rotate cube2 y 90\n"
                                   "remove cube\n");
  ASSERT_EQ(e.objects().size(), 1u);
  EXPECT_EQ(e.objects()[0].name, "cube2");
  EXPECT_NEAR(e.bounds().center().y(), 2.0, 1e-12);
}

TEST(Edit, ErrorsReportLine) {
  const auto s = cube_scene(Mat4::Identity());
  try {
    apply_edit_script(s, "e", "scenepaint-edit 1\nmove cube 1 0 0\nmove ghost 1 0 0\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}
