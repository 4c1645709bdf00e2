// Writes the shipped toy room: ten box-built objects, 20 cameras at 64x64
// and three style vectors.
//
//   make_toy_room <out_dir>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>

#include "scenepaint.hpp"

namespace fs = std::filesystem;
using namespace scenepaint;

namespace {

struct Part {
  Vec3 lo, hi;
};

Mesh boxes(std::initializer_list<Part> parts) {
  Mesh m;
  for (const auto& p : parts) append_mesh(m, make_box(p.lo, p.hi));
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_toy_room <out_dir>\n";
    return 1;
  }
  const fs::path out = argv[1];
  fs::create_directories(out / "meshes");

  // room interior: x in [-2, 2], y in [0, 2.5], z in [-2, 2]; y is up
  struct Object {
    const char* name;
    int class_id;
    Mesh mesh;
  };
  const double t = 0.1;
  std::vector<Object> objects{
      {"floor", 1, boxes({{{-2 - t, -t, -2 - t}, {2 + t, 0, 2 + t}}})},
      {"ceiling", 2, boxes({{{-2 - t, 2.5, -2 - t}, {2 + t, 2.5 + t, 2 + t}}})},
      {"wall_north", 3, boxes({{{-2, 0, 2}, {2, 2.5, 2 + t}}})},
      {"wall_south", 3, boxes({{{-2, 0, -2 - t}, {2, 2.5, -2}}})},
      {"wall_east", 4, boxes({{{2, 0, -2}, {2 + t, 2.5, 2}}})},
      {"wall_west", 4, boxes({{{-2 - t, 0, -2}, {-2, 2.5, 2}}})},
      {"bed", 5, boxes({{{-1.9, 0, 0.2}, {-0.6, 0.45, 1.95}}, {{-1.9, 0.45, 1.7}, {-0.6, 1.0, 1.95}}})},
      {"table", 6,
       boxes({{{0.3, 0.7, -0.6}, {1.3, 0.78, 0.2}},
              {{0.35, 0, -0.55}, {0.43, 0.7, -0.47}},
              {{1.17, 0, -0.55}, {1.25, 0.7, -0.47}},
              {{0.35, 0, 0.07}, {0.43, 0.7, 0.15}},
              {{1.17, 0, 0.07}, {1.25, 0.7, 0.15}}})},
      {"chair", 7,
       boxes({{{0.55, 0.42, -1.35}, {1.0, 0.48, -0.9}},
              {{0.55, 0.48, -1.35}, {1.0, 0.95, -1.29}},
              {{0.57, 0, -1.33}, {0.63, 0.42, -1.27}},
              {{0.92, 0, -1.33}, {0.98, 0.42, -1.27}},
              {{0.57, 0, -0.98}, {0.63, 0.42, -0.92}},
              {{0.92, 0, -0.98}, {0.98, 0.42, -0.92}}})},
      {"cabinet", 8, boxes({{{1.4, 0, 1.3}, {1.95, 1.6, 1.95}}})},
  };

  std::string scene = "scenepaint-scene 1\nclasses 14\n";
  for (const auto& o : objects) {
    const std::string ref = std::string("meshes/") + o.name + ".obj";
    save_obj(o.mesh, out / ref);
    scene += std::string("object ") + o.name + " " + ref + " " + std::to_string(o.class_id) +
             " 1 0 0 0 0 1 0 0 0 0 1 0 0 0 0 1\n";
  }
  write_text_file(out / "scene.txt", scene);

  std::vector<Camera> cams;
  for (int i = 0; i < 20; ++i) {
    const double a = 2.0 * std::numbers::pi * i / 20.0;
    const double r = 1.3 + 0.2 * (i % 3);
    const Vec3 eye(r * std::cos(a), 1.3 + 0.25 * ((i % 4) - 1.5), r * std::sin(a));
    const double b = a + std::numbers::pi + 0.5 * ((i % 5) - 2) / 2.0;
    const Vec3 target(1.5 * std::cos(b), 0.6 + 0.2 * (i % 2), 1.5 * std::sin(b));
    cams.push_back(make_camera(64, 64, 70.0, look_at(eye, target)));
  }
  save_cameras(cams, out / "cameras.txt");
  save_styles(sample_styles(3, kDefaultStyleDim, 2022), out / "styles.txt");
  std::cout << "wrote toy room to " << out.string() << "\n";
  return 0;
}
