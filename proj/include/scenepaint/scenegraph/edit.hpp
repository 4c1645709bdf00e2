#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scenepaint/core/text_io.hpp"
#include "scenepaint/scenegraph/scene.hpp"

namespace scenepaint {

// Edit script format, version 1. One declarative edit per line, applied in
// order:
//
//   scenepaint-edit 1
//   move   <object> <tx> <ty> <tz>
//   rotate <object> <x|y|z> <degrees>      (about the object's bounds center)
//   scale  <object> <factor>               (experimental, about the center)
//   matrix <object> <16 numbers>           (left-composed world-space delta)
//   add    <name> <mesh> <class> <16 numbers>
//   remove <object>

/// Bounds of one object's transformed vertices.
inline AABB object_bounds(const Scene& scene, std::size_t index) {
  AABB box;
  for (const auto& v : scene.world_vertices(index)) box.expand(v);
  return box;
}

inline Mat4 about_center(const Mat4& m, const Vec3& c) { return translation(c) * m * translation(-c); }

/// Applies an edit script. Object-relative edits (rotate, scale) resolve
/// their pivot against the scene as it stands when the line is reached.
inline Scene apply_edit_script(const Scene& scene, const std::string& name, std::string_view content) {
  namespace fs = std::filesystem;
  TextReader reader(name, content);
  const int version = reader.expect_header("scenepaint-edit");
  if (version != 1) throw ValidationError(name + ": unsupported edit format version " + std::to_string(version));
  Scene current = scene;
  while (const TextLine* line = reader.next()) {
    const auto& op = line->tokens[0];
    auto need = [&](std::size_t n) {
      if (line->tokens.size() != n) reader.fail(*line, "'" + op + "' expects " + std::to_string(n - 1) + " fields");
    };
    auto object_index = [&](const std::string& id) {
      auto idx = current.find_object(id);
      if (!idx) reader.fail(*line, "unknown object id '" + id + "'");
      return *idx;
    };
    auto read_matrix = [&](std::size_t first) {
      Mat4 m;
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) m(r, c) = reader.parse_double(*line, first + 4 * r + c);
      }
      return m;
    };
    try {
      if (op == "move") {
        need(5);
        const Vec3 t(reader.parse_double(*line, 2), reader.parse_double(*line, 3), reader.parse_double(*line, 4));
        current = apply_transform(current, line->tokens[1], translation(t));
      } else if (op == "rotate") {
        need(4);
        const auto& axis = line->tokens[2];
        if (axis != "x" && axis != "y" && axis != "z") reader.fail(*line, "axis must be x, y or z");
        const std::size_t idx = object_index(line->tokens[1]);
        const Mat4 r = rotation_about_axis(axis[0] - 'x', reader.parse_double(*line, 3));
        current = apply_transform(current, line->tokens[1], about_center(r, object_bounds(current, idx).center()));
      } else if (op == "scale") {
        need(3);
        const double s = reader.parse_double(*line, 2);
        if (!(s > 0.0)) reader.fail(*line, "scale factor must be positive");
        const std::size_t idx = object_index(line->tokens[1]);
        Mat4 m = Mat4::Identity();
        m.topLeftCorner<3, 3>() *= s;
        warn("uniform scale edits are experimental");
        current = apply_transform(current, line->tokens[1], about_center(m, object_bounds(current, idx).center()), true);
      } else if (op == "matrix") {
        need(18);
        current = apply_transform(current, line->tokens[1], read_matrix(2));
      } else if (op == "add") {
        need(20);
        ObjectInstance obj;
        obj.name = line->tokens[1];
        obj.mesh_ref = line->tokens[2];
        obj.class_id = reader.parse_int(*line, 3);
        obj.transform = read_matrix(4);
        for (const auto& o : current.objects()) {
          if (o.name == obj.name) reader.fail(*line, "object '" + obj.name + "' already exists");
        }
        auto meshes = current.meshes();
        if (!meshes.contains(obj.mesh_ref)) {
          const fs::path p = fs::path(obj.mesh_ref).is_absolute() ? fs::path(obj.mesh_ref)
                                                                   : current.base_dir() / obj.mesh_ref;
          meshes[obj.mesh_ref] = std::make_shared<const Mesh>(load_obj(p));
        }
        auto objects = current.objects();
        objects.push_back(std::move(obj));
        current = Scene::create(std::move(objects), std::move(meshes), current.class_count(), current.base_dir());
      } else if (op == "remove") {
        need(2);
        const std::size_t idx = object_index(line->tokens[1]);
        auto objects = current.objects();
        const std::string ref = objects[idx].mesh_ref;
        objects.erase(objects.begin() + static_cast<std::ptrdiff_t>(idx));
        auto meshes = current.meshes();
        bool still_used = false;
        for (const auto& o : objects) still_used = still_used || o.mesh_ref == ref;
        if (!still_used) meshes.erase(ref);
        current = Scene::create(std::move(objects), std::move(meshes), current.class_count(), current.base_dir());
      } else {
        reader.fail(*line, "unknown edit '" + op + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      reader.fail(*line, e.what());
    }
  }
  return current;
}

inline Scene apply_edit_file(const Scene& scene, const std::filesystem::path& path) {
  return apply_edit_script(scene, path.string(), read_text(path));
}

}  // namespace scenepaint
