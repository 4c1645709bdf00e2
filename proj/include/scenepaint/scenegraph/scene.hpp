#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scenepaint/core/error.hpp"
#include "scenepaint/core/text_io.hpp"
#include "scenepaint/scenegraph/geometry.hpp"
#include "scenepaint/scenegraph/mesh.hpp"

namespace scenepaint {

inline constexpr int kDefaultClassCount = 150;

struct ObjectInstance {
  std::string name;
  /// Mesh identifier; the path as written in the scene file.
  std::string mesh_ref;
  Mat4 transform = Mat4::Identity();
  int class_id = 1;
};

/// Labeled objects placed in the world. Values are immutable once built;
/// edits return new scenes that share mesh storage.
class Scene {
 public:
  using MeshTable = std::map<std::string, std::shared_ptr<const Mesh>>;

  Scene() = default;

  /// Validates the inputs and computes bounds from the transformed geometry.
  static Scene create(std::vector<ObjectInstance> objects, MeshTable meshes, int class_count,
                      std::filesystem::path base_dir = {}) {
    Scene s;
    s.objects_ = std::move(objects);
    s.meshes_ = std::move(meshes);
    s.class_count_ = class_count;
    s.base_dir_ = std::move(base_dir);
    s.validate_and_bound();
    return s;
  }

  const std::vector<ObjectInstance>& objects() const noexcept { return objects_; }
  const MeshTable& meshes() const noexcept { return meshes_; }
  const AABB& bounds() const noexcept { return bounds_; }
  int class_count() const noexcept { return class_count_; }
  const std::filesystem::path& base_dir() const noexcept { return base_dir_; }

  const Mesh& mesh_of(const ObjectInstance& obj) const { return *meshes_.at(obj.mesh_ref); }

  /// Object index by name, or by decimal index when no name matches.
  std::optional<std::size_t> find_object(const std::string& id) const {
    for (std::size_t i = 0; i < objects_.size(); ++i) {
      if (objects_[i].name == id) return i;
    }
    std::size_t idx = 0;
    auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), idx);
    if (ec == std::errc() && ptr == id.data() + id.size() && idx < objects_.size()) return idx;
    return std::nullopt;
  }

  /// World-space vertices of one object.
  std::vector<Vec3> world_vertices(std::size_t object_index) const {
    const auto& obj = objects_.at(object_index);
    const auto& mesh = mesh_of(obj);
    std::vector<Vec3> out;
    out.reserve(mesh.vertices.size());
    for (const auto& v : mesh.vertices) out.push_back(transform_point(obj.transform, v));
    return out;
  }

 private:
  void validate_and_bound() {
    if (class_count_ < 1) throw ValidationError("class count must be >= 1");
    if (objects_.empty()) throw ValidationError("scene has no objects");
    bounds_ = AABB::empty();
    for (std::size_t i = 0; i < objects_.size(); ++i) {
      const auto& obj = objects_[i];
      if (obj.class_id < 1 || obj.class_id > class_count_) {
        throw ValidationError("object '" + obj.name + "': class id " + std::to_string(obj.class_id) +
                              " out of range [1, " + std::to_string(class_count_) + "]");
      }
      auto it = meshes_.find(obj.mesh_ref);
      if (it == meshes_.end() || !it->second) {
        throw ValidationError("object '" + obj.name + "': missing mesh '" + obj.mesh_ref + "'");
      }
      if (!is_rigid(obj.transform)) {
        throw ValidationError("object '" + obj.name + "': transform is not rigid with positive determinant");
      }
      const Mesh& mesh = *it->second;
      for (const auto& t : mesh.triangles) {
        for (int k : t) {
          if (k < 0 || k >= static_cast<int>(mesh.vertices.size())) {
            throw ValidationError("mesh '" + obj.mesh_ref + "': triangle index out of range");
          }
        }
      }
      if (count_valid_triangles(mesh) == 0) {
        throw ValidationError("mesh '" + obj.mesh_ref + "' has no non-degenerate triangle");
      }
      for (const auto& v : mesh.vertices) bounds_.expand(transform_point(obj.transform, v));
    }
    if (!bounds_.has_positive_extent()) throw ValidationError("scene bounds have zero extent on some axis");
  }

  std::vector<ObjectInstance> objects_;
  MeshTable meshes_;
  AABB bounds_;
  int class_count_ = 0;
  std::filesystem::path base_dir_;
};

/// Returns `scene` with object `object_id`'s transform left-composed by
/// `delta` and bounds recomputed.
inline Scene apply_transform(const Scene& scene, const std::string& object_id, const Mat4& delta,
                             bool allow_uniform_scale = false) {
  const auto idx = scene.find_object(object_id);
  if (!idx) throw ValidationError("unknown object id '" + object_id + "'");
  if (!is_rigid(delta, allow_uniform_scale)) throw ValidationError("edit transform is not rigid");
  auto objects = scene.objects();
  objects[*idx].transform = delta * objects[*idx].transform;
  return Scene::create(std::move(objects), scene.meshes(), scene.class_count(), scene.base_dir());
}

// Scene description format, version 1:
//
//   scenepaint-scene 1
//   classes <C>
//   object <name> <mesh path> <class id> <16 numbers, 4x4 row-major>
//
// Mesh paths are relative to the scene file's directory unless absolute.

inline Scene parse_scene(const std::string& name, std::string_view content, const std::filesystem::path& base_dir) {
  TextReader reader(name, content);
  const int version = reader.expect_header("scenepaint-scene");
  if (version != 1) throw ValidationError(name + ": unsupported scene format version " + std::to_string(version));
  std::optional<int> classes;
  std::vector<ObjectInstance> objects;
  Scene::MeshTable meshes;
  while (const TextLine* line = reader.next()) {
    const auto& key = line->tokens[0];
    if (key == "classes") {
      if (line->tokens.size() != 2) reader.fail(*line, "expected 'classes <count>'");
      classes = reader.parse_int(*line, 1);
    } else if (key == "object") {
      if (line->tokens.size() != 20) reader.fail(*line, "expected 'object <name> <mesh> <class> <16 numbers>'");
      ObjectInstance obj;
      obj.name = line->tokens[1];
      obj.mesh_ref = line->tokens[2];
      obj.class_id = reader.parse_int(*line, 3);
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) obj.transform(r, c) = reader.parse_double(*line, 4 + 4 * r + c);
      }
      for (const auto& other : objects) {
        if (other.name == obj.name) reader.fail(*line, "duplicate object name '" + obj.name + "'");
      }
      if (!meshes.contains(obj.mesh_ref)) {
        const std::filesystem::path p = std::filesystem::path(obj.mesh_ref).is_absolute()
                                            ? std::filesystem::path(obj.mesh_ref)
                                            : base_dir / obj.mesh_ref;
        meshes[obj.mesh_ref] = std::make_shared<const Mesh>(load_obj(p));
      }
      objects.push_back(std::move(obj));
    } else {
      reader.fail(*line, "unknown record '" + key + "'");
    }
  }
  if (!classes) throw ValidationError(name + ": missing 'classes' record");
  return Scene::create(std::move(objects), std::move(meshes), *classes, base_dir);
}

inline Scene load_scene(const std::filesystem::path& path) {
  auto reader_content = read_text(path);
  return parse_scene(path.string(), reader_content, path.parent_path());
}

/// Deterministic text for `scene`. Mesh references are rewritten relative to
/// `out_dir` when it differs from the scene's base directory.
inline std::string format_scene(const Scene& scene, const std::filesystem::path& out_dir = {}) {
  namespace fs = std::filesystem;
  const bool rebase = !out_dir.empty() && !scene.base_dir().empty() &&
                      fs::weakly_canonical(out_dir) != fs::weakly_canonical(scene.base_dir());
  std::string out = "scenepaint-scene 1\nclasses " + std::to_string(scene.class_count()) + "\n";
  for (const auto& obj : scene.objects()) {
    std::string ref = obj.mesh_ref;
    if (rebase && !fs::path(ref).is_absolute()) {
      ref = fs::relative(fs::weakly_canonical(scene.base_dir() / ref), fs::weakly_canonical(out_dir)).generic_string();
    }
    out += "object " + obj.name + " " + ref + " " + std::to_string(obj.class_id);
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) out += " " + format_number(obj.transform(r, c));
    }
    out += "\n";
  }
  return out;
}

inline void save_scene(const Scene& scene, const std::filesystem::path& path) {
  write_text_file(path, format_scene(scene, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path()));
}

}  // namespace scenepaint
