// scenepaint command-line driver: render, train, paint, eval, bake, edit.
//
// Exit codes: 0 ok, 1 usage, 2 validation, 3 training divergence.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include "scenepaint.hpp"

namespace fs = std::filesystem;
using namespace scenepaint;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;

struct Common {
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  std::string out;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

int raster_workers(const Common& c) {
  if (c.deterministic) return 1;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Collects what a command read and wrote; written as manifest.json.
class Manifest {
 public:
  Manifest(std::string command, const Common& common) : start_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["deterministic"] = common.deterministic;
    doc_["inputs"] = json::object();
    doc_["outputs"] = json::array();
    doc_["seeds"] = json::object();
    doc_["config"] = json::object();
  }

  void input(const fs::path& path) {
    if (fs::is_directory(path)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::recursive_directory_iterator(path)) {
        if (e.is_regular_file()) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) input(f);
      return;
    }
    doc_["inputs"][path.generic_string()] = hex64(fnv1a64(read_file_bytes(path)));
  }
  void scene_inputs(const fs::path& scene_path, const Scene& scene) {
    input(scene_path);
    for (const auto& obj : scene.objects()) {
      const fs::path p = fs::path(obj.mesh_ref).is_absolute() ? fs::path(obj.mesh_ref) : scene.base_dir() / obj.mesh_ref;
      if (fs::exists(p)) input(p);
    }
  }
  void output(const fs::path& path) { doc_["outputs"].push_back(path.generic_string()); }
  void seed(const std::string& name, std::uint64_t v) { doc_["seeds"][name] = v; }
  json& config() { return doc_["config"]; }

  void write(const fs::path& dir) {
    doc_["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_text_file(dir / "manifest.json", doc_.dump(2) + "\n");
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point start_;
};

std::vector<FrameMaps> render_all(const Scene& scene, const std::vector<Camera>& cams, int workers) {
  std::vector<FrameMaps> frames;
  frames.reserve(cams.size());
  for (const auto& c : cams) frames.push_back(rasterize_view(scene, c, {workers}));
  return frames;
}

std::string view_name(std::size_t v) { return "view" + std::to_string(v); }

// ---------------------------------------------------------------- render

struct RenderArgs {
  std::string scene, cameras;
};

int cmd_render(const RenderArgs& a, const Common& c) {
  Manifest m("render", c);
  const auto scene = load_scene(a.scene);
  const auto cams = load_cameras(a.cameras);
  m.scene_inputs(a.scene, scene);
  m.input(a.cameras);
  const fs::path out = c.out;
  const auto frames = render_all(scene, cams, raster_workers(c));
  for (std::size_t v = 0; v < frames.size(); ++v) {
    const auto f = out / (view_name(v) + ".frames");
    const auto l = out / (view_name(v) + "_label.png");
    const auto d = out / (view_name(v) + "_depth.png");
    save_frames(frames[v], f);
    write_png(label_preview(frames[v]), l);
    write_png(depth_preview(frames[v]), d);
    m.output(f), m.output(l), m.output(d);
  }
  m.write(out);
  std::cout << "rendered " << frames.size() << " views to " << out.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string scene, cameras, styles, config, refs, resume;
  std::optional<int> iterations;
  std::string preset, mode;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a, const Common& c) {
  Manifest m("train", c);
  const auto scene = load_scene(a.scene);
  const auto cams = load_cameras(a.cameras);
  const auto styles = load_styles(a.styles);
  m.scene_inputs(a.scene, scene);
  m.input(a.cameras);
  m.input(a.styles);

  json cj = json::object();
  if (!a.config.empty()) {
    m.input(a.config);
    try {
      cj = json::parse(read_text(a.config));
    } catch (const json::parse_error& e) {
      throw ValidationError(a.config + ": " + e.what());
    }
  }
  if (a.iterations) cj["iterations"] = *a.iterations;
  if (!a.preset.empty()) cj["preset"] = a.preset;
  if (!a.mode.empty()) cj["loss_mode"] = a.mode;
  if (c.seed) cj["seed"] = *c.seed;
  auto config = training_config_from_json(cj, scene.class_count());

  TrainingData data;
  data.bounds = scene.bounds();
  data.classes = scene.class_count();
  data.frames = render_all(scene, cams, raster_workers(c));
  data.styles = styles;
  const fs::path out = c.out;
  if (a.refs.empty()) {
    // coverage is checked before the (comparatively slow) mock generation
    for (std::size_t v = 0; v < data.frames.size(); ++v) {
      if (!data.frames[v].fully_covered()) {
        throw ValidationError(view_name(v) + " has uncovered pixels; training views must be fully covered");
      }
    }
    data.references = make_mock_references(data.frames, styles, config.mock);
    save_reference_dir(data.references, out / "references");
    m.output(out / "references");
  } else {
    m.input(a.refs);
    data.references = load_reference_dir(a.refs, cams.size(), styles.size(), cams.front().width, cams.front().height);
  }
  validate_training_data(data, config);

  m.config() = to_json(config);
  m.config()["references"] = a.refs.empty() ? json("mock") : json(a.refs);
  m.seed("train", config.seed);
  m.seed("mock_palette", config.mock.palette_seed);

  TrainState state;
  if (a.resume.empty()) {
    state = init_train_state(data, config);
  } else {
    m.input(a.resume);
    state = load_train_state(read_file_bytes(a.resume));
    m.config()["resumed_from_iteration"] = state.iteration;
  }

  const auto state_path = out / "train_state.bin";
  TrainCallbacks cb;
  cb.on_checkpoint = [&](const TrainState& s) { write_file_bytes(state_path, save_train_state(s)); };
  cb.on_divergence = [&](const TrainState& s) {
    write_file_bytes(out / "diverged_state.bin", save_train_state(s));
    write_text_file(out / "losses.csv", losses_csv(s.history));
  };
  const auto every = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(config.iterations) / 20);
  if (!a.quiet) {
    cb.on_iteration = [&](const TrainState&, const LossRecord& r) {
      if (r.iteration % every == 0) {
        std::cout << "iter " << r.iteration << " rec " << format_number(r.rec) << " adv " << format_number(r.adv)
                  << " disc " << format_number(r.disc) << std::endl;
      }
    };
  }
  train_continue(state, data, config, cb);

  save_checkpoint_file(state.generator, out / "painter.ckpt");
  write_file_bytes(state_path, save_train_state(state));
  write_text_file(out / "losses.csv", losses_csv(state.history));
  write_text_file(out / "config.json", to_json(config).dump(2) + "\n");
  for (const char* f : {"painter.ckpt", "train_state.bin", "losses.csv", "config.json"}) m.output(out / f);
  m.write(out);
  std::cout << "trained " << state.iteration << " iterations; checkpoint " << (out / "painter.ckpt").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- paint

struct PaintArgs {
  std::string checkpoint, scene, cameras;
  std::vector<std::size_t> styles;
};

std::vector<std::size_t> style_indices(const std::vector<std::size_t>& requested, std::size_t count) {
  return resolve_indices(requested, count, "style");
}

int cmd_paint(const PaintArgs& a, const Common& c) {
  Manifest m("paint", c);
  const auto gen = load_checkpoint_file<float>(a.checkpoint);
  const auto scene = load_scene(a.scene);
  const auto cams = load_cameras(a.cameras);
  m.input(a.checkpoint);
  m.scene_inputs(a.scene, scene);
  m.input(a.cameras);
  const auto styles = style_indices(a.styles, gen.styles.size());
  m.config()["styles"] = styles;
  const auto frames = render_all(scene, cams, raster_workers(c));
  const fs::path out = c.out;
  for (std::size_t v = 0; v < frames.size(); ++v) {
    for (auto s : styles) {
      const auto path = out / reference_name(v, s);
      write_png(paint_view(gen, frames[v], gen.styles[s], true), path);
      m.output(path);
    }
  }
  m.write(out);
  std::cout << "painted " << frames.size() * styles.size() << " images to " << out.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string images, checkpoint, refs, scene, cameras;
  std::size_t styles = 0;
  double cell = kDefaultCellSize;
};

int cmd_eval(const EvalArgs& a, const Common& c) {
  if (a.images.empty() == a.checkpoint.empty()) {
    throw CLI::ValidationError("eval", "give exactly one of --images or --checkpoint");
  }
  Manifest m("eval", c);
  const auto scene = load_scene(a.scene);
  const auto cams = load_cameras(a.cameras);
  m.scene_inputs(a.scene, scene);
  m.input(a.cameras);
  const auto frames = render_all(scene, cams, raster_workers(c));

  ImageSet images;
  AABB bounds = scene.bounds();
  if (!a.checkpoint.empty()) {
    m.input(a.checkpoint);
    const auto gen = load_checkpoint_file<float>(a.checkpoint);
    bounds = gen.bounds;
    for (std::size_t v = 0; v < frames.size(); ++v) {
      for (std::size_t s = 0; s < gen.styles.size(); ++s) images[{v, s}] = paint_view(gen, frames[v], gen.styles[s], true);
    }
  } else {
    m.input(a.images);
    std::size_t styles = a.styles;
    if (styles == 0) {
      while (fs::exists(fs::path(a.images) / reference_name(0, styles))) ++styles;
      if (styles == 0) throw ValidationError("no " + reference_name(0, 0) + " in " + a.images);
    }
    images = load_reference_dir(a.images, frames.size(), styles, cams.front().width, cams.front().height).images;
  }
  m.config()["cell_size"] = a.cell;

  const auto vc = consistency_report(images, frames, bounds, a.cell);
  std::optional<ReconReport> recon;
  if (!a.refs.empty()) {
    m.input(a.refs);
    std::size_t styles = 0;
    for (const auto& [key, img] : images) styles = std::max(styles, key.second + 1);
    const auto refs = load_reference_dir(a.refs, frames.size(), styles, cams.front().width, cams.front().height);
    recon = recon_error(images, refs.images);
  }
  const auto text = format_eval_report(vc, recon ? &*recon : nullptr);
  const fs::path out = c.out;
  write_text_file(out / "report.txt", text);
  m.output(out / "report.txt");
  m.write(out);
  std::cout << text;
  return kExitOk;
}

// ---------------------------------------------------------------- bake

struct BakeArgs {
  std::string checkpoint, scene, cameras, sampling = "automatic";
  std::size_t style = 0;
  double tau = 0.01;
};

int cmd_bake(const BakeArgs& a, const Common& c) {
  Manifest m("bake", c);
  const auto gen = load_checkpoint_file<float>(a.checkpoint);
  const auto scene = load_scene(a.scene);
  const auto cams = load_cameras(a.cameras);
  m.input(a.checkpoint);
  m.scene_inputs(a.scene, scene);
  m.input(a.cameras);
  if (a.style >= gen.styles.size()) throw ValidationError("style index " + std::to_string(a.style) + " out of range");
  BakeOptions opt;
  opt.tau = a.tau;
  opt.raster.workers = raster_workers(c);
  if (a.sampling == "point") opt.sampling = BakeSampling::point;
  else if (a.sampling == "bilinear") opt.sampling = BakeSampling::bilinear;
  m.config() = {{"style", a.style}, {"tau", a.tau}, {"sampling", a.sampling}};
  const auto result = bake(scene, gen, cams, gen.styles[a.style], opt);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  const fs::path out = c.out;
  export_ply(result.mesh, out / "mesh.ply");
  m.output(out / "mesh.ply");
  m.write(out);
  std::cout << "baked " << result.mesh.vertices.size() << " vertices (" << result.mesh.unpainted()
            << " unpainted) to " << (out / "mesh.ply").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- edit

struct EditArgs {
  std::string scene, script;
};

int cmd_edit(const EditArgs& a, const Common& c) {
  Manifest m("edit", c);
  const auto scene = load_scene(a.scene);
  m.scene_inputs(a.scene, scene);
  m.input(a.script);
  const auto edited = apply_edit_file(scene, a.script);
  const fs::path out = c.out;
  fs::create_directories(out);
  save_scene(edited, out / "scene.txt");
  m.output(out / "scene.txt");
  m.write(out);
  std::cout << "wrote " << (out / "scene.txt").string() << "\n";
  return kExitOk;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Seed for every random choice (overrides the config's seed)");
  sub->add_flag("--deterministic", c.deterministic, "Single-threaded execution for bitwise reproduction");
  sub->add_option("-o,--out", c.out, "Output directory")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scenepaint: paint 3D scenes from per-view reference images"};
  app.require_subcommand(1);
  Common common;

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Rasterize label, depth and coordinate maps for every camera");
  render->add_option("--scene", ra.scene, "Scene file")->required()->check(CLI::ExistingFile);
  render->add_option("--cameras", ra.cameras, "Camera file")->required()->check(CLI::ExistingFile);
  add_common(render, common);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train a painter on reference images (mock references by default)");
  train_cmd->add_option("--scene", ta.scene, "Scene file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--cameras", ta.cameras, "Camera file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--styles", ta.styles, "Style file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--config", ta.config, "Training config JSON")->check(CLI::ExistingFile);
  train_cmd->add_option("--refs", ta.refs, "Directory of view<v>_style<s>.png references")->check(CLI::ExistingDirectory);
  train_cmd->add_option("--resume", ta.resume, "Continue from a train_state.bin")->check(CLI::ExistingFile);
  train_cmd->add_option("--iterations", ta.iterations, "Total iteration count");
  train_cmd->add_option("--preset", ta.preset, "Generator preset");
  train_cmd->add_option("--mode", ta.mode, "Loss mode: full, recon_only or adv_only");
  train_cmd->add_flag("--quiet", ta.quiet, "No progress lines");
  add_common(train_cmd, common);

  PaintArgs pa;
  auto* paint_cmd = app.add_subcommand("paint", "Paint views with a trained checkpoint");
  paint_cmd->add_option("--checkpoint", pa.checkpoint, "Painter checkpoint")->required()->check(CLI::ExistingFile);
  paint_cmd->add_option("--scene", pa.scene, "Scene file")->required()->check(CLI::ExistingFile);
  paint_cmd->add_option("--cameras", pa.cameras, "Camera file")->required()->check(CLI::ExistingFile);
  paint_cmd->add_option("--style", pa.styles, "Style index (repeatable; default all)");
  add_common(paint_cmd, common);

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "View consistency and optional reconstruction error");
  eval_cmd->add_option("--images", ea.images, "Directory of view<v>_style<s>.png images")->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--checkpoint", ea.checkpoint, "Paint with this checkpoint instead")->check(CLI::ExistingFile);
  eval_cmd->add_option("--refs", ea.refs, "Reference directory for L1 / PSNR")->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--scene", ea.scene, "Scene file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--cameras", ea.cameras, "Camera file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--style-count", ea.styles, "Number of styles in --images (default: detect)");
  eval_cmd->add_option("-s,--cell-size", ea.cell, "Grid cell size in normalized coordinates")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_common(eval_cmd, common);

  BakeArgs ba;
  auto* bake_cmd = app.add_subcommand("bake", "Back-project painted views onto mesh vertices (PLY output)");
  bake_cmd->add_option("--checkpoint", ba.checkpoint, "Painter checkpoint")->required()->check(CLI::ExistingFile);
  bake_cmd->add_option("--scene", ba.scene, "Scene file")->required()->check(CLI::ExistingFile);
  bake_cmd->add_option("--cameras", ba.cameras, "Camera file")->required()->check(CLI::ExistingFile);
  bake_cmd->add_option("--style", ba.style, "Style index")->capture_default_str();
  bake_cmd->add_option("--tau", ba.tau, "Relative depth tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  bake_cmd->add_option("--sampling", ba.sampling, "automatic, point or bilinear")
      ->capture_default_str()
      ->check(CLI::IsMember({"automatic", "point", "bilinear"}));
  add_common(bake_cmd, common);

  EditArgs da;
  auto* edit_cmd = app.add_subcommand("edit", "Apply an edit script to a scene");
  edit_cmd->add_option("--scene", da.scene, "Scene file")->required()->check(CLI::ExistingFile);
  edit_cmd->add_option("--script", da.script, "Edit script")->required()->check(CLI::ExistingFile);
  add_common(edit_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (render->parsed()) return cmd_render(ra, common);
    if (train_cmd->parsed()) return cmd_train(ta, common);
    if (paint_cmd->parsed()) return cmd_paint(pa, common);
    if (eval_cmd->parsed()) return cmd_eval(ea, common);
    if (bake_cmd->parsed()) return cmd_bake(ba, common);
    if (edit_cmd->parsed()) return cmd_edit(da, common);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}
