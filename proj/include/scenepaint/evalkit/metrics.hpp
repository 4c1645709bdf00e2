#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "scenepaint/core/error.hpp"
#include "scenepaint/core/image.hpp"
#include "scenepaint/core/text_io.hpp"
#include "scenepaint/raster/frame_maps.hpp"

namespace scenepaint {

inline constexpr double kDefaultCellSize = 0.01;

struct ConsistencyResult {
  double value = 0.0;
  std::size_t qualifying_cells = 0;  // cells with two or more colors
  std::size_t occupied_cells = 0;
  std::size_t samples = 0;
  double mean_colors_per_cell = 0.0;  // over qualifying cells
  bool no_qualifying_cell = false;
};

/// One image in a consistency evaluation: RGB in [0, 1], normalized
/// coordinates (3 per pixel) and coverage (label >= 1).
struct ConsistencyView {
  std::span<const float> rgb;
  std::span<const float> coord;
  std::span<const std::int16_t> label;
};

/// Mean over grid cells holding two or more colors of the largest pairwise
/// Euclidean distance between them, colors on a 0-255 scale. Cells are keyed
/// by floor(coord / s) per axis.
inline ConsistencyResult view_consistency(const std::vector<ConsistencyView>& views, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("cell size must be positive");
  using Key = std::tuple<long, long, long>;
  using Color = std::array<double, 3>;
  std::vector<std::pair<Key, Color>> samples;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const auto& view = views[v];
    const std::size_t n = view.label.size();
    if (view.rgb.size() != 3 * n || view.coord.size() != 3 * n) {
      throw ValidationError("view " + std::to_string(v) + ": image, coordinate and label sizes are not aligned");
    }
    for (std::size_t p = 0; p < n; ++p) {
      if (view.label[p] < 1) continue;
      const Key key{static_cast<long>(std::floor(view.coord[3 * p] / s)),
                    static_cast<long>(std::floor(view.coord[3 * p + 1] / s)),
                    static_cast<long>(std::floor(view.coord[3 * p + 2] / s))};
      samples.push_back({key, {255.0 * view.rgb[3 * p], 255.0 * view.rgb[3 * p + 1], 255.0 * view.rgb[3 * p + 2]}});
    }
  }
  std::sort(samples.begin(), samples.end());

  ConsistencyResult r;
  r.samples = samples.size();
  double sum = 0.0;
  double colors = 0.0;
  std::vector<Color> cell;
  for (std::size_t i = 0; i < samples.size();) {
    std::size_t j = i;
    cell.clear();
    while (j < samples.size() && std::get<0>(samples[j]) == std::get<0>(samples[i])) {
      // sorted, so repeated colors are adjacent and add nothing to the max
      if (cell.empty() || cell.back() != samples[j].second) cell.push_back(samples[j].second);
      ++j;
    }
    ++r.occupied_cells;
    if (j - i >= 2) {
      double worst = 0.0;
      for (std::size_t a = 0; a < cell.size(); ++a) {
        for (std::size_t b = a + 1; b < cell.size(); ++b) {
          const double dr = cell[a][0] - cell[b][0];
          const double dg = cell[a][1] - cell[b][1];
          const double db = cell[a][2] - cell[b][2];
          worst = std::max(worst, std::sqrt(dr * dr + dg * dg + db * db));
        }
      }
      sum += worst;
      colors += static_cast<double>(j - i);
      ++r.qualifying_cells;
    }
    i = j;
  }
  if (r.qualifying_cells == 0) {
    r.no_qualifying_cell = true;
    return r;
  }
  r.value = sum / static_cast<double>(r.qualifying_cells);
  r.mean_colors_per_cell = colors / static_cast<double>(r.qualifying_cells);
  return r;
}

/// Normalized coordinates of every pixel of a frame, as floats.
inline std::vector<float> normalized_coords(const FrameMaps& f, const AABB& bounds) {
  std::vector<float> out(f.coord.size(), 0.0f);
  for (std::size_t i = 0; i < f.pixel_count(); ++i) {
    if (!f.covered(i)) continue;
    const Vec3 n = normalize_coord(f.world(i), bounds);
    for (int k = 0; k < 3; ++k) out[3 * i + k] = static_cast<float>(n[k]);
  }
  return out;
}

using ImageSet = std::map<std::pair<std::size_t, std::size_t>, Image>;

struct ConsistencyReport {
  double cell_size = kDefaultCellSize;
  std::map<std::size_t, ConsistencyResult> per_style;
  ConsistencyResult pooled;
};

/// VC of an image set keyed by (view, style), per style and over all images.
inline ConsistencyReport consistency_report(const ImageSet& images, const std::vector<FrameMaps>& frames,
                                            const AABB& bounds, double s) {
  if (images.empty()) throw ValidationError("no images to evaluate");
  std::vector<std::vector<float>> coords(frames.size());
  for (const auto& [key, img] : images) {
    const auto v = key.first;
    if (v >= frames.size()) throw ValidationError("image for view " + std::to_string(v) + " has no frame maps");
    if (img.width != frames[v].width || img.height != frames[v].height) {
      throw ValidationError("image for view " + std::to_string(v) + " does not match its frame size");
    }
    if (coords[v].empty()) coords[v] = normalized_coords(frames[v], bounds);
  }
  auto view_of = [&](const std::pair<std::size_t, std::size_t>& key, const Image& img) {
    return ConsistencyView{img.rgb, coords[key.first], frames[key.first].label};
  };
  ConsistencyReport report;
  report.cell_size = s;
  std::map<std::size_t, std::vector<ConsistencyView>> by_style;
  std::vector<ConsistencyView> all;
  for (const auto& [key, img] : images) {
    by_style[key.second].push_back(view_of(key, img));
    all.push_back(view_of(key, img));
  }
  for (const auto& [style, views] : by_style) report.per_style[style] = view_consistency(views, s);
  report.pooled = view_consistency(all, s);
  return report;
}

/// Mean VC over styles; the headline number of a consistency report.
inline double mean_style_consistency(const ConsistencyReport& r) {
  double sum = 0.0;
  for (const auto& [style, res] : r.per_style) sum += res.value;
  return r.per_style.empty() ? 0.0 : sum / static_cast<double>(r.per_style.size());
}

struct ReconEntry {
  double l1 = 0.0;   // mean absolute difference per channel
  double mse = 0.0;
  double psnr = 0.0;  // infinity when identical
};

struct ReconReport {
  std::map<std::pair<std::size_t, std::size_t>, ReconEntry> per_pair;
  ReconEntry aggregate;
};

inline double psnr_from_mse(double mse) {
  return mse > 0.0 ? -10.0 * std::log10(mse) : std::numeric_limits<double>::infinity();
}

/// L1 and PSNR (peak 1.0) per (view, style) and over all pixels.
inline ReconReport recon_error(const ImageSet& painted, const ImageSet& refs) {
  if (painted.size() != refs.size()) {
    throw ValidationError("recon_error: key mismatch (" + std::to_string(painted.size()) + " painted vs " +
                          std::to_string(refs.size()) + " reference images)");
  }
  if (painted.empty()) throw ValidationError("recon_error: empty image sets");
  ReconReport r;
  double abs_sum = 0.0, sq_sum = 0.0, count = 0.0;
  for (const auto& [key, img] : painted) {
    auto it = refs.find(key);
    if (it == refs.end()) {
      throw ValidationError("recon_error: key mismatch, no reference for view " + std::to_string(key.first) +
                            " style " + std::to_string(key.second));
    }
    if (it->second.width != img.width || it->second.height != img.height) {
      throw ValidationError("recon_error: size mismatch for view " + std::to_string(key.first));
    }
    double a = 0.0, q = 0.0;
    for (std::size_t i = 0; i < img.rgb.size(); ++i) {
      const double d = static_cast<double>(img.rgb[i]) - static_cast<double>(it->second.rgb[i]);
      a += std::abs(d);
      q += d * d;
    }
    const double n = static_cast<double>(img.rgb.size());
    r.per_pair[key] = {a / n, q / n, psnr_from_mse(q / n)};
    abs_sum += a;
    sq_sum += q;
    count += n;
  }
  r.aggregate = {abs_sum / count, sq_sum / count, psnr_from_mse(sq_sum / count)};
  return r;
}

inline std::string format_psnr(double p) { return std::isinf(p) ? std::string("inf") : format_number(p); }

/// Plain-text evaluation report: key = value lines followed by CSV tables.
inline std::string format_eval_report(const ConsistencyReport& vc, const ReconReport* recon) {
  std::string out = "# scenepaint evaluation report\n";
  out += "cell_size = " + format_number(vc.cell_size) + "\n";
  out += "color_scale = 0-255\n";
  out += "vc_mean_over_styles = " + format_number(mean_style_consistency(vc)) + "\n";
  out += "vc_pooled = " + format_number(vc.pooled.value) + "\n";
  if (recon) {
    out += "l1_mean = " + format_number(recon->aggregate.l1) + "\n";
    out += "psnr_db = " + format_psnr(recon->aggregate.psnr) + "\n";
  }
  out += "not_implemented = mIoU, FID (need pretrained networks)\n";
  out += "\n[consistency]\nstyle,vc,qualifying_cells,occupied_cells,samples,mean_colors_per_cell\n";
  auto row = [&](const std::string& name, const ConsistencyResult& c) {
    out += name + "," + format_number(c.value) + "," + std::to_string(c.qualifying_cells) + "," +
           std::to_string(c.occupied_cells) + "," + std::to_string(c.samples) + "," +
           format_number(c.mean_colors_per_cell) + "\n";
  };
  for (const auto& [style, c] : vc.per_style) row(std::to_string(style), c);
  row("pooled", vc.pooled);
  for (const auto& [style, c] : vc.per_style) {
    if (c.no_qualifying_cell) out += "# warning: style " + std::to_string(style) + " has no cell with two colors\n";
  }
  if (recon) {
    out += "\n[reconstruction]\nview,style,l1,psnr_db\n";
    for (const auto& [key, e] : recon->per_pair) {
      out += std::to_string(key.first) + "," + std::to_string(key.second) + "," + format_number(e.l1) + "," +
             format_psnr(e.psnr) + "\n";
    }
  }
  return out;
}

}  // namespace scenepaint
