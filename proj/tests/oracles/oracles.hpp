#pragma once

// Independent reference implementations used only by the tests.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "scenepaint/raster/rasterizer.hpp"
#include "scenepaint/tensornet/tensor.hpp"

namespace oracle {

using scenepaint::nn::Tensor;

/// Direct six-loop cross-correlation with zero padding.
inline Tensor<double> naive_conv2d(const Tensor<double>& in, const Tensor<double>& k, const Tensor<double>& bias,
                                   int pad) {
  const int h = static_cast<int>(in.dim(0)), w = static_cast<int>(in.dim(1)), cin = static_cast<int>(in.dim(2));
  const int ks = static_cast<int>(k.dim(0)), cout = static_cast<int>(k.dim(3));
  const int oh = h + 2 * pad - ks + 1, ow = w + 2 * pad - ks + 1;
  Tensor<double> out({static_cast<std::size_t>(oh), static_cast<std::size_t>(ow), static_cast<std::size_t>(cout)});
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x)
      for (int co = 0; co < cout; ++co) {
        double acc = bias[co];
        for (int ky = 0; ky < ks; ++ky)
          for (int kx = 0; kx < ks; ++kx)
            for (int ci = 0; ci < cin; ++ci) {
              const int iy = y + ky - pad, ix = x + kx - pad;
              if (iy < 0 || ix < 0 || iy >= h || ix >= w) continue;
              acc += in.at(iy, ix, ci) * k[((ky * ks + kx) * cin + ci) * cout + co];
            }
        out.at(y, x, co) = acc;
      }
  return out;
}

/// Central difference of a scalar function with respect to every entry of
/// `values`, perturbing in place and restoring.
inline std::vector<double> numeric_gradient(std::vector<double>& values, const std::function<double()>& f,
                                            double h = 1e-5) {
  std::vector<double> g(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double keep = values[i];
    values[i] = keep + h;
    const double fp = f();
    values[i] = keep - h;
    const double fm = f();
    values[i] = keep;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// max |a - n| / max(1, |a|, |n|) over all entries.
inline double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double scale = std::max({1.0, std::abs(analytic[i]), std::abs(numeric[i])});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
  }
  return worst;
}

struct ClosestHit {
  int label = 0;
  double depth = std::numeric_limits<double>::infinity();
};

/// Tests every triangle of every object along the pixel-center ray and keeps
/// the first strictly closest hit.
inline ClosestHit brute_force_hit(const scenepaint::Scene& scene, const scenepaint::Camera& cam, int x, int y) {
  ClosestHit best;
  const auto origin = cam.center();
  const auto dir = scenepaint::pixel_ray_direction(cam, x, y);
  for (std::size_t oi = 0; oi < scene.objects().size(); ++oi) {
    const auto& obj = scene.objects()[oi];
    const auto verts = scene.world_vertices(oi);
    for (const auto& t : scene.mesh_of(obj).triangles) {
      if (scenepaint::is_degenerate(verts[t[0]], verts[t[1]], verts[t[2]])) continue;
      const auto hit = scenepaint::intersect_ray_triangle(origin, dir, verts[t[0]], verts[t[1]], verts[t[2]]);
      if (hit && hit->t < best.depth) best = {obj.class_id, hit->t};
    }
  }
  return best;
}

/// Exhaustive view consistency: every pair in every cell, cells
/// visited through an ordered map.
struct VcResult {
  double value = 0.0;
  std::size_t cells = 0;
};

inline VcResult exhaustive_vc(const std::vector<std::vector<float>>& images, const std::vector<std::vector<float>>& coords,
                              const std::vector<std::vector<bool>>& coverage, double s) {
  std::map<std::tuple<long, long, long>, std::vector<std::array<double, 3>>> cells;
  for (std::size_t im = 0; im < images.size(); ++im) {
    for (std::size_t p = 0; p < coverage[im].size(); ++p) {
      if (!coverage[im][p]) continue;
      const auto key = std::make_tuple(static_cast<long>(std::floor(coords[im][3 * p] / s)),
                                       static_cast<long>(std::floor(coords[im][3 * p + 1] / s)),
                                       static_cast<long>(std::floor(coords[im][3 * p + 2] / s)));
      cells[key].push_back({255.0 * images[im][3 * p], 255.0 * images[im][3 * p + 1], 255.0 * images[im][3 * p + 2]});
    }
  }
  VcResult r;
  double sum = 0.0;
  for (const auto& [key, colors] : cells) {
    if (colors.size() < 2) continue;
    double worst = 0.0;
    for (std::size_t a = 0; a < colors.size(); ++a)
      for (std::size_t b = 0; b < colors.size(); ++b) {
        const double dr = colors[a][0] - colors[b][0], dg = colors[a][1] - colors[b][1], db = colors[a][2] - colors[b][2];
        worst = std::max(worst, std::sqrt(dr * dr + dg * dg + db * db));
      }
    sum += worst;
    ++r.cells;
  }
  r.value = r.cells ? sum / static_cast<double>(r.cells) : 0.0;
  return r;
}

/// Triple loop over (b, i, c) of the weighted generator adversarial loss.
/// probs[b] is (H*W) x (C+1) softmax output; labels are 1..C or 0 (ignored).
inline double adv_gen_triple_loop(const std::vector<std::vector<double>>& probs, const std::vector<std::vector<int>>& labels,
                                  const std::vector<double>& alpha, int classes) {
  double sum = 0.0, k = 0.0;
  for (std::size_t b = 0; b < probs.size(); ++b)
    for (std::size_t i = 0; i < labels[b].size(); ++i) {
      k += 1.0;
      for (int c = 0; c < classes; ++c) {
        const double l = labels[b][i] == c + 1 ? 1.0 : 0.0;
        if (l == 0.0) continue;
        sum += alpha[c] * l * std::log(probs[b][i * (classes + 1) + c]);
      }
    }
  return -sum / k;
}

inline double disc_triple_loop(const std::vector<std::vector<double>>& probs_ref,
                               const std::vector<std::vector<double>>& probs_fake,
                               const std::vector<std::vector<int>>& labels, const std::vector<double>& alpha,
                               int classes) {
  double real = 0.0, fake = 0.0, k = 0.0;
  for (std::size_t b = 0; b < probs_ref.size(); ++b)
    for (std::size_t i = 0; i < labels[b].size(); ++i) {
      k += 1.0;
      for (int c = 0; c < classes; ++c) {
        if (labels[b][i] != c + 1) continue;
        real += alpha[c] * std::log(probs_ref[b][i * (classes + 1) + c]);
      }
      if (labels[b][i] >= 1) fake += std::log(probs_fake[b][i * (classes + 1) + classes]);
    }
  return -(real + fake) / k;
}

}  // namespace oracle
