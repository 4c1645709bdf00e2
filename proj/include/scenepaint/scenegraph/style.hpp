#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "scenepaint/core/error.hpp"
#include "scenepaint/core/random.hpp"
#include "scenepaint/core/text_io.hpp"

namespace scenepaint {

inline constexpr int kDefaultStyleDim = 64;

/// Style code broadcast to every pixel of the painter input.
struct StyleVector {
  std::vector<double> z;

  std::size_t dim() const noexcept { return z.size(); }
  bool operator==(const StyleVector&) const = default;
};

/// `count` style vectors drawn from N(0, 1).
inline std::vector<StyleVector> sample_styles(std::size_t count, std::size_t dim, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x57));
  std::vector<StyleVector> out(count);
  for (auto& s : out) {
    s.z.resize(dim);
    for (auto& v : s.z) v = rng.normal();
  }
  return out;
}

inline void validate_styles(const std::vector<StyleVector>& styles) {
  if (styles.empty()) throw ValidationError("style set is empty");
  const std::size_t dim = styles.front().dim();
  if (dim == 0) throw ValidationError("style vectors must have positive dimension");
  for (const auto& s : styles) {
    if (s.dim() != dim) throw ValidationError("style vectors have inconsistent dimensions");
    for (double v : s.z) {
      if (!std::isfinite(v)) throw ValidationError("style vector has a non-finite entry");
    }
  }
}

// Style file format, version 1: header "scenepaint-styles 1", then one vector
// per line as whitespace-separated numbers.

inline std::vector<StyleVector> parse_styles(const std::string& name, std::string_view content) {
  TextReader reader(name, content);
  const int version = reader.expect_header("scenepaint-styles");
  if (version != 1) throw ValidationError(name + ": unsupported style format version " + std::to_string(version));
  std::vector<StyleVector> out;
  while (const TextLine* line = reader.next()) {
    StyleVector s;
    for (std::size_t i = 0; i < line->tokens.size(); ++i) s.z.push_back(reader.parse_double(*line, i));
    if (!out.empty() && s.dim() != out.front().dim()) reader.fail(*line, "style dimension differs from first line");
    out.push_back(std::move(s));
  }
  validate_styles(out);
  return out;
}

inline std::vector<StyleVector> load_styles(const std::filesystem::path& path) {
  return parse_styles(path.string(), read_text(path));
}

inline std::string format_styles(const std::vector<StyleVector>& styles) {
  std::string out = "scenepaint-styles 1\n";
  for (const auto& s : styles) {
    for (std::size_t i = 0; i < s.z.size(); ++i) out += (i ? " " : "") + format_number(s.z[i]);
    out += "\n";
  }
  return out;
}

inline void save_styles(const std::vector<StyleVector>& styles, const std::filesystem::path& path) {
  write_text_file(path, format_styles(styles));
}

}  // namespace scenepaint
