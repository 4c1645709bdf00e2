#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "scenepaint/core/error.hpp"

namespace scenepaint {

/// Shortest representation that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct TextLine {
  std::size_t number = 0;
  std::vector<std::string> tokens;
};

/// Tokenizing reader for the line-oriented text formats. Blank lines and
/// lines starting with '#' are skipped; the first content line must be the
/// format header "<magic> <version>".
class TextReader {
 public:
  TextReader(std::string name, std::string_view content) : name_(std::move(name)) {
    std::size_t start = 0;
    std::size_t number = 0;
    while (start <= content.size()) {
      std::size_t end = content.find('\n', start);
      if (end == std::string_view::npos) end = content.size();
      ++number;
      std::string_view line = content.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      auto tokens = tokenize(line);
      if (!tokens.empty() && tokens.front()[0] != '#') {
        lines_.push_back({number, std::move(tokens)});
      }
      start = end + 1;
    }
  }

  static TextReader from_file(const std::filesystem::path& path);

  /// Consumes the header line and returns its version.
  int expect_header(std::string_view magic) {
    if (lines_.empty()) throw ParseError(name_, 1, "empty file, expected header '" + std::string(magic) + "'");
    const auto& h = lines_.front();
    if (h.tokens.size() != 2 || h.tokens[0] != magic) {
      throw ParseError(name_, h.number, "expected header '" + std::string(magic) + " <version>'");
    }
    const int version = parse_int(h, 1);
    pos_ = 1;
    return version;
  }

  const TextLine* next() { return pos_ < lines_.size() ? &lines_[pos_++] : nullptr; }

  const std::string& name() const noexcept { return name_; }

  [[noreturn]] void fail(const TextLine& line, const std::string& what) const {
    throw ParseError(name_, line.number, what);
  }

  double parse_double(const TextLine& line, std::size_t i) const {
    if (i >= line.tokens.size()) fail(line, "missing field " + std::to_string(i + 1));
    const auto& tok = line.tokens[i];
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) fail(line, "not a number: '" + tok + "'");
    return v;
  }

  int parse_int(const TextLine& line, std::size_t i) const {
    if (i >= line.tokens.size()) fail(line, "missing field " + std::to_string(i + 1));
    const auto& tok = line.tokens[i];
    int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) fail(line, "not an integer: '" + tok + "'");
    return v;
  }

  static std::vector<std::string> tokenize(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      if (j > i) out.emplace_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }

 private:
  std::string name_;
  std::vector<TextLine> lines_;
  std::size_t pos_ = 0;
};

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

inline TextReader TextReader::from_file(const std::filesystem::path& path) {
  return TextReader(path.string(), read_text(path));
}

}  // namespace scenepaint
