#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scenepaint/core/error.hpp"

namespace scenepaint {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

namespace detail {

template <typename U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U r = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      r = static_cast<U>((r << 8) | ((v >> (8 * i)) & 0xff));
    }
    return r;
  } else {
    return v;
  }
}

}  // namespace detail

/// Little-endian byte sink.
class BinaryWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { put(detail::to_little(v)); }
  void u32(std::uint32_t v) { put(detail::to_little(v)); }
  void u64(std::uint64_t v) { put(detail::to_little(v)); }
  void i16(std::int16_t v) { u16(static_cast<std::uint16_t>(v)); }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void bytes(std::string_view s) { buf_.append(s); }

  void string(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }

  template <typename T>
  void f32_array(std::span<const T> values) {
    u64(values.size());
    for (const T v : values) f32(static_cast<float>(v));
  }

  void f64_array(std::span<const double> values) {
    u64(values.size());
    for (const double v : values) f64(v);
  }

  const std::string& data() const noexcept { return buf_; }
  std::string take() { return std::move(buf_); }

 private:
  template <typename U>
  void put(U v) {
    char raw[sizeof(U)];
    std::memcpy(raw, &v, sizeof(U));
    buf_.append(raw, sizeof(U));
  }

  std::string buf_;
};

/// Bounds-checked little-endian reader; throws CorruptDataError on truncation.
class BinaryReader {
 public:
  explicit BinaryReader(std::string_view data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint16_t u16() { return get<std::uint16_t>(); }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  std::int16_t i16() { return static_cast<std::int16_t>(u16()); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

  std::string_view bytes(std::size_t n) { return take(n); }

  std::string string() {
    const std::uint32_t n = u32();
    return std::string(take(n));
  }

  template <typename T>
  std::vector<T> f32_array(std::size_t expected_size) {
    const std::uint64_t n = u64();
    if (n != expected_size) {
      throw CorruptDataError("array length " + std::to_string(n) + " does not match expected " +
                             std::to_string(expected_size));
    }
    return f32_values<T>(n);
  }

  template <typename T>
  std::vector<T> f32_array() {
    const std::uint64_t n = u64();
    return f32_values<T>(n);
  }

  std::vector<double> f64_array() {
    const std::uint64_t n = u64();
    if (n > remaining() / 8) throw CorruptDataError("truncated payload");
    std::vector<double> out(n);
    for (auto& v : out) v = f64();
    return out;
  }

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  bool at_end() const noexcept { return pos_ == data_.size(); }

 private:
  template <typename T>
  std::vector<T> f32_values(std::uint64_t n) {
    if (n > remaining() / 4) throw CorruptDataError("truncated payload");
    std::vector<T> out(n);
    for (auto& v : out) v = static_cast<T>(f32());
    return out;
  }

  std::string_view take(std::size_t n) {
    if (n > remaining()) throw CorruptDataError("truncated payload");
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  template <typename U>
  U get() {
    U v;
    std::memcpy(&v, take(sizeof(U)).data(), sizeof(U));
    return detail::to_little(v);
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

/// 64-bit FNV-1a; used to fingerprint inputs in run manifests.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace scenepaint
