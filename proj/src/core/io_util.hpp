/*
 * Copyright 2026 The ocfkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "core/geometry.hpp"

namespace ocf::io {

using Bytes = std::vector<std::uint8_t>;

Bytes read_file(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename, so readers never observe a
/// half-written file.
void write_file(const std::filesystem::path& path, const void* data, std::size_t size);
inline void write_file(const std::filesystem::path& path, const Bytes& bytes) {
  write_file(path, bytes.data(), bytes.size());
}
void write_text(const std::filesystem::path& path, std::string_view text);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Little-endian byte sink.
class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) { put(v); }
  void u32(std::uint32_t v) { put(v); }
  void f32(float v) { put(std::bit_cast<std::uint32_t>(v)); }
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

  Bytes& bytes() { return bytes_; }

 private:
  template <typename U>
  void put(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  Bytes bytes_;
};

/// Little-endian byte source; throws CorruptionError on truncation.
class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}
  explicit Reader(const Bytes& b) : Reader(b.data(), b.size()) {}

  std::uint8_t u8() { return get<std::uint8_t>(); }
  std::uint16_t u16() { return get<std::uint16_t>(); }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  float f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
  std::string_view raw(std::size_t n);

  std::size_t remaining() const { return size_ - pos_; }

 private:
  template <typename U>
  U get() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v = static_cast<U>(v | (static_cast<U>(data_[pos_ + i]) << (8 * i)));
    }
    pos_ += sizeof(U);
    return v;
  }
  void need(std::size_t n) const;

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

// JSON codecs for geometry. Parse failures raise FormatError naming `what`.
nlohmann::json to_json(const Vec3& v);
nlohmann::json to_json(const RigidTransform& t);
Vec3 vec3_from_json(const nlohmann::json& j, std::string_view what);
Eigen::Quaterniond quat_from_json(const nlohmann::json& j, std::string_view what);
RigidTransform transform_from_json(const nlohmann::json& j, std::string_view what);

nlohmann::json to_json(const GridSpec& spec);
GridSpec grid_from_json(const nlohmann::json& j);

}  // namespace ocf::io
