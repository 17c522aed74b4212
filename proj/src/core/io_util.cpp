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

#include "core/io_util.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "core/errors.hpp"

namespace ocf::io {

namespace fs = std::filesystem;

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const void* data, std::size_t size) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw IoError("write failed: " + path.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot finalize " + path.string() + ": " + ec.message());
}

void write_text(const fs::path& path, std::string_view text) {
  write_file(path, text.data(), text.size());
}

nlohmann::json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string_view Reader::raw(std::size_t n) {
  need(n);
  std::string_view s(reinterpret_cast<const char*>(data_ + pos_), n);
  pos_ += n;
  return s;
}

void Reader::need(std::size_t n) const {
  if (size_ - pos_ < n) throw CorruptionError("unexpected end of data");
}

nlohmann::json to_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

nlohmann::json to_json(const RigidTransform& t) {
  const auto& q = t.rotation();
  return {{"quaternion", {q.w(), q.x(), q.y(), q.z()}}, {"translation", to_json(t.translation())}};
}

namespace {

std::vector<double> numbers(const nlohmann::json& j, std::size_t n, std::string_view what) {
  if (!j.is_array() || j.size() != n) {
    throw FormatError(std::string(what) + ": expected array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number()) throw FormatError(std::string(what) + ": non-numeric entry");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

Vec3 vec3_from_json(const nlohmann::json& j, std::string_view what) {
  const auto v = numbers(j, 3, what);
  return {v[0], v[1], v[2]};
}

Eigen::Quaterniond quat_from_json(const nlohmann::json& j, std::string_view what) {
  const auto v = numbers(j, 4, what);
  return {v[0], v[1], v[2], v[3]};
}

RigidTransform transform_from_json(const nlohmann::json& j, std::string_view what) {
  if (!j.is_object() || !j.contains("quaternion") || !j.contains("translation")) {
    throw FormatError(std::string(what) + ": expected {quaternion, translation}");
  }
  return {quat_from_json(j["quaternion"], what), vec3_from_json(j["translation"], what)};
}

nlohmann::json to_json(const GridSpec& spec) {
  return {{"origin", to_json(spec.origin())},
          {"voxel_size", to_json(spec.voxel_size())},
          {"dims", {spec.nx(), spec.ny(), spec.nz()}}};
}

GridSpec grid_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("grid: expected object");
  const GridSpec def = GridSpec::default_spec();
  Vec3 origin = def.origin();
  Vec3 size = def.voxel_size();
  std::array<std::int64_t, 3> dims = def.dims();
  try {
    if (j.contains("origin")) origin = vec3_from_json(j["origin"], "grid.origin");
    if (j.contains("voxel_size")) {
      if (j["voxel_size"].is_number()) size = Vec3::Constant(j["voxel_size"].get<double>());
      else size = vec3_from_json(j["voxel_size"], "grid.voxel_size");
    }
    if (j.contains("dims")) {
      const auto d = numbers(j["dims"], 3, "grid.dims");
      for (int a = 0; a < 3; ++a) {
        if (d[a] != std::floor(d[a])) throw FormatError("grid.dims: expected integers");
        dims[a] = static_cast<std::int64_t>(d[a]);
      }
    }
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  return {origin, size, dims};
}

}  // namespace ocf::io
