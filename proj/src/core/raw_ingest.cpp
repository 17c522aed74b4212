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

#include "core/raw_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "core/errors.hpp"
#include "core/io_util.hpp"

namespace ocf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kDefaultFramePeriod = 0.1;

std::string point_file_name(std::int64_t frame) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06lld.bin", static_cast<long long>(frame));
  return buf;
}

std::int64_t frame_of(const json& j, std::string_view what) {
  if (!j.is_object() || !j.contains("frame_index") || !j["frame_index"].is_number_integer()) {
    throw FormatError(std::string(what) + ": missing integer frame_index");
  }
  return j["frame_index"].get<std::int64_t>();
}

PointList read_points(const fs::path& file, std::int64_t frame) {
  const io::Bytes bytes = io::read_file(file);
  if (bytes.size() % 12 != 0) {
    throw DataError("frame " + std::to_string(frame) + ": point file size " +
                    std::to_string(bytes.size()) + " is not a multiple of 12 bytes");
  }
  io::Reader r(bytes);
  PointList pts(bytes.size() / 12);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const float x = r.f32(), y = r.f32(), z = r.f32();
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      throw DataError("frame " + std::to_string(frame) + ", point " + std::to_string(i) +
                      ": non-finite coordinate");
    }
    pts[i] = Vec3(x, y, z);
  }
  return pts;
}

}  // namespace

bool LidarSweep::operator==(const LidarSweep& other) const {
  return frame_index == other.frame_index && timestamp == other.timestamp &&
         points == other.points && ego_pose == other.ego_pose &&
         sensor_origin == other.sensor_origin;
}

const LidarSweep& RawSequence::sweep(std::int64_t frame) const {
  if (!has_frame(frame)) {
    throw RangeError("sequence " + sequence_id + " has no frame " + std::to_string(frame));
  }
  return sweeps[static_cast<std::size_t>(frame - first_frame())];
}

bool RawSequence::operator==(const RawSequence& other) const {
  return sequence_id == other.sequence_id && sweeps == other.sweeps && tracks == other.tracks &&
         ego_to_sensor == other.ego_to_sensor;
}

void validate(const RawSequence& seq) {
  if (seq.sweeps.empty()) throw ConsistencyError(seq.sequence_id + ": no sweeps");
  for (std::size_t i = 0; i < seq.sweeps.size(); ++i) {
    const auto& s = seq.sweeps[i];
    if (i > 0 && s.frame_index != seq.sweeps[i - 1].frame_index + 1) {
      throw ConsistencyError(seq.sequence_id + ": frame indices are not consecutive at " +
                             std::to_string(s.frame_index));
    }
    for (std::size_t p = 0; p < s.points.size(); ++p) {
      if (!s.points[p].allFinite()) {
        throw DataError(seq.sequence_id + ": frame " + std::to_string(s.frame_index) +
                        ", point " + std::to_string(p) + ": non-finite coordinate");
      }
    }
  }
  std::set<std::string> ids;
  for (const auto& track : seq.tracks) {
    if (!ids.insert(track.instance_id).second) {
      throw ConsistencyError(seq.sequence_id + ": duplicate track " + track.instance_id);
    }
    for (const auto& [frame, box] : track.entries) {
      if (box.instance_id != track.instance_id) {
        throw ConsistencyError(seq.sequence_id + ": box id " + box.instance_id +
                               " filed under track " + track.instance_id);
      }
      if (!seq.has_frame(frame)) {
        throw ConsistencyError(seq.sequence_id + ": track " + track.instance_id +
                               " references missing frame " + std::to_string(frame));
      }
      if ((box.half_extents.array() <= 0.0).any()) {
        throw DataError(seq.sequence_id + ": track " + track.instance_id +
                        " has non-positive half extents at frame " + std::to_string(frame));
      }
    }
  }
}

RawSequence load_sequence(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::is_regular_file(manifest_path)) {
    throw FormatError(dir.string() + ": missing manifest.json");
  }
  const json manifest = io::read_json(manifest_path);
  if (!manifest.is_object() || !manifest.contains("sequence_id") ||
      !manifest["sequence_id"].is_string() || !manifest.contains("frames") ||
      !manifest["frames"].is_array()) {
    throw FormatError(manifest_path.string() + ": expected {sequence_id, frames, ego_to_sensor}");
  }

  RawSequence seq;
  seq.sequence_id = manifest["sequence_id"].get<std::string>();
  if (manifest.contains("ego_to_sensor")) {
    seq.ego_to_sensor = io::transform_from_json(manifest["ego_to_sensor"], "ego_to_sensor");
  }

  for (const auto& f : manifest["frames"]) {
    LidarSweep s;
    if (f.is_number_integer()) {
      s.frame_index = f.get<std::int64_t>();
      s.timestamp = static_cast<double>(s.frame_index) * kDefaultFramePeriod;
    } else {
      s.frame_index = frame_of(f, "manifest.frames");
      s.timestamp = f.contains("timestamp") && f["timestamp"].is_number()
                        ? f["timestamp"].get<double>()
                        : static_cast<double>(s.frame_index) * kDefaultFramePeriod;
    }
    s.sensor_origin = seq.ego_to_sensor.translation();
    seq.sweeps.push_back(std::move(s));
  }
  if (seq.sweeps.empty()) throw FormatError(manifest_path.string() + ": empty frame list");

  const fs::path poses_path = dir / "poses.json";
  if (!fs::is_regular_file(poses_path)) throw FormatError(dir.string() + ": missing poses.json");
  const json poses = io::read_json(poses_path);
  if (!poses.is_array()) throw FormatError(poses_path.string() + ": expected an array");
  if (poses.size() != seq.sweeps.size()) {
    throw ConsistencyError(dir.string() + ": " + std::to_string(poses.size()) +
                           " poses for " + std::to_string(seq.sweeps.size()) + " frames");
  }

  std::size_t point_files = 0;
  if (fs::is_directory(dir / "points")) {
    for (const auto& e : fs::directory_iterator(dir / "points")) {
      if (e.is_regular_file() && e.path().extension() == ".bin") ++point_files;
    }
  }
  if (point_files != seq.sweeps.size()) {
    throw ConsistencyError(dir.string() + ": " + std::to_string(point_files) +
                           " point files for " + std::to_string(seq.sweeps.size()) + " frames");
  }

  for (std::size_t i = 0; i < seq.sweeps.size(); ++i) {
    if (i > 0 && seq.sweeps[i].frame_index != seq.sweeps[i - 1].frame_index + 1) {
      throw ConsistencyError(dir.string() + ": frame indices are not consecutive");
    }
  }
  for (const auto& p : poses) {
    const std::int64_t frame = frame_of(p, "poses.json");
    if (!seq.has_frame(frame)) {
      throw ConsistencyError(poses_path.string() + ": pose for unknown frame " +
                             std::to_string(frame));
    }
    seq.sweeps[static_cast<std::size_t>(frame - seq.first_frame())].ego_pose =
        io::transform_from_json(p, "poses.json");
  }
  for (auto& s : seq.sweeps) {
    const fs::path file = dir / "points" / point_file_name(s.frame_index);
    if (!fs::is_regular_file(file)) {
      throw ConsistencyError(dir.string() + ": missing " + file.filename().string());
    }
    s.points = read_points(file, s.frame_index);
  }

  const fs::path boxes_path = dir / "boxes.json";
  if (fs::is_regular_file(boxes_path)) {
    const json frames = io::read_json(boxes_path);
    if (!frames.is_array()) throw FormatError(boxes_path.string() + ": expected an array");
    std::map<std::string, InstanceBoxTrack> tracks;
    for (const auto& f : frames) {
      const std::int64_t frame = frame_of(f, "boxes.json");
      if (!f.contains("boxes") || !f["boxes"].is_array()) {
        throw FormatError(boxes_path.string() + ": frame entry without boxes array");
      }
      for (const auto& b : f["boxes"]) {
        if (!b.is_object() || !b.contains("instance_id") || !b["instance_id"].is_string()) {
          throw FormatError(boxes_path.string() + ": box without instance_id");
        }
        OrientedBox box;
        box.instance_id = b["instance_id"].get<std::string>();
        box.pose = RigidTransform(io::quat_from_json(b.value("quaternion", json()), "box.quaternion"),
                                  io::vec3_from_json(b.value("center", json()), "box.center"));
        box.half_extents = io::vec3_from_json(b.value("half_extents", json()), "box.half_extents");
        auto& track = tracks[box.instance_id];
        track.instance_id = box.instance_id;
        if (!track.entries.emplace(frame, box).second) {
          throw ConsistencyError(boxes_path.string() + ": duplicate box " + box.instance_id +
                                 " at frame " + std::to_string(frame));
        }
      }
    }
    for (auto& [id, track] : tracks) seq.tracks.push_back(std::move(track));
  }

  validate(seq);
  return seq;
}

void save_sequence(const RawSequence& seq, const fs::path& dir) {
  validate(seq);
  std::error_code ec;
  fs::create_directories(dir / "points", ec);
  if (ec) throw IoError("cannot create " + (dir / "points").string() + ": " + ec.message());

  json frames = json::array();
  json poses = json::array();
  for (const auto& s : seq.sweeps) {
    frames.push_back({{"frame_index", s.frame_index}, {"timestamp", s.timestamp}});
    json p = io::to_json(s.ego_pose);
    p["frame_index"] = s.frame_index;
    poses.push_back(std::move(p));

    io::Writer w;
    w.bytes().reserve(s.points.size() * 12);
    for (const auto& pt : s.points) {
      w.f32(static_cast<float>(pt.x()));
      w.f32(static_cast<float>(pt.y()));
      w.f32(static_cast<float>(pt.z()));
    }
    io::write_file(dir / "points" / point_file_name(s.frame_index), w.bytes());
  }

  std::map<std::int64_t, std::vector<const OrientedBox*>> by_frame;
  for (const auto& track : seq.tracks) {
    for (const auto& [frame, box] : track.entries) by_frame[frame].push_back(&box);
  }
  json boxes = json::array();
  for (auto& [frame, list] : by_frame) {
    std::sort(list.begin(), list.end(),
              [](const OrientedBox* a, const OrientedBox* b) { return a->instance_id < b->instance_id; });
    json entry = {{"frame_index", frame}, {"boxes", json::array()}};
    for (const OrientedBox* b : list) {
      const auto& q = b->pose.rotation();
      entry["boxes"].push_back({{"instance_id", b->instance_id},
                                {"center", io::to_json(b->pose.translation())},
                                {"quaternion", {q.w(), q.x(), q.y(), q.z()}},
                                {"half_extents", io::to_json(b->half_extents)}});
    }
    boxes.push_back(std::move(entry));
  }

  io::write_json(dir / "manifest.json", {{"sequence_id", seq.sequence_id},
                                         {"frames", frames},
                                         {"ego_to_sensor", io::to_json(seq.ego_to_sensor)}});
  io::write_json(dir / "poses.json", poses);
  io::write_json(dir / "boxes.json", boxes);
}

RawSequence quantize_points(RawSequence seq) {
  for (auto& s : seq.sweeps) {
    // Flat loop over coordinates; keep it flat (GCC 11 -O3 drops x and y otherwise).
    double* c = s.points.empty() ? nullptr : s.points.front().data();
    const std::size_t n = 3 * s.points.size();
    for (std::size_t i = 0; i < n; ++i) c[i] = static_cast<double>(static_cast<float>(c[i]));
  }
  return seq;
}

bool is_sequence_dir(const fs::path& dir) { return fs::is_regular_file(dir / "manifest.json"); }

std::vector<fs::path> list_sequence_dirs(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError(root.string() + " is not a directory");
  if (is_sequence_dir(root)) return {root};
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && is_sequence_dir(e.path())) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

}  // namespace ocf
