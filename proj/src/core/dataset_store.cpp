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

#include "core/dataset_store.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "core/errors.hpp"

namespace ocf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "OCF1";

void write_header(io::Writer& w, std::uint16_t version, const GridSpec& spec, int t_in,
                  int t_out) {
  w.raw(kMagic);
  w.u16(version);
  for (int a = 0; a < 3; ++a) w.f32(static_cast<float>(spec.origin()[a]));
  for (int a = 0; a < 3; ++a) w.f32(static_cast<float>(spec.voxel_size()[a]));
  for (int a = 0; a < 3; ++a) w.u32(static_cast<std::uint32_t>(spec.dims()[a]));
  w.u16(static_cast<std::uint16_t>(t_in));
  w.u16(static_cast<std::uint16_t>(t_out));
}

struct Header {
  GridSpec spec;
  int t_in;
  int t_out;
};

Header read_header(io::Reader& r, std::uint16_t expected_version) {
  if (r.remaining() < kMagic.size() || r.raw(kMagic.size()) != kMagic) {
    throw FormatError("bad magic, expected OCF1");
  }
  const std::uint16_t version = r.u16();
  if (version != expected_version) {
    throw FormatError("unsupported OCF1 version " + std::to_string(version) + ", expected " +
                      std::to_string(expected_version));
  }
  Vec3 origin, size;
  for (int a = 0; a < 3; ++a) origin[a] = r.f32();
  for (int a = 0; a < 3; ++a) size[a] = r.f32();
  std::array<std::int64_t, 3> dims{};
  for (int a = 0; a < 3; ++a) dims[a] = r.u32();
  const int t_in = r.u16();
  const int t_out = r.u16();
  try {
    return {GridSpec(origin, size, dims), t_in, t_out};
  } catch (const ConfigError& e) {
    throw CorruptionError(std::string("invalid grid header: ") + e.what());
  }
}

void check_total(const GridSpec& spec) {
  // Run lengths and counts are u32.
  if (spec.voxel_count() > 0xFFFFFFFFull) throw ConfigError("grid too large for OCF1");
}

OccupancyGrid read_grid(io::Reader& r, const GridSpec& spec) {
  OccupancyGrid grid(spec, CellState::kFree);
  auto states = grid.states();
  const std::uint32_t runs = r.u32();
  std::uint64_t pos = 0;
  for (std::uint32_t i = 0; i < runs; ++i) {
    const std::uint32_t len = r.u32();
    const std::uint8_t code = r.u8();
    if (code > 2) throw CorruptionError("invalid state code " + std::to_string(code));
    if (len == 0) throw CorruptionError("zero-length run");
    if (pos + len > states.size()) {
      throw CorruptionError("run lengths exceed " + std::to_string(states.size()) + " cells");
    }
    std::fill_n(states.begin() + static_cast<std::ptrdiff_t>(pos), len, static_cast<CellState>(code));
    pos += len;
  }
  if (pos != states.size()) {
    throw CorruptionError("run lengths total " + std::to_string(pos) + ", expected " +
                          std::to_string(states.size()));
  }
  return grid;
}

}  // namespace

std::vector<Run> run_length_encode(const OccupancyGrid& grid) {
  std::vector<Run> runs;
  const auto states = grid.states();
  for (std::size_t i = 0; i < states.size();) {
    std::size_t j = i + 1;
    while (j < states.size() && states[j] == states[i]) ++j;
    runs.push_back({static_cast<std::uint32_t>(j - i), states[i]});
    i = j;
  }
  return runs;
}

io::Bytes encode_sample(const Sample& sample) {
  validate(sample);
  const GridSpec& spec = sample.spec();
  check_total(spec);
  if (sample.t_in() > 0xFFFF || sample.t_out() > 0xFFFF) throw ConfigError("horizon too long");
  io::Writer w;
  write_header(w, kSampleVersion, spec, sample.t_in(), sample.t_out());
  auto put = [&](const OccupancyGrid& g) {
    const auto runs = run_length_encode(g);
    w.u32(static_cast<std::uint32_t>(runs.size()));
    for (const auto& run : runs) {
      w.u32(run.length);
      w.u8(static_cast<std::uint8_t>(run.state));
    }
  };
  for (const auto& g : sample.inputs) put(g);
  for (const auto& g : sample.targets) put(g);
  return std::move(w.bytes());
}

Sample decode_sample(const io::Bytes& bytes) {
  io::Reader r(bytes);
  const Header h = read_header(r, kSampleVersion);
  Sample s;
  for (int k = 0; k <= h.t_in; ++k) {
    OccupancyGrid g = read_grid(r, h.spec);
    if (g.has_unknown()) {
      throw CorruptionError("input grid " + std::to_string(k) + " holds UNKNOWN cells");
    }
    s.inputs.push_back(std::move(g));
  }
  for (int k = 0; k <= h.t_out; ++k) s.targets.push_back(read_grid(r, h.spec));
  if (r.remaining() != 0) {
    throw CorruptionError(std::to_string(r.remaining()) + " trailing bytes after last grid");
  }
  return s;
}

void write_sample(const Sample& sample, const fs::path& path) {
  io::write_file(path, encode_sample(sample));
}

Sample read_sample(const fs::path& path) {
  try {
    return decode_sample(io::read_file(path));
  } catch (const Error& e) {
    rethrow_with_context(e, path.string());
  }
}

io::Bytes encode_prediction(const Prediction& pred) {
  if (pred.frames.empty()) throw ShapeError("prediction holds no frames");
  const GridSpec& spec = pred.frames.front().spec();
  check_total(spec);
  io::Writer w;
  write_header(w, kPredictionVersion, spec, pred.t_in, static_cast<int>(pred.frames.size()) - 1);
  w.bytes().reserve(w.bytes().size() + pred.frames.size() * spec.voxel_count() * 4);
  for (const auto& f : pred.frames) {
    if (f.spec() != spec) throw ShapeError("prediction frames do not share one GridSpec");
    for (const float p : f.probs()) w.f32(p);
  }
  return std::move(w.bytes());
}

Prediction decode_prediction(const io::Bytes& bytes) {
  io::Reader r(bytes);
  const Header h = read_header(r, kPredictionVersion);
  const std::size_t n = h.spec.voxel_count();
  if (r.remaining() != static_cast<std::size_t>(h.t_out + 1) * n * 4) {
    throw CorruptionError("prediction payload is " + std::to_string(r.remaining()) +
                          " bytes, expected " +
                          std::to_string(static_cast<std::size_t>(h.t_out + 1) * n * 4));
  }
  Prediction pred;
  pred.t_in = h.t_in;
  for (int k = 0; k <= h.t_out; ++k) {
    std::vector<float> probs(n);
    for (auto& p : probs) p = r.f32();
    try {
      pred.frames.emplace_back(h.spec, std::move(probs));
    } catch (const DataError& e) {
      throw CorruptionError(e.what());
    }
  }
  return pred;
}

void write_prediction(const Prediction& pred, const fs::path& path) {
  io::write_file(path, encode_prediction(pred));
}

Prediction read_prediction(const fs::path& path) {
  try {
    return decode_prediction(io::read_file(path));
  } catch (const Error& e) {
    rethrow_with_context(e, path.string());
  }
}

const char* to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw ConfigError("unknown split '" + s + "', expected train, val or test");
}

std::map<std::string, Split> split_sequences(std::vector<std::string> sequence_ids,
                                             const SplitRatios& ratios, std::uint64_t seed) {
  const std::array<double, 3> r{ratios.train, ratios.val, ratios.test};
  for (const double v : r) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("split ratios must be non-negative");
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");

  std::sort(sequence_ids.begin(), sequence_ids.end());
  if (std::adjacent_find(sequence_ids.begin(), sequence_ids.end()) != sequence_ids.end()) {
    throw ConfigError("duplicate sequence ids");
  }
  const std::size_t n = sequence_ids.size();
  const auto nonzero = static_cast<std::size_t>(std::count_if(r.begin(), r.end(), [](double v) { return v > 0.0; }));
  if (n < nonzero) {
    throw ConfigError(std::to_string(n) + " sequences cannot fill " + std::to_string(nonzero) +
                      " non-empty splits");
  }

  // Largest remainder. Shares within 1e-9 of an integer count as exact.
  std::array<std::size_t, 3> count{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    double share = r[i] * static_cast<double>(n);
    if (std::abs(share - std::round(share)) < 1e-9) share = std::round(share);
    count[i] = static_cast<std::size_t>(std::floor(share));
    remainder[i] = share - std::floor(share);
    assigned += count[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (remainder[i] > remainder[best]) best = i;
    }
    ++count[best];
    remainder[best] = -1.0;
    ++assigned;
  }
  for (int i = 0; i < 3; ++i) {
    if (r[i] > 0.0 && count[i] == 0) {
      const auto donor = static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
      --count[donor];
      ++count[i];
    }
  }

  // Fisher-Yates over the raw engine output: std::shuffle and the standard
  // distributions are implementation-defined, mt19937_64 is not.
  std::mt19937_64 engine(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(engine() % i);
    std::swap(sequence_ids[i - 1], sequence_ids[j]);
  }

  std::map<std::string, Split> out;
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < count[i]; ++k) out[sequence_ids[pos++]] = kAllSplits[i];
  }
  return out;
}

std::vector<std::string> DatasetManifest::split_paths(Split s) const {
  std::vector<std::string> paths;
  for (const auto& rec : samples) {
    if (rec.split == s) paths.push_back(rec.path);
  }
  return paths;
}

std::size_t DatasetManifest::frame_count(Split s) const {
  return static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(),
                                                [s](const SampleRecord& r) { return r.split == s; }));
}

json to_json(const DatasetManifest& m) {
  json splits = json::object();
  json counts = json::object();
  json scenes = json::object();
  for (const Split s : kAllSplits) {
    splits[to_string(s)] = m.split_paths(s);
    counts[to_string(s)] = m.frame_count(s);
    json ids = json::array();
    for (const auto& [id, split] : m.sequence_splits) {
      if (split == s) ids.push_back(id);
    }
    scenes[to_string(s)] = std::move(ids);
  }
  json samples = json::array();
  for (const auto& rec : m.samples) {
    samples.push_back({{"path", rec.path},
                       {"sequence_id", rec.sequence_id},
                       {"t0_frame", rec.t0_frame},
                       {"split", to_string(rec.split)},
                       {"dynamic_instances", rec.dynamic_instances},
                       {"dropped_objects", rec.dropped_objects}});
  }
  return {{"format", "OCF1"},
          {"name", m.name},
          {"grid", io::to_json(m.spec)},
          {"T_in", m.t_in},
          {"T_out", m.t_out},
          {"splits", std::move(splits)},
          {"frame_counts", std::move(counts)},
          {"scenes", std::move(scenes)},
          {"samples", std::move(samples)}};
}

DatasetManifest manifest_from_json(const json& j) {
  try {
    DatasetManifest m;
    m.name = j.at("name").get<std::string>();
    m.spec = io::grid_from_json(j.at("grid"));
    m.t_in = j.at("T_in").get<int>();
    m.t_out = j.at("T_out").get<int>();
    for (const Split s : kAllSplits) {
      for (const auto& id : j.at("scenes").at(to_string(s))) {
        if (!m.sequence_splits.emplace(id.get<std::string>(), s).second) {
          throw ConsistencyError("sequence " + id.get<std::string>() + " appears in two splits");
        }
      }
    }
    std::set<std::string> seen;
    for (const auto& rec : j.at("samples")) {
      SampleRecord r;
      r.path = rec.at("path").get<std::string>();
      r.sequence_id = rec.at("sequence_id").get<std::string>();
      r.t0_frame = rec.at("t0_frame").get<std::int64_t>();
      r.split = split_from_string(rec.at("split").get<std::string>());
      r.dynamic_instances = rec.value("dynamic_instances", std::size_t{0});
      r.dropped_objects = rec.value("dropped_objects", std::size_t{0});
      if (!seen.insert(r.path).second) throw ConsistencyError("sample " + r.path + " listed twice");
      const auto it = m.sequence_splits.find(r.sequence_id);
      if (it == m.sequence_splits.end() || it->second != r.split) {
        throw ConsistencyError("sample " + r.path + " is filed outside its scene's split");
      }
      m.samples.push_back(std::move(r));
    }
    // The split lists must agree with the per-sample records.
    for (const Split s : kAllSplits) {
      if (j.at("splits").at(to_string(s)).get<std::vector<std::string>>() != m.split_paths(s)) {
        throw ConsistencyError(std::string("split list ") + to_string(s) +
                               " disagrees with sample records");
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("dataset manifest: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("dataset manifest: ") + e.what());
  }
}

void write_manifest(const DatasetManifest& m, const fs::path& dataset_dir) {
  io::write_json(dataset_dir / "manifest.json", to_json(m));
}

DatasetManifest read_manifest(const fs::path& dataset_dir) {
  const fs::path path = dataset_dir / "manifest.json";
  if (!fs::is_regular_file(path)) throw FormatError(dataset_dir.string() + ": missing manifest.json");
  DatasetManifest m = manifest_from_json(io::read_json(path));
  for (const auto& rec : m.samples) {
    if (!fs::is_regular_file(dataset_dir / rec.path)) {
      throw ConsistencyError("listed sample missing: " + (dataset_dir / rec.path).string());
    }
  }
  return m;
}

}  // namespace ocf
