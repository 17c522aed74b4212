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

#include "core/errors.hpp"

namespace ocf {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kFormat: return "FormatError";
    case ErrorCode::kConsistency: return "ConsistencyError";
    case ErrorCode::kData: return "DataError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kRange: return "RangeError";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kShape: return "ShapeError";
    case ErrorCode::kCorruption: return "CorruptionError";
    case ErrorCode::kInternal: return "InternalError";
  }
  return "Error";
}

[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context) {
  const std::string what = context + ": " + e.what();
  switch (e.code()) {
    case ErrorCode::kFormat: throw FormatError(what);
    case ErrorCode::kConsistency: throw ConsistencyError(what);
    case ErrorCode::kData: throw DataError(what);
    case ErrorCode::kIo: throw IoError(what);
    case ErrorCode::kRange: throw RangeError(what);
    case ErrorCode::kConfig: throw ConfigError(what);
    case ErrorCode::kShape: throw ShapeError(what);
    case ErrorCode::kCorruption: throw CorruptionError(what);
    case ErrorCode::kInternal: break;
  }
  throw InternalError(what);
}

}  // namespace ocf
