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

#include <stdexcept>
#include <string>

namespace ocf {

enum class ErrorCode {
  kFormat = 1,
  kConsistency,
  kData,
  kIo,
  kRange,
  kConfig,
  kShape,
  kCorruption,
  kInternal,
};

const char* to_string(ErrorCode code) noexcept;

/// Base of every error raised by the toolkit. The code survives the trip
/// through the C API as a status value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

template <ErrorCode C>
class CodedError : public Error {
 public:
  explicit CodedError(const std::string& what) : Error(C, what) {}
};

using FormatError = CodedError<ErrorCode::kFormat>;
using ConsistencyError = CodedError<ErrorCode::kConsistency>;
using DataError = CodedError<ErrorCode::kData>;
using IoError = CodedError<ErrorCode::kIo>;
using RangeError = CodedError<ErrorCode::kRange>;
using ConfigError = CodedError<ErrorCode::kConfig>;
using ShapeError = CodedError<ErrorCode::kShape>;
using CorruptionError = CodedError<ErrorCode::kCorruption>;
using InternalError = CodedError<ErrorCode::kInternal>;

/// Throws an error of the same type as `e` with `context` prefixed to its
/// message.
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context);

}  // namespace ocf
