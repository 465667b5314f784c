// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmcr {

// Numeric values are mirrored by mmcr_status in the C API; keep them stable.
enum class ErrorCode : int {
  InvalidInput = 1,
  MissingImage = 2,
  StorageError = 3,
  UnknownRelation = 4,
  PoolExhausted = 5,
  SchemaError = 6,
  GenerationError = 7,
  DimensionError = 8,
  ChannelMissing = 9,
  NumericalError = 10,
  AlignmentError = 11,
  IoError = 12,
  UsageError = 13,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace mmcr
