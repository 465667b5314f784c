// SPDX-License-Identifier: Apache-2.0
#include "mmcr/common/error.hpp"

namespace mmcr {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::MissingImage: return "MissingImage";
    case ErrorCode::StorageError: return "StorageError";
    case ErrorCode::UnknownRelation: return "UnknownRelation";
    case ErrorCode::PoolExhausted: return "PoolExhausted";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::GenerationError: return "GenerationError";
    case ErrorCode::DimensionError: return "DimensionError";
    case ErrorCode::ChannelMissing: return "ChannelMissing";
    case ErrorCode::NumericalError: return "NumericalError";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Unknown";
}

}  // namespace mmcr
