// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mmcr/backends/interfaces.hpp"
#include "mmcr/common/io.hpp"
#include "mmcr/training/adapter_state.hpp"

namespace mmcr {

// Versioned binary container: "MMCRCKPT", u32 version, config JSON echo,
// named f64 tensors tagged with their group, FNV-1a trailer. Little-endian.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;
  AdapterState state;
  Json config;  // free-form echo of the producing run
};

std::string encode_checkpoint(const AdapterState& state, const Json& config);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const fs::path& path, const AdapterState& state, const Json& config);
Checkpoint load_checkpoint(const fs::path& path);

// DimensionError when the adapters were trained for other feature sizes.
void check_compatible(const AdapterState& state, const Backends& backends);

}  // namespace mmcr
