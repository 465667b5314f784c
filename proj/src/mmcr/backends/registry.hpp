// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mmcr/backends/interfaces.hpp"

namespace mmcr {

// Parses "kind=name[:key=value,...]", e.g. "visual_encoder=stub:grid_rows=2,grid_cols=2".
BackendDescriptor parse_backend_spec(const std::string& spec);

// One descriptor per kind: explicit specs win, then MMCR_BACKEND_<KIND>
// from `getenv`, then the stub default. Duplicate kinds are a UsageError.
std::vector<BackendDescriptor> resolve_backends(
    const std::vector<std::string>& specs,
    const std::function<std::optional<std::string>(const std::string&)>& getenv);

// Instantiates backends. Only "stub" is built in; other names are a UsageError.
Backends make_backends(const std::vector<BackendDescriptor>& descriptors);

// All-stub backends with default configuration.
Backends default_backends();

}  // namespace mmcr
