// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mmcr/common/io.hpp"

namespace mmcr {

inline constexpr std::uint64_t kDefaultSeed = 42;

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Subcommands in help order.
const std::vector<std::string>& command_names();

// Every option a subcommand accepts with its default. Shared keys (seed,
// backends, out_dir, log_level) are included. Empty-string path defaults
// are filled relative to out_dir by resolve_config.
OrderedJson command_defaults(const std::string& command);

// Materializes every default, checks option names and types (UsageError),
// turns paths absolute and expands backend specs to full descriptors
// (explicit, then MMCR_BACKEND_<KIND> from `getenv`, then stub defaults).
// The result is everything a replay needs.
OrderedJson resolve_config(const std::string& command, const Json& partial, const EnvLookup& getenv);

struct CommandOutcome {
  OrderedJson summary;    // what the command reports on stdout
  fs::path manifest_path;
};

// Runs a resolved config and writes exactly one run manifest:
// <out_dir>/<command>.manifest.json with {schema_version, subcommand,
// tool_version, seed, config, input_digests, outputs, started_at,
// wall_clock_seconds}.
CommandOutcome run_command(const std::string& command, const OrderedJson& resolved);

// Re-runs the subcommand recorded in a manifest with its recorded config.
CommandOutcome replay_manifest(const fs::path& manifest);

// sha256 of a file, or of the sorted (relative path, file digest) listing
// of a directory.
std::string digest_path(const fs::path& path);

}  // namespace mmcr
