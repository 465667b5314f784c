// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace mmcr {

namespace fs = std::filesystem;
using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

std::string read_text_file(const fs::path& path);
std::vector<std::uint8_t> read_binary_file(const fs::path& path);

// Writes to a sibling temp file and renames it into place, so concurrent
// writers of identical content never expose a partial file.
void write_file_atomic(const fs::path& path, std::string_view contents);

// Calls fn(line_number, json) for every non-blank line; parse failures become
// SchemaError carrying the 1-based line number.
void for_each_jsonl(const fs::path& path, const std::function<void(std::size_t, const Json&)>& fn);

// Shortest text that still carries 17 significant digits ("%.17g").
std::string format_g17(double value);

// Pretty JSON with a trailing newline; the form every report file uses.
std::string pretty_json(const Json& value);
std::string pretty_json(const OrderedJson& value);

}  // namespace mmcr
