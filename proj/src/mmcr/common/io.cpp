// SPDX-License-Identifier: Apache-2.0
#include "mmcr/common/io.hpp"

#include <fmt/format.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "mmcr/common/error.hpp"

namespace mmcr {

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::uint8_t> read_binary_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  static std::atomic<unsigned> counter{0};
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
  fs::path tmp = path;
  tmp += fmt::format(".tmp{}-{}", tid % 100000, counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::StorageError, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail(ErrorCode::StorageError, "short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::StorageError, "cannot move into place: " + path.string());
  }
}

void for_each_jsonl(const fs::path& path, const std::function<void(std::size_t, const Json&)>& fn) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json value;
    try {
      value = Json::parse(line);
    } catch (const Json::parse_error& e) {
      fail(ErrorCode::SchemaError, fmt::format("{}:{}: invalid JSON: {}", path.string(), lineno, e.what()));
    }
    try {
      fn(lineno, value);
    } catch (const Json::exception& e) {
      fail(ErrorCode::SchemaError, fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SchemaError) throw;
      fail(ErrorCode::SchemaError, fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
}

std::string format_g17(double value) { return fmt::format("{:.17g}", value); }

std::string pretty_json(const Json& value) { return value.dump(2) + "\n"; }

std::string pretty_json(const OrderedJson& value) { return value.dump(2) + "\n"; }

}  // namespace mmcr
