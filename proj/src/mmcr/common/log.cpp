// SPDX-License-Identifier: Apache-2.0
#include "mmcr/common/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>

#include <memory>

#include "mmcr/common/error.hpp"

namespace mmcr::log {

spdlog::logger& get() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
    auto l = std::make_shared<spdlog::logger>("mmcr", sink);
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::warn);
    return l;
  }();
  return *logger;
}

void set_level(std::string_view level) {
  auto parsed = spdlog::level::from_str(std::string(level));
  if (parsed == spdlog::level::off && level != "off") {
    fail(ErrorCode::UsageError, "unknown log level: " + std::string(level));
  }
  get().set_level(parsed);
}

}  // namespace mmcr::log
