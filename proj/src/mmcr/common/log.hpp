// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <spdlog/spdlog.h>

#include <string_view>

namespace mmcr::log {

// Library-wide logger writing to stderr. Accepts "error", "warn", "info",
// "debug" and "off".
spdlog::logger& get();
void set_level(std::string_view level);

}  // namespace mmcr::log
