#pragma once

#include <spdlog/spdlog.h>

namespace delaycode::log {

/// Reads DELAYCODE_LOG (trace|debug|info|warn|error|off); default warn.
void init_from_env();

using spdlog::debug;
using spdlog::info;
using spdlog::warn;

}  // namespace delaycode::log
