#include "delaycode/log.hpp"

#include <cstdlib>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace delaycode::log {

void init_from_env() {
    // safe to call more than once (run_cli does it per invocation)
    auto logger = spdlog::get("delaycode");
    if (!logger) logger = spdlog::stderr_color_mt("delaycode");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* level = std::getenv("DELAYCODE_LOG");
    spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
}

}  // namespace delaycode::log
