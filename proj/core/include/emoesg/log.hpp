#pragma once

#include <spdlog/spdlog.h>

namespace emoesg {

/// Name of the environment variable read by init_logging().
inline constexpr const char* kLogLevelEnv = "EMOESG_LOG_LEVEL";

/// Shared stderr logger for the library. Level defaults to "warn" and is
/// taken from EMOESG_LOG_LEVEL (trace|debug|info|warn|error|off) on first use.
spdlog::logger& log();

/// Re-reads EMOESG_LOG_LEVEL.
void init_logging();

}  // namespace emoesg
