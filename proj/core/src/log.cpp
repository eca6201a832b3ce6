#include "emoesg/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>

#include <cstdlib>
#include <memory>

namespace emoesg {

namespace {

std::shared_ptr<spdlog::logger> make_logger() {
  auto sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
  auto logger = std::make_shared<spdlog::logger>("emoesg", sink);
  logger->set_pattern("[%l] %v");
  logger->set_level(spdlog::level::warn);
  if (const char* env = std::getenv(kLogLevelEnv)) {
    logger->set_level(spdlog::level::from_str(env));
  }
  return logger;
}

std::shared_ptr<spdlog::logger>& instance() {
  static std::shared_ptr<spdlog::logger> logger = make_logger();
  return logger;
}

}  // namespace

spdlog::logger& log() { return *instance(); }

void init_logging() {
  if (const char* env = std::getenv(kLogLevelEnv)) {
    instance()->set_level(spdlog::level::from_str(env));
  }
}

}  // namespace emoesg
