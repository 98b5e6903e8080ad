#include "cosim/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <string>

namespace cosim {

void configure_logging() {
  auto logger = spdlog::get("cosim");
  if (!logger) logger = spdlog::stderr_color_mt("cosim");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("COSIM_LOG");
  const std::string level = env ? env : "";
  if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else {
    spdlog::set_level(spdlog::level::warn);
  }
}

}  // namespace cosim
