#include "resistograph/log.hpp"

#include <cstdlib>
#include <mutex>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace resistograph::log {
namespace {

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_mt("resistograph");
    l->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
    l->set_level(spdlog::level::warn);
    return l;
  }();
  return instance;
}

}  // namespace

void set_level(std::string_view level) {
  logger()->set_level(spdlog::level::from_str(std::string(level)));
}

void init_from_env() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (const char* env = std::getenv("RESISTOGRAPH_LOG"); env != nullptr && *env != '\0') {
      set_level(env);
    }
  });
}

void debug(std::string_view msg) { logger()->debug(msg); }
void info(std::string_view msg) { logger()->info(msg); }
void warn(std::string_view msg) { logger()->warn(msg); }

}  // namespace resistograph::log
