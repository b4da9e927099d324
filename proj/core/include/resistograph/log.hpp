#pragma once

#include <string_view>

namespace resistograph::log {

/// Reads RESISTOGRAPH_LOG (trace|debug|info|warn|error|off) once.
void init_from_env();
void set_level(std::string_view level);

void debug(std::string_view msg);
void info(std::string_view msg);
void warn(std::string_view msg);

}  // namespace resistograph::log
