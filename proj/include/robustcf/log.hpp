#pragma once

#include <string_view>

namespace robustcf {

// Verbosity is read once from ROBUSTCF_LOG: off | warn (default) | info | debug.
// Everything goes to stderr; stdout is reserved for data.
enum class LogLevel { Off = 0, Warn = 1, Info = 2, Debug = 3 };

LogLevel log_level();

void log_warn(std::string_view message);
void log_info(std::string_view message);
void log_debug(std::string_view message);

}  // namespace robustcf
