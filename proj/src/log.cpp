#include "robustcf/log.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

namespace robustcf {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* raw = std::getenv("ROBUSTCF_LOG");
    if (raw == nullptr) return LogLevel::Warn;
    const std::string value(raw);
    if (value == "off" || value == "0") return LogLevel::Off;
    if (value == "info") return LogLevel::Info;
    if (value == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return level;
}

namespace {
void emit(LogLevel at, const char* tag, std::string_view message) {
  if (log_level() >= at) {
    std::cerr << tag << message << "\n";
  }
}
}  // namespace

void log_warn(std::string_view message) { emit(LogLevel::Warn, "[robustcf] warning: ", message); }
void log_info(std::string_view message) { emit(LogLevel::Info, "[robustcf] ", message); }
void log_debug(std::string_view message) { emit(LogLevel::Debug, "[robustcf] debug: ", message); }

}  // namespace robustcf
