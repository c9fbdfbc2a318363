#include "core/common.hpp"

namespace cadet {

LogLevel& log_level() {
  static LogLevel level = LogLevel::warn;
  return level;
}

void set_log_level(const std::string& name) {
  if (name == "debug") log_level() = LogLevel::debug;
  else if (name == "info") log_level() = LogLevel::info;
  else if (name == "warn") log_level() = LogLevel::warn;
  else if (name == "error") log_level() = LogLevel::error;
  else if (name == "off") log_level() = LogLevel::off;
  else raise(ErrorKind::invalid_argument, "unknown log level: " + name);
}

void log_msg(LogLevel level, const char* fmt, ...) {
  if (level < log_level()) return;
  static const char* names[] = {"DEBUG", "INFO", "WARN", "ERROR"};
  std::fprintf(stderr, "[%s] ", names[static_cast<int>(level)]);
  va_list args;
  va_start(args, fmt);
  std::vfprintf(stderr, fmt, args);
  va_end(args);
  std::fputc('\n', stderr);
}

}  // namespace cadet
