#pragma once

#include <cstdarg>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace cadet {

// Error taxonomy maps 1:1 onto the C API status codes and CLI exit codes:
// invalid_argument / io -> user error (exit 1), numeric / internal -> exit 2.
enum class ErrorKind { invalid_argument, io, numeric, internal };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

LogLevel& log_level();
void set_log_level(const std::string& name);
void log_msg(LogLevel level, const char* fmt, ...);

#define CADET_LOG_DEBUG(...) ::cadet::log_msg(::cadet::LogLevel::debug, __VA_ARGS__)
#define CADET_LOG_INFO(...) ::cadet::log_msg(::cadet::LogLevel::info, __VA_ARGS__)
#define CADET_LOG_WARN(...) ::cadet::log_msg(::cadet::LogLevel::warn, __VA_ARGS__)
#define CADET_LOG_ERROR(...) ::cadet::log_msg(::cadet::LogLevel::error, __VA_ARGS__)

}  // namespace cadet
