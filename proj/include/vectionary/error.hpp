/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vectionary {

/// Error classes map one-to-one onto CLI exit codes.
enum class ErrorClass : int {
  config = 2,   // bad usage, bad config file, missing required settings
  io = 3,       // file not found, unreadable, unwritable
  format = 4,   // malformed input data (headers, row shapes, encodings)
  domain = 5,   // contract violations on otherwise well-formed data
  numeric = 6,  // numerical failure (no root, dimension guards)
};

/// All toolkit errors carry a stable short code (e.g. "DimMismatch") so the
/// CLI can emit machine-readable error records.
class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string code, const std::string& message)
      : std::runtime_error(message), class_(cls), code_(std::move(code)) {}

  ErrorClass error_class() const noexcept { return class_; }
  const std::string& code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(class_); }

 private:
  ErrorClass class_;
  std::string code_;
};

inline Error config_error(std::string_view code, const std::string& msg) {
  return Error(ErrorClass::config, std::string(code), msg);
}
inline Error io_error(std::string_view code, const std::string& msg) {
  return Error(ErrorClass::io, std::string(code), msg);
}
inline Error format_error(std::string_view code, const std::string& msg) {
  return Error(ErrorClass::format, std::string(code), msg);
}
inline Error domain_error(std::string_view code, const std::string& msg) {
  return Error(ErrorClass::domain, std::string(code), msg);
}
inline Error numeric_error(std::string_view code, const std::string& msg) {
  return Error(ErrorClass::numeric, std::string(code), msg);
}

}  // namespace vectionary
