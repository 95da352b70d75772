#pragma once

#include <stdexcept>
#include <string>

namespace sheetrefine {

enum class ErrorCode {
  InvalidArgument,
  FileNotFound,
  Io,
  Decode,
  Parse,
  Network,
  Service,
  Internal,
};

// Single exception type for the core; the C API maps `code()` onto status
// values and `what()` onto the thread-local error message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace sheetrefine
