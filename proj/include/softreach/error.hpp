#pragma once

#include <stdexcept>
#include <string>

namespace softreach {

/// Failure categories. The C API and the CLI map these onto status and exit codes.
enum class ErrorKind {
  validation,  // malformed input, violated precondition
  numerical,   // CFL violation, non-finite values
  domain,      // query outside the discretized domain
  io,          // file system or format errors
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::validation, what);
}

}  // namespace softreach
