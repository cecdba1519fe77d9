#pragma once

#include <stdexcept>
#include <string>

namespace fsr {

enum class ErrorKind {
  Validation,
  UnsupportedRegime,
  Resource,
  Inconsistency,
  UnsupportedInput,
};

class FsrError : public std::runtime_error {
 public:
  FsrError(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Process exit code associated with an error kind.
inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Validation:
    case ErrorKind::UnsupportedInput:
      return 2;
    case ErrorKind::UnsupportedRegime:
      return 3;
    case ErrorKind::Resource:
      return 4;
    case ErrorKind::Inconsistency:
      return 5;
  }
  return 5;
}

inline const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Validation: return "validation";
    case ErrorKind::UnsupportedRegime: return "unsupported-regime";
    case ErrorKind::Resource: return "resource";
    case ErrorKind::Inconsistency: return "inconsistency";
    case ErrorKind::UnsupportedInput: return "unsupported-input";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg) { throw FsrError(k, msg); }

}  // namespace fsr
