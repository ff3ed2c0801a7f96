#pragma once

#include <stdexcept>
#include <string>

namespace erepi {

enum class ErrorKind {
  InvalidParameter,
  DegenerateInput,
  InsufficientData,
  ThresholdNotBracketed,
  FileNotFound,
  Format,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::DegenerateInput: return "degenerate-input";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::ThresholdNotBracketed: return "threshold-not-bracketed";
    case ErrorKind::FileNotFound: return "file-not-found";
    case ErrorKind::Format: return "format";
  }
  return "unknown";
}

// Every failure raised by the library carries a kind so callers (and the CLI)
// can tell a bad argument from a statistical dead end.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace erepi
