#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace logiprep {

// Error classes map one-to-one onto CLI exit codes.
enum class ErrorKind {
  kConfig = 2,
  kInput = 3,
  kInvariant = 4,
  kIo = 5,
};

constexpr std::string_view error_class_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return "config-error";
    case ErrorKind::kInput:
      return "input-error";
    case ErrorKind::kInvariant:
      return "invariant-violation";
    case ErrorKind::kIo:
      return "io-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace logiprep
