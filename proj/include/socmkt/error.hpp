#pragma once

#include <stdexcept>
#include <string>

namespace socmkt {

// Machine-readable category, surfaced by the CLI in its error JSON.
enum class ErrorKind {
  invalid_spec,
  invalid_argument,
  infeasible,
  parse,
  io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace socmkt
