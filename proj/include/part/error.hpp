#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace part {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  EmptyInput,
  Parse,
  NonFinite,
  NoValidCut,
  EmptyProduct,
  SingularCovariance,
  NoAcceptance,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so the CLI can print a
// one-line machine-parseable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace part
