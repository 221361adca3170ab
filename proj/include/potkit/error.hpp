#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace potkit {

enum class ErrorKind {
  InvalidInput,
  IndefiniteForm,
  UnresolvedComponent,
  NonConductorKink,
  SingularSystem,
  DenominatorNonpositive,
  NoConvergence,
  GridMismatch,
  NegativeSamples,
  KinkRadius,
  DegenerateDenominator,
  OutOfInterval,
  TOutOfRange,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace potkit
