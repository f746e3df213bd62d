#pragma once

#include <stdexcept>
#include <string>

namespace miest {

enum class ErrorCode {
  InvalidArgument = 1,
  Parse,
  RaggedRows,
  DuplicateName,
  EmptyData,
  NonFinite,
  InsufficientSamples,
  DegenerateFit,
  Divergent,
  CalibrationFailed,
  BudgetExceeded,
  UnknownVariable,
  Io,
};

const char* error_code_name(ErrorCode code) noexcept;

// All failures raised by the library carry a machine-readable code.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace miest
