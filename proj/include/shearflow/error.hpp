#ifndef SHEARFLOW_ERROR_HPP
#define SHEARFLOW_ERROR_HPP

#include <stdexcept>
#include <string>

namespace shearflow {

/// Error codes that map 1:1 onto the structured error JSON and CLI exit codes.
enum class ErrorCode {
    BadPeriod,
    NonPositiveHeight,
    SingularGram,
    QuadratureBudgetExceeded,
    DissipativityViolated,
    GeometryMismatch,
    SolverFailure,
    NonFiniteState,
    InvalidCertificate,
    ShiftBeyondHorizon,
    WindowBeyondHorizon,
    HorizonTooShort,
    UnknownKey,
    MissingBlock,
    ConfigType,
    IoError,
};

const char* to_string(ErrorCode code);

/// Exception carrying the module name and a machine-readable witness string
/// (e.g. the offending sample point or key) alongside the message.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, std::string module, std::string message, std::string witness = {})
        : std::runtime_error(std::string(to_string(code)) + " [" + module + "]: " + message),
          code_(code),
          module_(std::move(module)),
          message_(std::move(message)),
          witness_(std::move(witness)) {}

    ErrorCode code() const { return code_; }
    const std::string& module_name() const { return module_; }
    const std::string& message() const { return message_; }
    const std::string& witness() const { return witness_; }

  private:
    ErrorCode code_;
    std::string module_;
    std::string message_;
    std::string witness_;
};

}  // namespace shearflow

#endif
