#include "shearflow/error.hpp"

namespace shearflow {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::BadPeriod: return "BadPeriod";
        case ErrorCode::NonPositiveHeight: return "NonPositiveHeight";
        case ErrorCode::SingularGram: return "SingularGram";
        case ErrorCode::QuadratureBudgetExceeded: return "QuadratureBudgetExceeded";
        case ErrorCode::DissipativityViolated: return "DissipativityViolated";
        case ErrorCode::GeometryMismatch: return "GeometryMismatch";
        case ErrorCode::SolverFailure: return "SolverFailure";
        case ErrorCode::NonFiniteState: return "NonFiniteState";
        case ErrorCode::InvalidCertificate: return "InvalidCertificate";
        case ErrorCode::ShiftBeyondHorizon: return "ShiftBeyondHorizon";
        case ErrorCode::WindowBeyondHorizon: return "WindowBeyondHorizon";
        case ErrorCode::HorizonTooShort: return "HorizonTooShort";
        case ErrorCode::UnknownKey: return "UnknownKey";
        case ErrorCode::MissingBlock: return "MissingBlock";
        case ErrorCode::ConfigType: return "ConfigType";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

}  // namespace shearflow
