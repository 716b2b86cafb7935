#pragma once

#include <stdexcept>
#include <string>

namespace lbq {

enum class ErrorCode {
    DimensionMismatch,
    NonPositiveRate,
    NegativeBufferLength,
    CapacityExceeded,
    StateOutOfRange,
    EmptyBuffer,
    NoAdmittedJobs,
    NotTwoServers,
    SingularSystem,
    SchedulerNotPS,
    InvalidArgument,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonPositiveRate: return "NonPositiveRate";
        case ErrorCode::NegativeBufferLength: return "NegativeBufferLength";
        case ErrorCode::CapacityExceeded: return "CapacityExceeded";
        case ErrorCode::StateOutOfRange: return "StateOutOfRange";
        case ErrorCode::EmptyBuffer: return "EmptyBuffer";
        case ErrorCode::NoAdmittedJobs: return "NoAdmittedJobs";
        case ErrorCode::NotTwoServers: return "NotTwoServers";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::SchedulerNotPS: return "SchedulerNotPS";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Base class for all library errors. Carries a machine-readable code so
/// callers can dispatch without parsing the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace lbq
