#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mfc {

enum class ErrorCode {
    ZeroPolynomial,
    DegreeZero,
    InvalidParams,
    NotMonic,
    WrongDegree,
    ZeroInputGain,
    ConvergenceFailure,
    NonFiniteState,
    EmptyTrace,
    ConfigMismatch,
    InvalidGrid,
    IoFailure,
    InvalidConfig,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ZeroPolynomial: return "ZeroPolynomial";
    case ErrorCode::DegreeZero: return "DegreeZero";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NotMonic: return "NotMonic";
    case ErrorCode::WrongDegree: return "WrongDegree";
    case ErrorCode::ZeroInputGain: return "ZeroInputGain";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace mfc
