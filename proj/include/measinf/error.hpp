#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace measinf {

enum class ErrorCode {
    InvalidArgument,
    NegativeTerm,
    WindowCapExceeded,
    RepresentationOverflow,
    NotFinitePositive,
    CapViolated,
    NoValidCover,
    NotFiniteBase,
    PreconditionViolated,
    CoreMembershipUnknown,
    NoModulus,
    OpaqueUnsupported,
    CylinderBeyondD,
    SuperLevelNotRepresentable,
    NotPositiveAt,
    NoFeasibleP,
    BetaBelowHalf,
    StageNotTerminated,
    CarryUnverifiable,
    MotifTooLarge,
    UnsupportedDensity,
    ParseError,
    InvalidConfig,
};

const char* to_string(ErrorCode code) noexcept;

/// Library-wide exception. `index` carries the offending coordinate, cover
/// element or stage when the error is about one; parse errors carry a
/// 1-based line and column.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what, std::optional<std::size_t> index = std::nullopt)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), index_(index) {}

    Error(ErrorCode code, const std::string& what, std::size_t line, std::size_t column)
        : std::runtime_error(std::string(to_string(code)) + " at " + std::to_string(line) + ":" +
                             std::to_string(column) + ": " + what),
          code_(code), line_(line), column_(column) {}

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> index() const noexcept { return index_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> index_;
    std::size_t line_ = 0;
    std::size_t column_ = 0;
};

inline const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NegativeTerm: return "NegativeTerm";
    case ErrorCode::WindowCapExceeded: return "WindowCapExceeded";
    case ErrorCode::RepresentationOverflow: return "RepresentationOverflow";
    case ErrorCode::NotFinitePositive: return "NotFinitePositive";
    case ErrorCode::CapViolated: return "CapViolated";
    case ErrorCode::NoValidCover: return "NoValidCover";
    case ErrorCode::NotFiniteBase: return "NotFiniteBase";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::CoreMembershipUnknown: return "CoreMembershipUnknown";
    case ErrorCode::NoModulus: return "NoModulus";
    case ErrorCode::OpaqueUnsupported: return "OpaqueUnsupported";
    case ErrorCode::CylinderBeyondD: return "CylinderBeyondD";
    case ErrorCode::SuperLevelNotRepresentable: return "SuperLevelNotRepresentable";
    case ErrorCode::NotPositiveAt: return "NotPositiveAt";
    case ErrorCode::NoFeasibleP: return "NoFeasibleP";
    case ErrorCode::BetaBelowHalf: return "BetaBelowHalf";
    case ErrorCode::StageNotTerminated: return "StageNotTerminated";
    case ErrorCode::CarryUnverifiable: return "CarryUnverifiable";
    case ErrorCode::MotifTooLarge: return "MotifTooLarge";
    case ErrorCode::UnsupportedDensity: return "UnsupportedDensity";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

} // namespace measinf
