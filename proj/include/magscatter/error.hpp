#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace magscatter {

enum class ErrorCode {
    NonConvergence,
    DecayTooSlow,
    AnalyticOnlyFamily,
    NotOrthogonal,
    CurlNotZero,
    ContourThroughOrigin,
    DiagonalEvaluation,
    OutsideTangencyRange,
    InvalidArgument,
    InvalidSpec,
};

constexpr std::string_view error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::DecayTooSlow: return "DecayTooSlow";
        case ErrorCode::AnalyticOnlyFamily: return "AnalyticOnlyFamily";
        case ErrorCode::NotOrthogonal: return "NotOrthogonal";
        case ErrorCode::CurlNotZero: return "CurlNotZero";
        case ErrorCode::ContourThroughOrigin: return "ContourThroughOrigin";
        case ErrorCode::DiagonalEvaluation: return "DiagonalEvaluation";
        case ErrorCode::OutsideTangencyRange: return "OutsideTangencyRange";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string context = {})
        : std::runtime_error(message), code_(code), context_(std::move(context)) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] const std::string& context() const noexcept { return context_; }

private:
    ErrorCode code_;
    std::string context_;
};

}  // namespace magscatter
