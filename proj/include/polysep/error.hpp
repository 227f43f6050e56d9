#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polysep {

enum class ErrorCode {
    InvalidSpec,
    InputFormat,
    EqualOperators,
    Overflow,
    DegenerateSystem,
    ZeroLeadingOperator,
    AllNodesMasked,
    InsufficientNodes,
    PolesDetected,
    NearDependentBasis,
    BudgetExceeded,
    NonFinite,
};

std::string_view to_string(ErrorCode code);

/// Error raised by any pipeline operation. `stage()` is empty until the
/// harness annotates the error with the pipeline stage that produced it.
class SeparationError : public std::runtime_error {
public:
    SeparationError(ErrorCode code, const std::string& what, std::string stage = {})
        : std::runtime_error(what), code_(code), stage_(std::move(stage)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& stage() const noexcept { return stage_; }

    SeparationError with_stage(std::string stage) const {
        return SeparationError(code_, what(), std::move(stage));
    }

private:
    ErrorCode code_;
    std::string stage_;
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InputFormat: return "InputFormat";
    case ErrorCode::EqualOperators: return "EqualOperators";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::DegenerateSystem: return "DegenerateSystem";
    case ErrorCode::ZeroLeadingOperator: return "ZeroLeadingOperator";
    case ErrorCode::AllNodesMasked: return "AllNodesMasked";
    case ErrorCode::InsufficientNodes: return "InsufficientNodes";
    case ErrorCode::PolesDetected: return "PolesDetected";
    case ErrorCode::NearDependentBasis: return "NearDependentBasis";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NonFinite: return "NonFinite";
    }
    return "Unknown";
}

} // namespace polysep
