#pragma once

#include "polysep/error.hpp"

#include <optional>

namespace polysep::testing {

// Code of the SeparationError thrown by f, or nullopt if it returns normally.
template <class F>
std::optional<ErrorCode> error_of(F&& f) {
    try {
        f();
    } catch (const SeparationError& e) {
        return e.code();
    }
    return std::nullopt;
}

} // namespace polysep::testing
