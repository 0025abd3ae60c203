#pragma once

#include "hsds/error.hpp"

#include <cmath>
#include <optional>

namespace hsds::test {

inline double rel_err(double measured, double expected)
{
    return std::abs(measured - expected) / std::abs(expected);
}

/// Kind of the hsds::Error thrown by fn, or nullopt when it returns normally.
template <class Fn>
std::optional<ErrorKind> error_kind(Fn&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

} // namespace hsds::test
