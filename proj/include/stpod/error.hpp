#pragma once

#include <stdexcept>
#include <string>

namespace stpod {

/// Violated precondition on user-supplied input (dimensions, parameters).
/// The CLI maps this to exit status 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent file contents.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation that could not complete (e.g. a reference run that fails
/// its self-consistency gate).
class RuntimeFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool cond, const std::string& what) {
    if (!cond) throw InputError(what);
}
}  // namespace detail

}  // namespace stpod
