/** \file    errors.hpp
    \brief   Exception types shared by all modules.

    Two families are distinguished because the command-line front end maps them to
    different exit codes: malformed input (exit 1) and numerical failure (exit 2).
*/
#pragma once
#include <stdexcept>
#include <string>

namespace mather {

/// Malformed or out-of-range user input. `pointer()` is a JSON pointer into the
/// configuration document when the offending value came from there.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg, std::string pointer = "")
        : std::runtime_error(msg), pointer_(std::move(pointer)) {}
    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

/// A numerical procedure could not deliver a result satisfying its contract
/// (no convergence, infeasible program, control bound hit, trajectory blow-up).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mather
