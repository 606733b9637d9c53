#pragma once

#include <stdexcept>
#include <string>

namespace dynbc {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Raised when a saddle system cannot be factorized. `block()` names the
/// block responsible: "B" for a rank-deficient constraint, "V" for a
/// V-block that is singular on ker B.
class SingularSystemError : public Error {
public:
    SingularSystemError(std::string block, const std::string& what)
        : Error(what), block_(std::move(block)) {}

    const std::string& block() const noexcept { return block_; }

private:
    std::string block_;
};

}  // namespace dynbc
