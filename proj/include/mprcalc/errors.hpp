#pragma once

#include <stdexcept>
#include <string>

namespace mprcalc {

/// Raised when a kernel is evaluated at an s where e^{lambda s} M(1-s) >= 1.
class UnstableError : public std::runtime_error {
public:
    explicit UnstableError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by the simulator when the backlog passes its ceiling.
class BacklogOverflowError : public std::runtime_error {
public:
    explicit BacklogOverflowError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mprcalc
