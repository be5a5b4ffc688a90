#pragma once

#include <stdexcept>
#include <string>

namespace suiteopt {

/// Bad inputs: malformed files, violated invariants, out-of-range arguments.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// The assembled system is rank deficient (non-positive pivot during factorization).
class SingularSystemError : public std::runtime_error {
public:
    explicit SingularSystemError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace suiteopt
