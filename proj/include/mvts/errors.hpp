#ifndef MVTS_ERRORS_HPP
#define MVTS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mvts {

/// Invalid input data or configuration (CLI maps this to exit code 2).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A numeric procedure failed to produce a usable result (CLI exit code 3).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mvts

#endif
