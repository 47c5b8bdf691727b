#pragma once

#include <stdexcept>
#include <string>

namespace trix {

// Invalid configuration or argument. The CLI maps this to exit code 1.
class config_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A resource guard refused the job; pass force to override. Exit code 2.
class guard_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An internal consistency check failed, e.g. a confidence band that cannot
// renormalize. Exit code 3.
class inconsistency_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file; the message carries the 1-based row number.
class parse_error : public config_error {
public:
    parse_error(const std::string& what, std::size_t row)
        : config_error(what + " (row " + std::to_string(row) + ")"), row_(row) {}

    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

} // namespace trix
