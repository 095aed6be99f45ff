#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace dsbs {

/// Bad input: dimension mismatch, out-of-domain time, invalid schedule constants.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Drift queried at t >= 1, where the bridge kernel variance vanishes.
class TerminalTimeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Operation requires state that is missing (e.g. an empty dataset).
class InvalidState : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A particle state became NaN/Inf during integration.
class NumericFailure : public std::runtime_error {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    NumericFailure(const std::string& what, std::size_t particle = npos, std::size_t step = npos)
        : std::runtime_error(what), particle_(particle), step_(step) {}

    std::size_t particle() const noexcept { return particle_; }
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t particle_;
    std::size_t step_;
};

/// Malformed dataset file. `offset()` is a line number for CSV, a byte offset for f64le.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dsbs
