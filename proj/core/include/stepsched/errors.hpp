#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stepsched {

/// Invalid parameter value or violated precondition.
class ParamError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Iteration index outside a schedule's or trace's valid range.
class IndexError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Operation needs data that was not recorded or a constant the object lacks.
class CapabilityError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Requested quantity is undefined at the given inputs (e.g. PL ratio at a minimizer).
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An SGD run produced a non-finite or overflowing value.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::int64_t iteration)
        : std::runtime_error(what), iteration_(iteration) {}

    /// 1-based iteration at which the run blew up.
    std::int64_t iteration() const noexcept { return iteration_; }

private:
    std::int64_t iteration_;
};

}  // namespace stepsched
