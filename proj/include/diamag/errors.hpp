#ifndef DIAMAG_ERRORS_HPP
#define DIAMAG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace diamag {

// Invalid inputs are reported with std::invalid_argument. The types below
// cover failure modes that callers may want to distinguish from plain bad
// arguments.

// A parameter combination makes the requested quantity undefined
// (division by a zero slope, zero width, ...).
class singular_parameter_error : public std::runtime_error {
public:
    explicit singular_parameter_error(const std::string& what)
        : std::runtime_error(what) {}
};

// A least-squares solve could not produce a usable solution.
class fit_failure_error : public std::runtime_error {
public:
    explicit fit_failure_error(const std::string& what)
        : std::runtime_error(what) {}
};

// A discrete search has no admissible solution; the message lists the
// achievable range.
class no_solution_error : public std::runtime_error {
public:
    explicit no_solution_error(const std::string& what)
        : std::runtime_error(what) {}
};

// Configuration file or run-configuration problems.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what)
        : std::runtime_error(what) {}
};

} // namespace diamag

#endif
