#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace altest {

enum class ErrorKind {
    invalid_parameter,
    insufficient_data,
    ill_conditioned_covariance,
    infeasible_radius,
    invalid_mode,
    bound_divergence,
    numeric,
    config,
    parse,
    io,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers switch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    // Same kind, message prefixed with context (e.g. "iteration 3").
    Error annotated(std::string_view context) const {
        return Error(kind_, std::string(context) + ": " + what());
    }

private:
    ErrorKind kind_;
};

} // namespace altest
