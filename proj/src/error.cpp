#include "altest/error.hpp"

namespace altest {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::ill_conditioned_covariance: return "ill-conditioned-covariance";
    case ErrorKind::infeasible_radius: return "infeasible-radius";
    case ErrorKind::invalid_mode: return "invalid-mode";
    case ErrorKind::bound_divergence: return "bound-divergence";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::config: return "config";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
    }
    return "unknown";
}

} // namespace altest
