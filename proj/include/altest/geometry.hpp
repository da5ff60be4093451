#pragma once

#include <cstddef>
#include <cstdint>

#include "altest/linalg.hpp"
#include "altest/model.hpp"
#include "altest/rng.hpp"

namespace altest {

// ξ(Σ) = √tr(Σ⁻¹Σ*Σ⁻¹) / tr(Σ⁻¹)
double xi_factor(const Matrix& sigma, const Matrix& sigma_star);

struct XiCheckResult {
    bool pass = true;
    double worst_violation = 0.0;  // max over samples of ξ(Σ*) − ξ(Σ), ≤ 0 when passing
    std::size_t trials = 0;
};

XiCheckResult xi_minimizer_check(const Matrix& sigma_star, std::size_t trials,
                                 std::uint64_t seed, const StreamId& stream);

struct McEstimate {
    double value = 0.0;
    double se = 0.0;
    std::size_t samples = 0;
};

// Samples are drawn in fixed-size chunks, each with its own stream, so the
// result depends only on (seed, stream, samples).
inline constexpr std::size_t kMcChunk = 4096;

// w(B) for the unit L1 ball: E‖g‖∞.
McEstimate width_l1_ball(std::size_t p, std::size_t samples, std::uint64_t seed,
                         const StreamId& stream);

// Squared distance from g to τ·∂‖θ*‖₁ and its minimizer over τ ≥ 0.
struct PolarDistance {
    double tau = 0.0;
    double dist2 = 0.0;
};
PolarDistance polar_distance_l1(const Vector& g, const Vector& theta_star);

// Projection of g onto the L1 descent cone at θ*.
Vector project_descent_cone_l1(const Vector& g, const Vector& theta_star);

// √E‖Π_K(g)‖² = √E dist²(g, K°) for the L1 descent cone K at θ*, an upper
// bound on w(A(θ*)).
McEstimate width_descent_cone(const Vector& theta_star, std::size_t samples,
                              std::uint64_t seed, const StreamId& stream);

struct CompatibilityEstimate {
    double psi = 0.0;           // analytic bound min(2√s, √p)
    double sampled_lower = 0.0; // max ‖v‖₁/‖v‖₂ over sampled cone directions
    std::size_t samples = 0;
};

CompatibilityEstimate restricted_norm_compat(const Vector& theta_star, std::size_t samples,
                                             std::uint64_t seed, const StreamId& stream);

struct BoundConstants {
    double kappa = 1.0;
    double mu_max = 1.0;
    double mu_min = 1.0;
    double c1 = 1.0;
    double c = 1.0;
    double kappa0 = 1.0;
};

struct BoundInputs {
    std::size_t n = 0;
    std::size_t m = 0;
    double xi_star = 0.0;
    double psi = 0.0;
    double width_ball = 0.0;
    double lambda_min_star = 0.0;
};

struct BoundValues {
    double e_orc = 0.0;
    double e_min = 0.0;
};

// Throws bound_divergence when 1 − 2 e_orc √(μ_max/λ_min(Σ*)) ≤ 0.
BoundValues bound_values(const BoundInputs& in, const BoundConstants& k = {});

struct GeometryReport {
    double xi_sigma = 0.0;  // ξ(I), the ordinary-GDS factor
    double xi_star = 0.0;
    McEstimate width_ball;
    McEstimate width_cone;
    double psi = 0.0;
    double psi_sampled = 0.0;
    double rho = 1.0;           // sup of ‖v‖₂ over the unit L1 ball
    double tau_oracle = 0.0;    // ‖Σ⁻¹Σ*^{1/2}‖_F / ‖Σ⁻¹Σ*^{1/2}‖₂ at Σ = Σ*
    double tau_identity = 0.0;  // same at Σ = I
    double e_orc = 0.0;
    double e_min = 0.0;
    bool bound_diverged = false;
    std::size_t mc_samples = 0;
};

GeometryReport geometry_report(const ModelSpec& spec, std::size_t n, std::size_t samples,
                               const BoundConstants& k = {});

} // namespace altest
