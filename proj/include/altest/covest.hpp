#pragma once

#include "altest/linalg.hpp"
#include "altest/model.hpp"

namespace altest {

struct CovEstimate {
    Matrix sigma_hat;
    double min_eig = 0.0;
    double max_eig = 0.0;
    bool regularized = false;
    double epsilon_added = 0.0;
};

inline constexpr double kConditioningEpsilon = 1e-8;

// Symmetrize, then add ε·max(1, λ_max)·I when λ_min falls below that floor.
CovEstimate condition_covariance(const Matrix& raw);

// (1/n) Σ (y_i − X_i θ)(y_i − X_i θ)ᵀ, conditioned.
CovEstimate estimate_covariance(ObservationSpan data, const Vector& theta);

struct SpectralBounds {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

// Extreme eigenvalues of Σ*^{-1/2} Σ̂ Σ*^{-1/2}.
SpectralBounds spectral_sandwich(const Matrix& sigma_hat, const Matrix& sigma_star);

} // namespace altest
