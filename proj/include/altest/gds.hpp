#pragma once

#include <cstddef>

#include "altest/linalg.hpp"
#include "altest/model.hpp"

namespace altest {

enum class NormKind { l1 };

// Structure-inducing norm ‖·‖ with its dual ‖·‖*. Only L1 ships.
class NormDescriptor {
public:
    static NormDescriptor l1(std::size_t p) { return NormDescriptor(NormKind::l1, p); }

    NormKind kind() const { return kind_; }
    std::size_t dimension() const { return p_; }

    double value(const Vector& v) const;
    double dual(const Vector& v) const;

    // g ∈ ∂‖θ‖ up to tol.
    bool in_subdifferential(const Vector& theta, const Vector& g, double tol = 1e-9) const;

private:
    NormDescriptor(NormKind kind, std::size_t p) : kind_(kind), p_(p) {}

    NormKind kind_;
    std::size_t p_;
};

// min ‖θ‖  s.t.  ‖gram·θ − linear‖* ≤ gamma
struct GdsProblem {
    Matrix gram;
    Vector linear;
    double gamma = 0.0;
    NormDescriptor norm = NormDescriptor::l1(0);

    std::size_t p() const { return static_cast<std::size_t>(linear.size()); }
};

struct GdsSolution {
    Vector theta_hat;
    double residual_dual_norm = 0.0;
    double norm_value = 0.0;
    std::size_t solver_iterations = 0;
    bool converged = false;
};

struct SolverOptions {
    double tol = 1e-6;
    std::size_t max_iter = 50'000;
};

// gram = (1/n) Σ X_iᵀ Σ⁻¹ X_i and linear = (1/n) Σ X_iᵀ Σ⁻¹ y_i, both from
// one eigendecomposition of sigma. Throws ill_conditioned_covariance when
// sigma is not safely invertible.
GdsProblem assemble_problem(ObservationSpan data, const Matrix& sigma, double gamma,
                            const NormDescriptor& norm);

double residual_dual_norm(const GdsProblem& problem, const Vector& theta);

GdsSolution solve_gds(const GdsProblem& problem, const SolverOptions& options = {});

// Unnormalized single-observation form ‖Xᵀ(Xθ − y)‖* ≤ gamma.
GdsSolution solve_single_response(const Matrix& X, const Vector& y, double gamma,
                                  const NormDescriptor& norm,
                                  const SolverOptions& options = {});

} // namespace altest
