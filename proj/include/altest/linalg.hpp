#pragma once

#include <Eigen/Dense>

namespace altest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Symmetric eigendecomposition with the pieces the estimators need.
struct SymmetricSpectrum {
    Vector values;   // ascending
    Matrix vectors;  // columns are eigenvectors

    double min() const { return values(0); }
    double max() const { return values(values.size() - 1); }
};

SymmetricSpectrum symmetric_spectrum(const Matrix& a);

// V f(Λ) Vᵀ for a spectral function applied entrywise to the eigenvalues.
template <class F>
Matrix spectral_apply(const SymmetricSpectrum& s, F&& f) {
    Vector mapped = s.values.unaryExpr(f);
    return s.vectors * mapped.asDiagonal() * s.vectors.transpose();
}

Matrix symmetrized(const Matrix& a);

// max |a_ij - a_ji|
double asymmetry(const Matrix& a);

} // namespace altest
