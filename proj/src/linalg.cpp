#include "altest/linalg.hpp"

#include <cmath>

#include "altest/error.hpp"

namespace altest {

SymmetricSpectrum symmetric_spectrum(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::numeric, "symmetric eigendecomposition failed");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix symmetrized(const Matrix& a) {
    return 0.5 * (a + a.transpose());
}

double asymmetry(const Matrix& a) {
    return (a - a.transpose()).cwiseAbs().maxCoeff();
}

} // namespace altest
