#include "altest/covest.hpp"

#include <algorithm>
#include <cmath>

#include "altest/error.hpp"

namespace altest {

CovEstimate condition_covariance(const Matrix& raw) {
    CovEstimate est;
    est.sigma_hat = symmetrized(raw);
    SymmetricSpectrum spec = symmetric_spectrum(est.sigma_hat);
    const double floor = kConditioningEpsilon * std::max(1.0, spec.max());
    if (spec.min() < floor) {
        est.sigma_hat.diagonal().array() += floor;
        est.regularized = true;
        est.epsilon_added = floor;
        spec.values.array() += floor;
    }
    est.min_eig = spec.min();
    est.max_eig = spec.max();
    return est;
}

CovEstimate estimate_covariance(ObservationSpan data, const Vector& theta) {
    if (data.empty()) throw Error(ErrorKind::insufficient_data, "estimate_covariance: empty dataset");
    const auto m = data.front().X.rows();
    if (theta.size() != data.front().X.cols()) {
        throw Error(ErrorKind::invalid_parameter, "estimate_covariance: theta length must equal p");
    }
    Matrix s = Matrix::Zero(m, m);
    for (const Observation& o : data) {
        const Vector r = o.y - o.X * theta;
        s.noalias() += r * r.transpose();
    }
    s /= double(data.size());
    return condition_covariance(s);
}

SpectralBounds spectral_sandwich(const Matrix& sigma_hat, const Matrix& sigma_star) {
    if (sigma_hat.rows() != sigma_star.rows() || sigma_hat.cols() != sigma_star.cols() ||
        sigma_star.rows() != sigma_star.cols()) {
        throw Error(ErrorKind::invalid_parameter, "spectral_sandwich: dimension mismatch");
    }
    const SymmetricSpectrum star = symmetric_spectrum(symmetrized(sigma_star));
    if (!(star.min() > 1e-12 * std::max(1.0, star.max()))) {
        throw Error(ErrorKind::invalid_parameter, "spectral_sandwich: sigma_star is singular");
    }
    const Matrix inv_sqrt = spectral_apply(star, [](double l) { return 1.0 / std::sqrt(l); });
    const Matrix sandwich = symmetrized(inv_sqrt * sigma_hat * inv_sqrt);
    const SymmetricSpectrum s = symmetric_spectrum(sandwich);
    return {s.min(), s.max()};
}

} // namespace altest
