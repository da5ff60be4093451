#include "altest/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "altest/error.hpp"

namespace altest {

double xi_factor(const Matrix& sigma, const Matrix& sigma_star) {
    if (sigma.rows() != sigma.cols() || sigma_star.rows() != sigma_star.cols() ||
        sigma.rows() != sigma_star.rows() || sigma.rows() == 0) {
        throw Error(ErrorKind::invalid_parameter, "xi_factor: dimension mismatch");
    }
    const SymmetricSpectrum spec = symmetric_spectrum(symmetrized(sigma));
    if (!(spec.min() > 0.0)) throw Error(ErrorKind::invalid_parameter, "xi_factor: sigma is singular");
    const Matrix inv = spectral_apply(spec, [](double l) { return 1.0 / l; });
    const double tr_inv = spec.values.cwiseInverse().sum();
    const double tr_sandwich = (inv * sigma_star * inv).trace();
    return std::sqrt(tr_sandwich) / tr_inv;
}

XiCheckResult xi_minimizer_check(const Matrix& sigma_star, std::size_t trials, std::uint64_t seed,
                                 const StreamId& stream) {
    XiCheckResult r;
    r.trials = trials;
    r.worst_violation = -std::numeric_limits<double>::infinity();
    if (trials == 0) {
        r.worst_violation = 0.0;
        return r;
    }
    const auto m = sigma_star.rows();
    const double xi_star = xi_factor(sigma_star, sigma_star);
    Engine engine = make_engine(seed, stream);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t t = 0; t < trials; ++t) {
        Matrix g(m, m);
        for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(engine);
        Matrix sigma = g * g.transpose() / double(m);
        sigma.diagonal().array() += 1e-2;
        const double violation = xi_star - xi_factor(sigma, sigma_star);
        r.worst_violation = std::max(r.worst_violation, violation);
        if (violation > 1e-12) r.pass = false;
    }
    return r;
}

namespace {

// Chunked Monte Carlo mean of f(engine); chunk c draws from its own stream.
template <class Sampler>
McEstimate chunked_mean(std::size_t samples, std::uint64_t seed, const StreamId& stream,
                        Sampler&& sample) {
    const std::uint64_t root = derive_seed(seed, stream);
    double sum = 0.0, sumsq = 0.0;
    std::size_t done = 0;
    for (std::uint64_t chunk = 0; done < samples; ++chunk) {
        Engine engine = make_engine(root, {chunk, 0, 0});
        const std::size_t count = std::min(kMcChunk, samples - done);
        double cs = 0.0, css = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            const double v = sample(engine);
            cs += v;
            css += v * v;
        }
        sum += cs;
        sumsq += css;
        done += count;
    }
    McEstimate est;
    est.samples = samples;
    if (samples == 0) return est;
    const double n = double(samples);
    est.value = sum / n;
    const double var = samples > 1 ? std::max(0.0, (sumsq - n * est.value * est.value) / (n - 1.0)) : 0.0;
    est.se = std::sqrt(var / n);
    return est;
}

Vector gaussian_vector(Engine& engine, Eigen::Index p) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector g(p);
    for (Eigen::Index j = 0; j < p; ++j) g(j) = normal(engine);
    return g;
}

double polar_objective(const Vector& g, const Vector& theta_star, double tau) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < g.size(); ++j) {
        const double t = theta_star(j);
        if (t != 0.0) {
            const double d = g(j) - tau * (t > 0.0 ? 1.0 : -1.0);
            acc += d * d;
        } else {
            const double d = std::max(0.0, std::abs(g(j)) - tau);
            acc += d * d;
        }
    }
    return acc;
}

void require_nonzero(const Vector& theta_star, const char* who) {
    if (theta_star.size() == 0 || (theta_star.array() == 0.0).all()) {
        throw Error(ErrorKind::invalid_parameter, std::string(who) + ": theta_star must be nonzero");
    }
}

} // namespace

McEstimate width_l1_ball(std::size_t p, std::size_t samples, std::uint64_t seed, const StreamId& stream) {
    if (p < 1) throw Error(ErrorKind::invalid_parameter, "width_l1_ball: p must be >= 1");
    if (samples < 2) throw Error(ErrorKind::invalid_parameter, "width_l1_ball: need >= 2 samples");
    const auto pp = static_cast<Eigen::Index>(p);
    return chunked_mean(samples, seed, stream, [pp](Engine& e) {
        return gaussian_vector(e, pp).lpNorm<Eigen::Infinity>();
    });
}

PolarDistance polar_distance_l1(const Vector& g, const Vector& theta_star) {
    // J(τ) is convex and its minimizer lies in [0, max|g|].
    double lo = 0.0;
    double hi = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - ratio * (hi - lo);
    double x2 = lo + ratio * (hi - lo);
    double f1 = polar_objective(g, theta_star, x1);
    double f2 = polar_objective(g, theta_star, x2);
    while (hi - lo > 1e-10) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = polar_objective(g, theta_star, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = polar_objective(g, theta_star, x2);
        }
    }
    PolarDistance best{0.5 * (lo + hi), polar_objective(g, theta_star, 0.5 * (lo + hi))};
    const double at_zero = polar_objective(g, theta_star, 0.0);
    if (at_zero < best.dist2) best = {0.0, at_zero};
    return best;
}

Vector project_descent_cone_l1(const Vector& g, const Vector& theta_star) {
    const double tau = polar_distance_l1(g, theta_star).tau;
    Vector v = g;
    for (Eigen::Index j = 0; j < g.size(); ++j) {
        const double t = theta_star(j);
        const double z = t != 0.0 ? tau * (t > 0.0 ? 1.0 : -1.0) : std::clamp(g(j), -tau, tau);
        v(j) -= z;
    }
    return v;
}

McEstimate width_descent_cone(const Vector& theta_star, std::size_t samples, std::uint64_t seed,
                              const StreamId& stream) {
    require_nonzero(theta_star, "width_descent_cone");
    if (samples < 2) throw Error(ErrorKind::invalid_parameter, "width_descent_cone: need >= 2 samples");
    const McEstimate sq = chunked_mean(samples, seed, stream, [&](Engine& e) {
        const Vector g = gaussian_vector(e, theta_star.size());
        return polar_distance_l1(g, theta_star).dist2;
    });
    McEstimate est;
    est.samples = samples;
    est.value = std::sqrt(sq.value);
    est.se = est.value > 0.0 ? sq.se / (2.0 * est.value) : 0.0;
    return est;
}

CompatibilityEstimate restricted_norm_compat(const Vector& theta_star, std::size_t samples,
                                             std::uint64_t seed, const StreamId& stream) {
    require_nonzero(theta_star, "restricted_norm_compat");
    const double s = double((theta_star.array() != 0.0).count());
    const double p = double(theta_star.size());
    CompatibilityEstimate est;
    est.psi = std::min(2.0 * std::sqrt(s), std::sqrt(p));
    est.samples = samples;
    if (samples == 0) return est;
    const std::uint64_t root = derive_seed(seed, stream);
    std::size_t done = 0;
    for (std::uint64_t chunk = 0; done < samples; ++chunk) {
        Engine engine = make_engine(root, {chunk, 0, 0});
        const std::size_t count = std::min(kMcChunk, samples - done);
        for (std::size_t i = 0; i < count; ++i) {
            const Vector v = project_descent_cone_l1(gaussian_vector(engine, theta_star.size()), theta_star);
            const double l2 = v.norm();
            if (l2 > 1e-12) est.sampled_lower = std::max(est.sampled_lower, v.lpNorm<1>() / l2);
        }
        done += count;
    }
    return est;
}

BoundValues bound_values(const BoundInputs& in, const BoundConstants& k) {
    if (in.n == 0 || in.m == 0) throw Error(ErrorKind::invalid_parameter, "bound_values: n and m must be >= 1");
    if (!(in.lambda_min_star > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "bound_values: lambda_min(sigma_star) must be > 0");
    }
    if (!(k.mu_min > 0.0) || !(k.mu_max > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "bound_values: mu_min and mu_max must be > 0");
    }
    const double n = double(in.n);
    BoundValues b;
    b.e_orc = k.c1 * k.kappa * std::sqrt(k.mu_max / (k.mu_min * k.mu_min)) * in.xi_star * in.psi *
              in.width_ball / std::sqrt(n);
    const double denominator = 1.0 - 2.0 * b.e_orc * std::sqrt(k.mu_max / in.lambda_min_star);
    if (!(denominator > 0.0)) {
        throw Error(ErrorKind::bound_divergence,
                    "bound_values: 1 - 2 e_orc sqrt(mu_max / lambda_min) = " + std::to_string(denominator) +
                        " <= 0");
    }
    b.e_min = b.e_orc * (1.0 + 2.0 * k.c * k.kappa0 * std::pow(double(in.m) / n, 0.25)) / denominator;
    return b;
}

GeometryReport geometry_report(const ModelSpec& spec, std::size_t n, std::size_t samples,
                               const BoundConstants& k) {
    GeometryReport r;
    const auto m = static_cast<Eigen::Index>(spec.m());
    const Matrix& star = spec.sigma_star();
    r.mc_samples = samples;
    r.xi_sigma = xi_factor(Matrix::Identity(m, m), star);
    r.xi_star = xi_factor(star, star);
    r.width_ball = width_l1_ball(spec.p(), samples, spec.seed(), {0, 0, stream_role::geometry_ball});
    r.width_cone = width_descent_cone(spec.theta_star(), samples, spec.seed(),
                                      {0, 0, stream_role::geometry_cone});
    const CompatibilityEstimate compat =
        restricted_norm_compat(spec.theta_star(), samples, spec.seed(), {0, 0, stream_role::geometry_psi});
    r.psi = compat.psi;
    r.psi_sampled = compat.sampled_lower;

    const SymmetricSpectrum s = symmetric_spectrum(star);
    r.tau_oracle = std::sqrt(s.values.cwiseInverse().sum()) / std::sqrt(1.0 / s.min());
    r.tau_identity = std::sqrt(s.values.sum()) / std::sqrt(s.max());

    try {
        const BoundValues b = bound_values({n, spec.m(), r.xi_star, r.psi, r.width_ball.value, s.min()}, k);
        r.e_orc = b.e_orc;
        r.e_min = b.e_min;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::bound_divergence) throw;
        r.bound_diverged = true;
        r.e_orc = k.c1 * k.kappa * std::sqrt(k.mu_max / (k.mu_min * k.mu_min)) * r.xi_star * r.psi *
                  r.width_ball.value / std::sqrt(double(n));
        r.e_min = std::numeric_limits<double>::infinity();
    }
    return r;
}

} // namespace altest
