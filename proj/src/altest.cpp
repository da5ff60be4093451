#include "altest/altest.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "altest/error.hpp"
#include "altest/geometry.hpp"

namespace altest {

std::string_view to_string(AltEstMode mode) {
    switch (mode) {
    case AltEstMode::resampled: return "resampled";
    case AltEstMode::practical: return "practical";
    }
    return "unknown";
}

std::string_view to_string(GammaRuleKind kind) {
    switch (kind) {
    case GammaRuleKind::oracle_noise: return "oracle_noise";
    case GammaRuleKind::plugin: return "plugin";
    case GammaRuleKind::fixed: return "fixed";
    }
    return "unknown";
}

void AltEstConfig::validate() const {
    if (T < 1) throw Error(ErrorKind::invalid_parameter, "AltEstConfig: T must be >= 1");
    if (!(gamma_scale > 0.0)) throw Error(ErrorKind::invalid_parameter, "AltEstConfig: gamma_scale must be > 0");
    if (!(solver_tol > 0.0)) throw Error(ErrorKind::invalid_parameter, "AltEstConfig: solver_tol must be > 0");
    if (gamma_rule.kind == GammaRuleKind::fixed && !(gamma_rule.fixed_value >= 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "AltEstConfig: fixed gamma must be >= 0");
    }
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

Matrix inverse_spd(const Matrix& sigma) {
    const SymmetricSpectrum spec = symmetric_spectrum(symmetrized(sigma));
    if (!(spec.min() > 0.0)) {
        throw Error(ErrorKind::ill_conditioned_covariance, "select_gamma: sigma is not positive definite");
    }
    return spectral_apply(spec, [](double l) { return 1.0 / l; });
}

BaselineResult run_fixed_sigma(ObservationSpan data, const ModelSpec& spec,
                               const AltEstConfig& cfg, const Matrix& sigma) {
    cfg.validate();
    const auto start = Clock::now();
    BaselineResult r;
    r.gamma_used = select_gamma(cfg.gamma_rule, data, sigma, cfg.gamma_scale);
    const GdsProblem problem =
        assemble_problem(data, sigma, r.gamma_used, NormDescriptor::l1(spec.p()));
    r.solution = solve_gds(problem, cfg.solver_options());
    r.err = (r.solution.theta_hat - spec.theta_star()).norm();
    r.xi = xi_factor(sigma, spec.sigma_star());
    r.wall_ms = elapsed_ms(start);
    return r;
}

} // namespace

double select_gamma(const GammaRule& rule, ObservationSpan data, const Matrix& sigma,
                    double scale) {
    if (!(scale > 0.0)) throw Error(ErrorKind::invalid_parameter, "select_gamma: scale must be > 0");
    switch (rule.kind) {
    case GammaRuleKind::fixed:
        if (!(rule.fixed_value >= 0.0)) {
            throw Error(ErrorKind::invalid_parameter, "select_gamma: fixed gamma must be >= 0");
        }
        return rule.fixed_value;
    case GammaRuleKind::plugin: {
        if (data.empty()) throw Error(ErrorKind::insufficient_data, "select_gamma: empty dataset");
        const Matrix inv = inverse_spd(sigma);
        const double n = double(data.size());
        const double p = double(data.front().X.cols());
        return scale * std::sqrt(inv.trace() / n) * std::sqrt(2.0 * std::log(p));
    }
    case GammaRuleKind::oracle_noise: {
        if (!has_noise(data)) {
            throw Error(ErrorKind::invalid_mode, "select_gamma: oracle_noise rule needs stored noise");
        }
        const Matrix inv = inverse_spd(sigma);
        Vector corr = Vector::Zero(data.front().X.cols());
        for (const Observation& o : data) corr.noalias() += o.X.transpose() * (inv * o.noise);
        corr /= double(data.size());
        return scale * corr.lpNorm<Eigen::Infinity>();
    }
    }
    throw Error(ErrorKind::invalid_parameter, "select_gamma: unknown rule");
}

TrajectoryReport run_altest(ObservationSpan data, const ModelSpec& spec,
                            const AltEstConfig& cfg, DataAccessObserver* observer) {
    cfg.validate();
    if (data.empty()) throw Error(ErrorKind::insufficient_data, "run_altest: empty dataset");

    ResamplingPlan plan;
    if (cfg.mode == AltEstMode::resampled) plan = plan_resampling(data.size(), cfg.T);
    const IndexRange full{0, data.size()};
    const NormDescriptor norm = NormDescriptor::l1(spec.p());

    TrajectoryReport report;
    Matrix sigma = Matrix::Identity(static_cast<Eigen::Index>(spec.m()),
                                    static_cast<Eigen::Index>(spec.m()));
    for (std::size_t t = 1; t <= cfg.T; ++t) {
        const auto start = Clock::now();
        const bool resampled = cfg.mode == AltEstMode::resampled;
        const IndexRange gds_range = resampled ? plan.gds_subset(t) : full;
        const IndexRange cov_range = resampled ? plan.covariance_subset(t) : full;
        IterationRecord rec;
        rec.t = t;
        try {
            if (observer) observer->on_gds_step(t, gds_range);
            const ObservationSpan gds_data = slice(data, gds_range);
            rec.gamma_used = select_gamma(cfg.gamma_rule, gds_data, sigma, cfg.gamma_scale);
            const GdsProblem problem = assemble_problem(gds_data, sigma, rec.gamma_used, norm);
            GdsSolution sol = solve_gds(problem, cfg.solver_options());
            rec.solver_converged = sol.converged;
            report.theta_hat = std::move(sol.theta_hat);

            if (observer) observer->on_covariance_step(t, cov_range);
            CovEstimate cov = estimate_covariance(slice(data, cov_range), report.theta_hat);
            sigma = std::move(cov.sigma_hat);
        } catch (const Error& e) {
            throw e.annotated("run_altest iteration " + std::to_string(t));
        }
        rec.theta_err = (report.theta_hat - spec.theta_star()).norm();
        rec.xi_hat = xi_factor(sigma, spec.sigma_star());
        rec.sigma_hat = sigma;
        rec.wall_ms = elapsed_ms(start);
        report.iterations.push_back(std::move(rec));
    }
    return report;
}

BaselineResult run_oracle_gds(ObservationSpan data, const ModelSpec& spec, const AltEstConfig& cfg) {
    return run_fixed_sigma(data, spec, cfg, spec.sigma_star());
}

BaselineResult run_ordinary_gds(ObservationSpan data, const ModelSpec& spec, const AltEstConfig& cfg) {
    const auto m = static_cast<Eigen::Index>(spec.m());
    return run_fixed_sigma(data, spec, cfg, Matrix::Identity(m, m));
}

} // namespace altest
