#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "altest/covest.hpp"
#include "altest/gds.hpp"
#include "altest/model.hpp"

namespace altest {

enum class AltEstMode { resampled, practical };

enum class GammaRuleKind { oracle_noise, plugin, fixed };

struct GammaRule {
    GammaRuleKind kind = GammaRuleKind::oracle_noise;
    double fixed_value = 0.0;

    static GammaRule oracle_noise() { return {GammaRuleKind::oracle_noise, 0.0}; }
    static GammaRule plugin() { return {GammaRuleKind::plugin, 0.0}; }
    static GammaRule fixed(double value) { return {GammaRuleKind::fixed, value}; }
};

std::string_view to_string(AltEstMode mode);
std::string_view to_string(GammaRuleKind kind);

struct AltEstConfig {
    std::size_t T = 5;
    AltEstMode mode = AltEstMode::practical;
    GammaRule gamma_rule = GammaRule::oracle_noise();
    double gamma_scale = 1.1;
    double solver_tol = 1e-6;
    std::size_t max_iter = 50'000;
    std::uint64_t seed = 0;

    void validate() const;
    SolverOptions solver_options() const { return {solver_tol, max_iter}; }
};

struct IterationRecord {
    std::size_t t = 0;
    double theta_err = 0.0;
    double xi_hat = 0.0;     // ξ(Σ̂_t) against the true Σ*
    double gamma_used = 0.0;
    bool solver_converged = false;
    double wall_ms = 0.0;
    Matrix sigma_hat;        // Σ̂_t
};

struct TrajectoryReport {
    std::vector<IterationRecord> iterations;
    Vector theta_hat;
};

struct BaselineResult {
    GdsSolution solution;
    double err = 0.0;
    double gamma_used = 0.0;
    double xi = 0.0;
    double wall_ms = 0.0;
};

// Notified with the observation range each step reads. Ranges are relative
// to the dataset passed to run_altest.
class DataAccessObserver {
public:
    virtual ~DataAccessObserver() = default;
    virtual void on_gds_step(std::size_t t, IndexRange range) = 0;
    virtual void on_covariance_step(std::size_t t, IndexRange range) = 0;
};

double select_gamma(const GammaRule& rule, ObservationSpan data, const Matrix& sigma,
                    double scale);

TrajectoryReport run_altest(ObservationSpan data, const ModelSpec& spec,
                            const AltEstConfig& cfg,
                            DataAccessObserver* observer = nullptr);

// GDS with Σ = Σ* (only possible on synthetic data).
BaselineResult run_oracle_gds(ObservationSpan data, const ModelSpec& spec,
                              const AltEstConfig& cfg);

// GDS with Σ = I.
BaselineResult run_ordinary_gds(ObservationSpan data, const ModelSpec& spec,
                                const AltEstConfig& cfg);

} // namespace altest
