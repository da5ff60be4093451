// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "altest/altest.hpp"
#include "altest/covest.hpp"
#include "altest/error.hpp"
#include "altest/experiment.hpp"
#include "altest/geometry.hpp"
#include "support/fixtures.hpp"
#include "support/reference_lp.hpp"

using namespace altest;
using namespace altest::testing;

namespace {

constexpr std::uint64_t kSeed = 20170101;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct Stats {
    double mean = 0.0;
    double se = 0.0;
};

Stats stats_of(const std::vector<double>& v) {
    Stats s;
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= double(v.size());
    if (v.size() < 2) return s;
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / double(v.size() - 1) / double(v.size()));
    return s;
}

// err_l2 (or xi_hat) per trial for one (method, n, m, iteration) cell, ordered by trial.
std::vector<double> column(const std::vector<ResultRow>& rows, std::string_view method, std::size_t n,
                           std::size_t m, std::size_t iteration, bool xi = false) {
    std::vector<double> out;
    for (const ResultRow& r : rows)
        if (r.method == method && r.n == n && r.m == m && r.iteration == iteration)
            out.push_back(xi ? r.xi_hat : r.err_l2);
    return out;
}

Stats paired_difference(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return stats_of(d);
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

ExperimentConfig desk_config() {
    ExperimentConfig cfg;
    cfg.p = 100;
    cfg.s = 5;
    cfg.m = 4;
    cfg.rho = 0.8;
    cfg.T = 5;
    cfg.trials = 50;
    cfg.gamma_rule = GammaRule::oracle_noise();
    cfg.gamma_scale = 1.1;
    cfg.seed = kSeed;
    cfg.record_timing = false;
    return cfg;
}

// 1
Verdict solver_correctness() {
    std::mt19937_64 rng(kSeed);
    double worst_obj = 0.0, worst_feas = 0.0;
    int converged = 0, lp_failures = 0;
    const int instances = 200;
    for (int k = 0; k < instances; ++k) {
        const std::size_t p = 1 + rng() % 10;
        const std::size_t m = 1 + rng() % 4;
        const std::size_t n = 1 + rng() % 12;
        const double frac = 0.05 + 0.9 * double(rng() % 10000) / 10000.0;
        const GdsProblem prob = random_problem(kSeed + std::uint64_t(k), p, m, n, frac);
        const ReferenceGds ref = reference_gds(prob);
        if (ref.status != LpResult::Status::optimal) {
            ++lp_failures;
            continue;
        }
        const GdsSolution sol = solve_gds(prob);
        worst_obj = std::max(worst_obj, std::abs(sol.norm_value - ref.objective));
        if (sol.converged) {
            ++converged;
            worst_feas = std::max(worst_feas, sol.residual_dual_norm - prob.gamma);
        }
    }
    return {lp_failures == 0 && worst_obj <= 1e-4 && worst_feas <= 1e-5,
            fmt("%d instances, max |obj - LP| = %.2e (tol 1e-4), max excess ‖Aθ-b‖∞ - γ = %.2e "
                "(tol 1e-5), converged %d/%d",
                instances, worst_obj, worst_feas, converged, instances)};
}

// 2
Verdict xi_identities() {
    double worst_identity = 0.0, worst_star = 0.0;
    for (std::size_t m : {2u, 4u, 10u}) {
        const Matrix star = make_block_sigma(m, 0.8);
        worst_identity = std::max(worst_identity,
                                  std::abs(xi_factor(Matrix::Identity(m, m), star) - 1.0 / std::sqrt(double(m))));
        // Closed form for 2×2 blocks: tr(Σ*⁻¹) = m / (1 − ρ²).
        const double tr_inv = double(m) / (1.0 - 0.8 * 0.8);
        worst_star = std::max(worst_star, std::abs(xi_factor(star, star) - 1.0 / std::sqrt(tr_inv)));
    }
    std::mt19937_64 rng(kSeed);
    for (int rep = 0; rep < 5; ++rep) {
        Matrix s = random_spd(rng, 5);
        const Vector d = s.diagonal().cwiseSqrt().cwiseInverse();
        s = d.asDiagonal() * s * d.asDiagonal();
        worst_star = std::max(worst_star, std::abs(xi_factor(s, s) - 1.0 / std::sqrt(s.inverse().trace())));
    }
    bool minimizer = true;
    double worst_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t m : {2u, 4u}) {
        const XiCheckResult r = xi_minimizer_check(make_block_sigma(m, 0.8), 1000, kSeed, {m, 0, stream_role::xi_check});
        minimizer = minimizer && r.pass && r.trials == 1000;
        worst_violation = std::max(worst_violation, r.worst_violation);
    }
    return {worst_identity <= 1e-12 && worst_star <= 1e-12 && minimizer,
            fmt("|ξ(I) - 1/√m| ≤ %.1e, |ξ(Σ*) - 1/√tr(Σ*⁻¹)| ≤ %.1e, minimizer check over 1000 SPD "
                "samples for m∈{2,4}: %s (worst ξ(Σ*) - ξ(Σ) = %.3e)",
                worst_identity, worst_star, minimizer ? "pass" : "fail", worst_violation)};
}

struct DeskRun {
    std::vector<ResultRow> rows;
    std::size_t n = 80;
};

DeskRun desk_run() {
    ExperimentConfig cfg = desk_config();
    cfg.n_grid = {80};
    cfg.methods = {Method::altest_practical, Method::oracle, Method::ordinary};
    return {run_trials(cfg).rows, 80};
}

// 3
Verdict error_ordering(const DeskRun& run) {
    const auto oracle = column(run.rows, "oracle", run.n, 4, 1);
    const auto alt = column(run.rows, "altest_practical", run.n, 4, 5);
    const auto ordinary = column(run.rows, "ordinary", run.n, 4, 1);
    if (!all_finite(oracle) || !all_finite(alt) || !all_finite(ordinary))
        return {false, "non-finite errors in desk run"};
    const Stats so = stats_of(oracle), sa = stats_of(alt), sd = stats_of(ordinary);
    const Stats gap1 = paired_difference(alt, oracle);
    const Stats gap2 = paired_difference(ordinary, alt);
    const double unpaired1 = std::hypot(so.se, sa.se), unpaired2 = std::hypot(sa.se, sd.se);
    return {gap1.mean >= gap1.se && gap2.mean >= gap2.se,
            fmt("oracle %.4f±%.4f < AltEst(t=5) %.4f±%.4f < ordinary %.4f±%.4f; gaps %.4f (paired se "
                "%.4f, unpaired %.4f) and %.4f (paired se %.4f, unpaired %.4f)",
                so.mean, so.se, sa.mean, sa.se, sd.mean, sd.se, gap1.mean, gap1.se, unpaired1, gap2.mean,
                gap2.se, unpaired2)};
}

// 4
Verdict oracle_ratio(const DeskRun& run) {
    const Stats so = stats_of(column(run.rows, "oracle", run.n, 4, 1));
    const Stats sd = stats_of(column(run.rows, "ordinary", run.n, 4, 1));
    const double ratio = so.mean / sd.mean;
    return {ratio >= 0.45 && ratio <= 0.75,
            fmt("mean err oracle/ordinary = %.4f (predicted √(1-ρ²) = 0.6, band [0.45, 0.75])", ratio)};
}

// 5
Verdict contraction(const DeskRun& run) {
    std::vector<Stats> err, xi;
    for (std::size_t t = 1; t <= 5; ++t) {
        err.push_back(stats_of(column(run.rows, "altest_practical", run.n, 4, t)));
        xi.push_back(stats_of(column(run.rows, "altest_practical", run.n, 4, t, true)));
    }
    bool monotone = true, xi_monotone = true;
    for (std::size_t t = 1; t < 5; ++t) {
        monotone = monotone && err[t].mean <= err[t - 1].mean + err[t].se;
        xi_monotone = xi_monotone && xi[t].mean <= xi[t - 1].mean + xi[t].se;
    }
    const double xi_star = xi_factor(make_block_sigma(4, 0.8), make_block_sigma(4, 0.8));
    const bool toward = std::abs(xi[4].mean - xi_star) < std::abs(xi[0].mean - xi_star) &&
                        xi[4].mean >= xi_star - xi[4].se;
    const double tail = err[2].mean - err[4].mean;
    const double head = err[0].mean - err[4].mean;
    std::string seq, xseq;
    for (std::size_t t = 0; t < 5; ++t) {
        seq += fmt("%s%.4f", t ? "," : "", err[t].mean);
        xseq += fmt("%s%.4f", t ? "," : "", xi[t].mean);
    }
    return {monotone && tail <= 0.25 * head && xi_monotone && toward,
            fmt("err(t)=[%s] non-increasing within 1 se: %s; err(3)-err(5)=%.4f ≤ 0.25·(err(1)-err(5))=%.4f; "
                "ξ(Σ̂_t)=[%s] → ξ(Σ*)=%.4f: %s",
                seq.c_str(), monotone ? "yes" : "no", tail, 0.25 * head, xseq.c_str(), xi_star,
                xi_monotone && toward ? "yes" : "no")};
}

// 6
Verdict sample_size_trend(const std::vector<ResultRow>& rows) {
    const std::vector<std::size_t> ns{30, 60, 90};
    bool pass = true;
    std::string detail;
    for (const char* method : {"altest_resampled", "altest_practical"}) {
        std::vector<Stats> s;
        for (std::size_t n : ns) s.push_back(stats_of(column(rows, method, n, 4, 5)));
        for (std::size_t k = 0; k + 1 < s.size(); ++k) {
            const double se = std::hypot(s[k].se, s[k + 1].se);
            pass = pass && s[k].mean - s[k + 1].mean >= se;
        }
        detail += fmt("%s %.4f±%.4f / %.4f±%.4f / %.4f±%.4f; ", method, s[0].mean, s[0].se, s[1].mean,
                      s[1].se, s[2].mean, s[2].se);
    }
    const Stats rs = stats_of(column(rows, "altest_resampled", 30, 4, 5));
    const Stats pr = stats_of(column(rows, "altest_practical", 30, 4, 5));
    const bool small_n = rs.mean <= pr.mean + pr.se;
    detail += fmt("n=30 resampled %.4f ≤ practical + 1 se %.4f: %s", rs.mean, pr.mean + pr.se,
                  small_n ? "yes" : "no");
    return {pass && small_n, "n∈{30,60,90} final err " + detail};
}

// 7
Verdict budget_trend() {
    ExperimentConfig cfg = desk_config();
    cfg.mn_budget = 480;
    cfg.m_grid = {2, 4, 8};
    cfg.methods = {Method::altest_practical, Method::oracle};
    const std::vector<ResultRow> rows = run_trials(cfg).rows;
    std::vector<Stats> oracle, alt;
    for (const GridPoint& g : grid_points(cfg)) {
        oracle.push_back(stats_of(column(rows, "oracle", g.n, g.m, 1)));
        alt.push_back(stats_of(column(rows, "altest_practical", g.n, g.m, 5)));
    }
    double lo = oracle[0].mean, hi = oracle[0].mean;
    for (const Stats& s : oracle) {
        lo = std::min(lo, s.mean);
        hi = std::max(hi, s.mean);
    }
    const double variation = (hi - lo) / lo;
    const double gap = alt[2].mean - alt[0].mean;
    const double se = std::hypot(alt[0].se, alt[2].se);
    return {variation < 0.2 && gap >= se,
            fmt("oracle err m=2/4/8: %.4f/%.4f/%.4f, spread %.1f%% (< 20%%); AltEst m=8 %.4f - m=2 %.4f = %.4f "
                "≥ se %.4f",
                oracle[0].mean, oracle[1].mean, oracle[2].mean, 100.0 * variation, alt[2].mean, alt[0].mean,
                gap, se)};
}

// 8
Verdict covariance_band() {
    const std::size_t m = 4, n = 2000;
    const double band = 3.0 * std::sqrt(double(m) / double(n));
    const ModelSpec spec(make_sparse_theta(100, 5), make_block_sigma(m, 0.8), kSeed);
    int inside = 0;
    double lo = 1.0, hi = 1.0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        const Dataset d = sample_dataset(spec, n, {trial, 0, stream_role::dataset});
        const SpectralBounds b = spectral_sandwich(estimate_covariance(d, spec.theta_star()).sigma_hat,
                                                   spec.sigma_star());
        lo = std::min(lo, b.lambda_min);
        hi = std::max(hi, b.lambda_max);
        if (b.lambda_min >= 1.0 - band && b.lambda_max <= 1.0 + band) ++inside;
    }
    return {inside >= 95, fmt("%d/100 trials inside [%.4f, %.4f] (need ≥ 95); observed range [%.4f, %.4f]",
                              inside, 1.0 - band, 1.0 + band, lo, hi)};
}

// 9
Verdict t1_equivalence() {
    int identical = 0;
    const int instances = 20;
    for (int k = 0; k < instances; ++k) {
        const ModelSpec spec(make_sparse_theta(100, 5), make_block_sigma(4, 0.8), kSeed + std::uint64_t(k));
        const Dataset d = sample_dataset(spec, 40, {std::uint64_t(k), 0, stream_role::dataset});
        AltEstConfig cfg;
        cfg.T = 1;
        cfg.mode = AltEstMode::practical;
        const bool practical = run_altest(d, spec, cfg).theta_hat == run_ordinary_gds(d, spec, cfg).solution.theta_hat;
        cfg.mode = AltEstMode::resampled;
        const IndexRange first = plan_resampling(d.n(), 1).gds_subset(1);
        const bool resampled = run_altest(d, spec, cfg).theta_hat ==
                               run_ordinary_gds(slice(d, first), spec, cfg).solution.theta_hat;
        if (practical && resampled) ++identical;
    }
    return {identical == instances,
            fmt("%d/%d instances bit-identical in both modes", identical, instances)};
}

// 10
Verdict width_oracles() {
    const McEstimate ball = width_l1_ball(1, 100000, kSeed, {0, 0, stream_role::geometry_ball});
    const double half_normal = std::sqrt(2.0 / std::numbers::pi);
    const bool ball_ok = std::abs(ball.value - half_normal) <= 3.0 * ball.se;

    const std::size_t samples = 100000;
    const Vector theta = (Vector(2) << 1.0, 0.0).finished();
    const McEstimate cone = width_descent_cone(theta, samples, kSeed, {0, 0, stream_role::geometry_cone});
    // Discretized sup of ⟨v, g⟩ over the cone ∩ unit ball; the cone at (1, 0) is the wedge of
    // angles [3π/4, 5π/4].
    std::mt19937_64 rng(kSeed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> normal;
    const int arc = 720;
    double acc = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double g1 = normal(rng), g2 = normal(rng);
        double sup = 0.0;
        for (int k = 0; k <= arc; ++k) {
            const double phi = 0.75 * std::numbers::pi + 0.5 * std::numbers::pi * k / arc;
            sup = std::max(sup, std::cos(phi) * g1 + std::sin(phi) * g2);
        }
        acc += sup * sup;
    }
    const double oracle = std::sqrt(acc / double(samples));
    const double rel = std::abs(cone.value - oracle) / oracle;

    bool psi_ok = true;
    std::string psi_detail;
    for (std::size_t s : {1u, 5u, 20u}) {
        const CompatibilityEstimate c =
            restricted_norm_compat(make_sparse_theta(100, s), 10000, kSeed, {s, 0, stream_role::geometry_psi});
        psi_ok = psi_ok && c.sampled_lower <= c.psi && c.psi == 2.0 * std::sqrt(double(s)) && c.samples == 10000;
        psi_detail += fmt("%ss=%zu %.3f≤%.3f", s == 1 ? "" : ", ", s, c.sampled_lower, c.psi);
    }
    return {ball_ok && rel <= 0.05 && psi_ok,
            fmt("w(B₁) p=1 %.5f vs √(2/π)=%.5f (3 se = %.5f); cone p=2 %.4f vs discretized sup %.4f "
                "(rel %.2f%%, tol 5%%); Ψ sampled≤analytic: %s",
                ball.value, half_normal, 3.0 * ball.se, cone.value, oracle, 100.0 * rel, psi_detail.c_str())};
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// 11
Verdict reproducibility(ExperimentConfig cfg, const std::filesystem::path& first_csv) {
    const auto dir = std::filesystem::temp_directory_path() / "altest_acceptance_rerun";
    std::filesystem::remove_all(dir);
    cfg.out_dir = dir.string();
    const ExperimentOutputs again = run_experiment(cfg);
    const std::string a = read_file(first_csv), b = read_file(again.csv_path);
    std::filesystem::remove_all(dir);
    return {!a.empty() && a == b,
            fmt("%zu-byte CSV from two runs of the n∈{30,60,90} config (seed %llu): %s", a.size(),
                (unsigned long long)cfg.seed, a == b ? "identical" : "different")};
}

} // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Verdict()>& f) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = f();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!v.pass) ++failures;
        std::printf("%s [%2d] %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), secs);
        std::fflush(stdout);
    };

    report(1, "solver correctness", solver_correctness);
    report(2, "xi identities", xi_identities);

    DeskRun desk;
    try {
        desk = desk_run();
    } catch (const std::exception& e) {
        std::printf("desk run failed: %s\n", e.what());
    }
    report(3, "error ordering", [&] { return error_ordering(desk); });
    report(4, "oracle/ordinary ratio", [&] { return oracle_ratio(desk); });
    report(5, "iterate contraction", [&] { return contraction(desk); });

    ExperimentConfig trend = desk_config();
    trend.n_grid = {30, 60, 90};
    trend.methods = {Method::altest_resampled, Method::altest_practical};
    const auto trend_dir = std::filesystem::temp_directory_path() / "altest_acceptance_trend";
    std::filesystem::remove_all(trend_dir);
    trend.out_dir = trend_dir.string();
    ExperimentOutputs trend_out;
    try {
        trend_out = run_experiment(trend);
    } catch (const std::exception& e) {
        std::printf("trend run failed: %s\n", e.what());
    }
    report(6, "sample size trend", [&] { return sample_size_trend(trend_out.result.rows); });
    report(7, "fixed mn budget trend", budget_trend);
    report(8, "covariance estimator band", covariance_band);
    report(9, "T=1 equivalence", t1_equivalence);
    report(10, "width oracles", width_oracles);
    report(11, "reproducibility", [&] { return reproducibility(trend, trend_out.csv_path); });
    std::filesystem::remove_all(trend_dir);

    std::printf("%d/11 criteria passed\n", 11 - failures);
    return failures == 0 ? 0 : 1;
}
