#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "altest/altest.hpp"

namespace altest {

enum class Preset { fig1, fig2, custom };
enum class Method { altest_resampled, altest_practical, oracle, ordinary };

// How resampled AltEst gets its 2T subsets at grid size n: `per_iteration`
// draws 2T·n observations so each step sees n fresh ones (baselines and
// practical AltEst use the first n); `split` partitions the same n.
enum class ResamplePolicy { per_iteration, split };

std::string_view to_string(Preset p);
std::string_view to_string(Method m);
std::string_view to_string(ResamplePolicy r);
Method parse_method(std::string_view s);

struct ExperimentConfig {
    Preset preset = Preset::custom;
    std::size_t p = 100;
    std::size_t s = 5;
    std::size_t m = 4;
    double rho = 0.8;
    double magnitude = 1.0;
    std::size_t T = 5;
    std::size_t trials = 50;
    std::vector<std::size_t> n_grid{30, 60, 90};
    std::optional<std::size_t> mn_budget;
    std::vector<std::size_t> m_grid;
    std::vector<Method> methods{Method::altest_resampled, Method::altest_practical, Method::oracle,
                                Method::ordinary};
    GammaRule gamma_rule = GammaRule::oracle_noise();
    double gamma_scale = 1.1;
    double solver_tol = 1e-6;
    std::size_t max_iter = 50'000;
    std::uint64_t seed = 1;
    std::string out_dir = "results";
    std::size_t jobs = 1;
    bool record_timing = true;
    ResamplePolicy resample_policy = ResamplePolicy::per_iteration;
    bool gnuplot = false;

    static ExperimentConfig preset_config(Preset preset);

    // Throws ErrorKind::config with the offending field path.
    void validate() const;

    AltEstConfig altest_config(AltEstMode mode) const;
    bool has_method(Method m) const;
};

Preset parse_preset(std::string_view s);

// Applies the keys present in `j` on top of `base`. Unknown keys and type
// mismatches throw ErrorKind::config naming the path (e.g. "gamma.scale").
ExperimentConfig apply_json(const nlohmann::json& j, ExperimentConfig base);
nlohmann::json to_json(const ExperimentConfig& cfg);

struct GridPoint {
    std::size_t n = 0;
    std::size_t m = 0;
};

std::vector<GridPoint> grid_points(const ExperimentConfig& cfg);

struct ResultRow {
    std::size_t trial = 0;
    std::string method;
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t iteration = 0;
    double err_l2 = 0.0;
    double xi_hat = 0.0;
    double gamma_used = 0.0;
    bool converged = false;
    double wall_ms = 0.0;
};

inline constexpr const char* kCsvHeader =
    "trial,method,n,m,iteration,err_l2,xi_hat,gamma_used,converged,wall_ms";

struct ExperimentResult {
    std::vector<ResultRow> rows;
    double total_wall_ms = 0.0;   // elapsed
    double worker_wall_ms = 0.0;  // summed over trial tasks
};

// Rows ordered grid-major, then trial, then method, then iteration.
ExperimentResult run_trials(const ExperimentConfig& cfg);

std::size_t expected_row_count(const ExperimentConfig& cfg);

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_csv(std::istream& in, const std::string& source = "<stream>");

struct SummaryGroup {
    std::string method;
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t iteration = 0;
    std::size_t count = 0;
    std::size_t failed = 0;  // rows whose err_l2 is not finite
    double mean = 0.0;
    double sd = 0.0;
    double se = 0.0;
    double mean_xi = 0.0;
    double mean_gamma = 0.0;
    double converged_fraction = 0.0;
    bool single_sample = false;
};

// Groups by (method, n, m, iteration) in first-appearance order.
std::vector<SummaryGroup> summarize(const std::vector<ResultRow>& rows);
std::vector<SummaryGroup> summarize_csv(const std::filesystem::path& path);

const SummaryGroup* find_group(const std::vector<SummaryGroup>& groups, std::string_view method,
                               std::size_t n, std::size_t m, std::size_t iteration);

std::string format_summary_table(const std::vector<SummaryGroup>& groups);
nlohmann::json summary_json(const std::vector<SummaryGroup>& groups);

struct ExperimentOutputs {
    ExperimentResult result;
    std::vector<SummaryGroup> summary;
    std::filesystem::path csv_path;
    std::filesystem::path summary_path;
    std::optional<std::filesystem::path> gnuplot_path;
};

// Runs the batch and writes results.csv, summary.json (and plot.gp on request)
// under cfg.out_dir.
ExperimentOutputs run_experiment(const ExperimentConfig& cfg);

} // namespace altest
