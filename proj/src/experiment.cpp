#include "altest/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "altest/error.hpp"

namespace altest {

namespace {

using Clock = std::chrono::steady_clock;

[[noreturn]] void config_error(const std::string& path, const std::string& msg) {
    throw Error(ErrorKind::config, "config." + path + ": " + msg);
}

constexpr Method kMethodOrder[] = {Method::altest_resampled, Method::altest_practical, Method::oracle,
                                   Method::ordinary};

} // namespace

std::string_view to_string(Preset p) {
    switch (p) {
    case Preset::fig1: return "fig1";
    case Preset::fig2: return "fig2";
    case Preset::custom: return "custom";
    }
    return "custom";
}

std::string_view to_string(Method m) {
    switch (m) {
    case Method::altest_resampled: return "altest_resampled";
    case Method::altest_practical: return "altest_practical";
    case Method::oracle: return "oracle";
    case Method::ordinary: return "ordinary";
    }
    return "unknown";
}

std::string_view to_string(ResamplePolicy r) {
    return r == ResamplePolicy::split ? "split" : "per_iteration";
}

Method parse_method(std::string_view s) {
    for (Method m : kMethodOrder)
        if (to_string(m) == s) return m;
    throw Error(ErrorKind::config, "unknown method '" + std::string(s) + "'");
}

Preset parse_preset(std::string_view s) {
    if (s == "fig1") return Preset::fig1;
    if (s == "fig2") return Preset::fig2;
    if (s == "custom") return Preset::custom;
    throw Error(ErrorKind::config, "config.preset: unknown preset '" + std::string(s) + "'");
}

ExperimentConfig ExperimentConfig::preset_config(Preset preset) {
    ExperimentConfig cfg;
    cfg.preset = preset;
    switch (preset) {
    case Preset::fig1:
        cfg.p = 500;
        cfg.s = 20;
        cfg.m = 10;
        cfg.T = 5;
        cfg.trials = 100;
        cfg.n_grid = {40, 50, 60, 70, 80, 90};
        break;
    case Preset::fig2:
        cfg.p = 500;
        cfg.s = 20;
        cfg.T = 5;
        cfg.trials = 100;
        cfg.n_grid.clear();
        cfg.mn_budget = 500;
        cfg.m_grid = {2, 4, 6, 8, 10};
        break;
    case Preset::custom:
        break;
    }
    return cfg;
}

bool ExperimentConfig::has_method(Method m) const {
    return std::find(methods.begin(), methods.end(), m) != methods.end();
}

AltEstConfig ExperimentConfig::altest_config(AltEstMode mode) const {
    AltEstConfig a;
    a.T = T;
    a.mode = mode;
    a.gamma_rule = gamma_rule;
    a.gamma_scale = gamma_scale;
    a.solver_tol = solver_tol;
    a.max_iter = max_iter;
    a.seed = seed;
    return a;
}

void ExperimentConfig::validate() const {
    if (p < 1) config_error("p", "must be >= 1");
    if (s < 1 || s > p) config_error("s", "must satisfy 1 <= s <= p");
    if (!(std::abs(rho) < 1.0)) config_error("rho", "must satisfy |rho| < 1");
    if (!(magnitude > 0.0)) config_error("magnitude", "must be > 0");
    if (T < 1) config_error("T", "must be >= 1");
    if (trials < 1) config_error("trials", "must be >= 1");
    if (jobs < 1) config_error("jobs", "must be >= 1");
    if (methods.empty()) config_error("methods", "must list at least one method");
    for (std::size_t i = 0; i < methods.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (methods[i] == methods[j])
                config_error("methods[" + std::to_string(i) + "]", "duplicate method");
    if (!(gamma_scale > 0.0)) config_error("gamma.scale", "must be > 0");
    if (gamma_rule.kind == GammaRuleKind::fixed && !(gamma_rule.fixed_value >= 0.0))
        config_error("gamma.value", "must be >= 0 for the fixed rule");
    if (!(solver_tol > 0.0)) config_error("solver.tol", "must be > 0");
    if (max_iter < 1) config_error("solver.max_iter", "must be >= 1");

    const bool resampled = has_method(Method::altest_resampled);
    if (mn_budget) {
        if (*mn_budget < 1) config_error("mn_budget", "must be >= 1");
        if (m_grid.empty()) config_error("m_grid", "must be non-empty when mn_budget is set");
        for (std::size_t i = 0; i < m_grid.size(); ++i) {
            if (m_grid[i] < 2 || m_grid[i] % 2 != 0)
                config_error("m_grid[" + std::to_string(i) + "]", "must be even and >= 2");
        }
        const std::size_t m_max = *std::max_element(m_grid.begin(), m_grid.end());
        if (resampled && *mn_budget < m_max * 2 * T)
            config_error("mn_budget", "must be >= max(m_grid) * 2T when altest_resampled is selected");
        for (const GridPoint& g : grid_points(*this))
            if (g.n < 1) config_error("mn_budget", "yields n = 0 for m = " + std::to_string(g.m));
    } else {
        if (m < 2 || m % 2 != 0) config_error("m", "must be even and >= 2");
        if (n_grid.empty()) config_error("n_grid", "must be non-empty");
        for (std::size_t i = 0; i < n_grid.size(); ++i) {
            const std::string path = "n_grid[" + std::to_string(i) + "]";
            if (n_grid[i] < 1) config_error(path, "must be >= 1");
            if (resampled && resample_policy == ResamplePolicy::split && n_grid[i] < 2 * T)
                config_error(path, "must be >= 2T for split resampling");
        }
    }
}

std::vector<GridPoint> grid_points(const ExperimentConfig& cfg) {
    std::vector<GridPoint> pts;
    if (cfg.mn_budget) {
        for (std::size_t m : cfg.m_grid) {
            const auto n = static_cast<std::size_t>(std::llround(double(*cfg.mn_budget) / double(m)));
            pts.push_back({n, m});
        }
    } else {
        for (std::size_t n : cfg.n_grid) pts.push_back({n, cfg.m});
    }
    return pts;
}

// ---------------------------------------------------------------- JSON config

namespace {

template <class T>
T get_as(const nlohmann::json& v, const std::string& path, const char* expected) {
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        config_error(path, std::string("expected ") + expected);
    }
}

std::size_t get_count(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<long long>() < 0) config_error(path, "expected a nonnegative integer");
    return v.get<std::size_t>();
}

std::vector<std::size_t> get_counts(const nlohmann::json& v, const std::string& path) {
    if (!v.is_array()) config_error(path, "expected an array of integers");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_count(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

double get_number(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number()) config_error(path, "expected a number");
    return v.get<double>();
}

} // namespace

ExperimentConfig apply_json(const nlohmann::json& j, ExperimentConfig cfg) {
    if (!j.is_object()) throw Error(ErrorKind::config, "config: top level must be an object");
    for (const auto& [key, v] : j.items()) {
        if (key == "preset") {
            // Handled by the caller when choosing the base; must still be valid.
            parse_preset(get_as<std::string>(v, key, "a string"));
            cfg.preset = parse_preset(v.get<std::string>());
        } else if (key == "p") cfg.p = get_count(v, key);
        else if (key == "s") cfg.s = get_count(v, key);
        else if (key == "m") cfg.m = get_count(v, key);
        else if (key == "rho") cfg.rho = get_number(v, key);
        else if (key == "magnitude") cfg.magnitude = get_number(v, key);
        else if (key == "T") cfg.T = get_count(v, key);
        else if (key == "trials") cfg.trials = get_count(v, key);
        else if (key == "n_grid") cfg.n_grid = get_counts(v, key);
        else if (key == "mn_budget") {
            if (v.is_null()) cfg.mn_budget.reset();
            else cfg.mn_budget = get_count(v, key);
        } else if (key == "m_grid") cfg.m_grid = get_counts(v, key);
        else if (key == "methods") {
            if (!v.is_array()) config_error(key, "expected an array of method names");
            cfg.methods.clear();
            for (std::size_t i = 0; i < v.size(); ++i) {
                const std::string path = key + "[" + std::to_string(i) + "]";
                const auto name = get_as<std::string>(v[i], path, "a string");
                try {
                    cfg.methods.push_back(parse_method(name));
                } catch (const Error&) {
                    config_error(path, "unknown method '" + name + "'");
                }
            }
        } else if (key == "gamma") {
            if (!v.is_object()) config_error(key, "expected an object");
            for (const auto& [gk, gv] : v.items()) {
                const std::string path = "gamma." + gk;
                if (gk == "rule") {
                    const auto r = get_as<std::string>(gv, path, "a string");
                    if (r == "oracle_noise") cfg.gamma_rule.kind = GammaRuleKind::oracle_noise;
                    else if (r == "plugin") cfg.gamma_rule.kind = GammaRuleKind::plugin;
                    else if (r == "fixed") cfg.gamma_rule.kind = GammaRuleKind::fixed;
                    else config_error(path, "unknown rule '" + r + "'");
                } else if (gk == "scale") cfg.gamma_scale = get_number(gv, path);
                else if (gk == "value") cfg.gamma_rule.fixed_value = get_number(gv, path);
                else config_error(path, "unknown field");
            }
        } else if (key == "solver") {
            if (!v.is_object()) config_error(key, "expected an object");
            for (const auto& [sk, sv] : v.items()) {
                const std::string path = "solver." + sk;
                if (sk == "tol") cfg.solver_tol = get_number(sv, path);
                else if (sk == "max_iter") cfg.max_iter = get_count(sv, path);
                else config_error(path, "unknown field");
            }
        } else if (key == "seed") {
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
                config_error(key, "expected a nonnegative integer");
            cfg.seed = v.get<std::uint64_t>();
        } else if (key == "out") cfg.out_dir = get_as<std::string>(v, key, "a string");
        else if (key == "jobs") cfg.jobs = get_count(v, key);
        else if (key == "timing") cfg.record_timing = get_as<bool>(v, key, "a boolean");
        else if (key == "gnuplot") cfg.gnuplot = get_as<bool>(v, key, "a boolean");
        else if (key == "resample_policy") {
            const auto r = get_as<std::string>(v, key, "a string");
            if (r == "per_iteration") cfg.resample_policy = ResamplePolicy::per_iteration;
            else if (r == "split") cfg.resample_policy = ResamplePolicy::split;
            else config_error(key, "unknown policy '" + r + "'");
        } else {
            config_error(key, "unknown field");
        }
    }
    return cfg;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
    nlohmann::json methods = nlohmann::json::array();
    for (Method m : cfg.methods) methods.push_back(std::string(to_string(m)));
    nlohmann::json j = {
        {"preset", std::string(to_string(cfg.preset))},
        {"p", cfg.p},
        {"s", cfg.s},
        {"m", cfg.m},
        {"rho", cfg.rho},
        {"magnitude", cfg.magnitude},
        {"T", cfg.T},
        {"trials", cfg.trials},
        {"n_grid", cfg.n_grid},
        {"m_grid", cfg.m_grid},
        {"methods", methods},
        {"gamma", {{"rule", std::string(to_string(cfg.gamma_rule.kind))},
                   {"scale", cfg.gamma_scale},
                   {"value", cfg.gamma_rule.fixed_value}}},
        {"solver", {{"tol", cfg.solver_tol}, {"max_iter", cfg.max_iter}}},
        {"seed", cfg.seed},
        {"out", cfg.out_dir},
        {"jobs", cfg.jobs},
        {"timing", cfg.record_timing},
        {"gnuplot", cfg.gnuplot},
        {"resample_policy", std::string(to_string(cfg.resample_policy))},
    };
    j["mn_budget"] = cfg.mn_budget ? nlohmann::json(*cfg.mn_budget) : nlohmann::json(nullptr);
    return j;
}

// ---------------------------------------------------------------- trial runner

std::size_t expected_row_count(const ExperimentConfig& cfg) {
    std::size_t per_trial = 0;
    for (Method m : cfg.methods)
        per_trial += (m == Method::altest_resampled || m == Method::altest_practical) ? cfg.T : 1;
    return per_trial * cfg.trials * grid_points(cfg).size();
}

namespace {

struct TrialTask {
    std::size_t grid = 0;
    std::size_t trial = 0;
};

std::vector<ResultRow> run_one_trial(const ExperimentConfig& cfg, const ModelSpec& spec,
                                     const GridPoint& g, const TrialTask& task) {
    const bool resampled = cfg.has_method(Method::altest_resampled);
    const bool fresh = resampled && cfg.resample_policy == ResamplePolicy::per_iteration;
    const std::size_t total = fresh ? 2 * cfg.T * g.n : g.n;
    const Dataset data = sample_dataset(spec, total, {task.grid, task.trial, stream_role::dataset});
    const ObservationSpan base = data.observations().first(g.n);

    std::vector<ResultRow> rows;
    auto row = [&](Method m, std::size_t it) {
        ResultRow r;
        r.trial = task.trial;
        r.method = std::string(to_string(m));
        r.n = g.n;
        r.m = g.m;
        r.iteration = it;
        return r;
    };
    auto failed_rows = [&](Method m, std::size_t from, std::size_t to) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t it = from; it <= to; ++it) {
            ResultRow r = row(m, it);
            r.err_l2 = r.xi_hat = r.gamma_used = nan;
            r.converged = false;
            rows.push_back(std::move(r));
        }
    };

    for (Method m : kMethodOrder) {
        if (!cfg.has_method(m)) continue;
        if (m == Method::altest_resampled || m == Method::altest_practical) {
            const bool rs = m == Method::altest_resampled;
            const ObservationSpan input = rs && fresh ? data.observations() : base;
            try {
                const TrajectoryReport rep = run_altest(
                    input, spec, cfg.altest_config(rs ? AltEstMode::resampled : AltEstMode::practical));
                for (const IterationRecord& rec : rep.iterations) {
                    ResultRow r = row(m, rec.t);
                    r.err_l2 = rec.theta_err;
                    r.xi_hat = rec.xi_hat;
                    r.gamma_used = rec.gamma_used;
                    r.converged = rec.solver_converged;
                    r.wall_ms = cfg.record_timing ? rec.wall_ms : 0.0;
                    rows.push_back(std::move(r));
                }
            } catch (const Error&) {
                failed_rows(m, 1, cfg.T);
            }
        } else {
            try {
                const AltEstConfig a = cfg.altest_config(AltEstMode::practical);
                const BaselineResult b =
                    m == Method::oracle ? run_oracle_gds(base, spec, a) : run_ordinary_gds(base, spec, a);
                ResultRow r = row(m, 1);
                r.err_l2 = b.err;
                r.xi_hat = b.xi;
                r.gamma_used = b.gamma_used;
                r.converged = b.solution.converged;
                r.wall_ms = cfg.record_timing ? b.wall_ms : 0.0;
                rows.push_back(std::move(r));
            } catch (const Error&) {
                failed_rows(m, 1, 1);
            }
        }
    }
    return rows;
}

} // namespace

ExperimentResult run_trials(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto start = Clock::now();
    const std::vector<GridPoint> grid = grid_points(cfg);

    std::vector<ModelSpec> specs;
    for (const GridPoint& g : grid) {
        specs.emplace_back(make_sparse_theta(cfg.p, cfg.s, cfg.magnitude), make_block_sigma(g.m, cfg.rho),
                           cfg.seed);
    }

    std::vector<TrialTask> tasks;
    for (std::size_t gi = 0; gi < grid.size(); ++gi)
        for (std::size_t t = 0; t < cfg.trials; ++t) tasks.push_back({gi, t});

    std::vector<std::vector<ResultRow>> slots(tasks.size());
    std::vector<double> task_ms(tasks.size(), 0.0);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(cfg.jobs);

    auto worker = [&](std::size_t w) {
        try {
            for (std::size_t i = next++; i < tasks.size(); i = next++) {
                const auto t0 = Clock::now();
                const TrialTask& task = tasks[i];
                slots[i] = run_one_trial(cfg, specs[task.grid], grid[task.grid], task);
                task_ms[i] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
            }
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };

    const std::size_t nthreads = std::min(cfg.jobs, std::max<std::size_t>(1, tasks.size()));
    if (nthreads <= 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < nthreads; ++w) pool.emplace_back(worker, w);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    ExperimentResult result;
    for (auto& s : slots)
        for (auto& r : s) result.rows.push_back(std::move(r));
    for (double ms : task_ms) result.worker_wall_ms += ms;
    result.total_wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return result;
}

// ---------------------------------------------------------------- CSV

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

constexpr const char* kColumns[] = {"trial", "method", "n", "m", "iteration",
                                    "err_l2", "xi_hat", "gamma_used", "converged", "wall_ms"};

[[noreturn]] void csv_error(const std::string& source, std::size_t line, const char* column,
                            const std::string& msg) {
    std::string where = source + ":" + std::to_string(line);
    if (column) where += " column '" + std::string(column) + "'";
    throw Error(ErrorKind::parse, where + ": " + msg);
}

std::size_t parse_count(const std::string& s, const std::string& src, std::size_t line, const char* col) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
        csv_error(src, line, col, "expected a nonnegative integer, got '" + s + "'");
    return static_cast<std::size_t>(std::stoull(s));
}

double parse_real(const std::string& s, const std::string& src, std::size_t line, const char* col) {
    if (s.empty()) csv_error(src, line, col, "empty value");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) csv_error(src, line, col, "expected a number, got '" + s + "'");
    return v;
}

} // namespace

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << kCsvHeader << '\n';
    for (const ResultRow& r : rows) {
        out << r.trial << ',' << r.method << ',' << r.n << ',' << r.m << ',' << r.iteration << ','
            << format_double(r.err_l2) << ',' << format_double(r.xi_hat) << ','
            << format_double(r.gamma_used) << ',' << (r.converged ? 1 : 0) << ','
            << format_double(r.wall_ms) << '\n';
    }
}

std::vector<ResultRow> read_csv(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) csv_error(source, 1, nullptr, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_fields(line);
    for (std::size_t i = 0; i < std::size(kColumns); ++i) {
        if (i >= header.size()) csv_error(source, 1, kColumns[i], "missing header column");
        if (header[i] != kColumns[i])
            csv_error(source, 1, kColumns[i], "header mismatch, found '" + header[i] + "'");
    }
    if (header.size() != std::size(kColumns))
        csv_error(source, 1, nullptr, "unexpected extra column '" + header[std::size(kColumns)] + "'");

    std::vector<ResultRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split_fields(line);
        if (f.size() != std::size(kColumns)) {
            csv_error(source, lineno, nullptr,
                      "expected " + std::to_string(std::size(kColumns)) + " columns, got " +
                          std::to_string(f.size()));
        }
        ResultRow r;
        r.trial = parse_count(f[0], source, lineno, kColumns[0]);
        r.method = f[1];
        if (r.method.empty()) csv_error(source, lineno, kColumns[1], "empty method");
        r.n = parse_count(f[2], source, lineno, kColumns[2]);
        r.m = parse_count(f[3], source, lineno, kColumns[3]);
        r.iteration = parse_count(f[4], source, lineno, kColumns[4]);
        r.err_l2 = parse_real(f[5], source, lineno, kColumns[5]);
        r.xi_hat = parse_real(f[6], source, lineno, kColumns[6]);
        r.gamma_used = parse_real(f[7], source, lineno, kColumns[7]);
        if (f[8] != "0" && f[8] != "1") csv_error(source, lineno, kColumns[8], "expected 0 or 1, got '" + f[8] + "'");
        r.converged = f[8] == "1";
        r.wall_ms = parse_real(f[9], source, lineno, kColumns[9]);
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------- summary

std::vector<SummaryGroup> summarize(const std::vector<ResultRow>& rows) {
    struct Acc {
        SummaryGroup g;
        double sum = 0, sumsq = 0, xi = 0, gamma = 0;
        std::size_t finite = 0, conv = 0;
    };
    std::vector<Acc> accs;
    std::map<std::tuple<std::string, std::size_t, std::size_t, std::size_t>, std::size_t> index;
    for (const ResultRow& r : rows) {
        const auto key = std::make_tuple(r.method, r.n, r.m, r.iteration);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, accs.size()).first;
            Acc a;
            a.g.method = r.method;
            a.g.n = r.n;
            a.g.m = r.m;
            a.g.iteration = r.iteration;
            accs.push_back(std::move(a));
        }
        Acc& a = accs[it->second];
        ++a.g.count;
        if (r.converged) ++a.conv;
        if (!std::isfinite(r.err_l2)) {
            ++a.g.failed;
            continue;
        }
        ++a.finite;
        a.sum += r.err_l2;
        a.sumsq += r.err_l2 * r.err_l2;
        a.xi += r.xi_hat;
        a.gamma += r.gamma_used;
    }
    std::vector<SummaryGroup> out;
    for (Acc& a : accs) {
        SummaryGroup g = a.g;
        const double k = double(a.finite);
        if (a.finite > 0) {
            g.mean = a.sum / k;
            g.mean_xi = a.xi / k;
            g.mean_gamma = a.gamma / k;
        }
        if (a.finite > 1) {
            // Two-pass-equivalent variance; clamp rounding below zero.
            g.sd = std::sqrt(std::max(0.0, (a.sumsq - k * g.mean * g.mean) / (k - 1.0)));
            g.se = g.sd / std::sqrt(k);
        }
        g.single_sample = a.finite == 1;
        g.converged_fraction = double(a.conv) / double(g.count);
        out.push_back(g);
    }
    return out;
}

std::vector<SummaryGroup> summarize_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "summarize: cannot open " + path.string());
    return summarize(read_csv(in, path.string()));
}

const SummaryGroup* find_group(const std::vector<SummaryGroup>& groups, std::string_view method,
                               std::size_t n, std::size_t m, std::size_t iteration) {
    for (const SummaryGroup& g : groups)
        if (g.method == method && g.n == n && g.m == m && g.iteration == iteration) return &g;
    return nullptr;
}

std::string format_summary_table(const std::vector<SummaryGroup>& groups) {
    std::ostringstream os;
    os << std::left << std::setw(18) << "method" << std::right << std::setw(6) << "n" << std::setw(5) << "m"
       << std::setw(5) << "iter" << std::setw(7) << "count" << std::setw(12) << "mean_err" << std::setw(12)
       << "se" << std::setw(12) << "sd" << std::setw(10) << "mean_xi" << std::setw(7) << "conv" << '\n';
    os << std::fixed;
    for (const SummaryGroup& g : groups) {
        os << std::left << std::setw(18) << g.method << std::right << std::setw(6) << g.n << std::setw(5) << g.m
           << std::setw(5) << g.iteration << std::setw(7) << g.count << std::setprecision(6) << std::setw(12)
           << g.mean << std::setw(12) << g.se << std::setw(12) << g.sd << std::setprecision(4) << std::setw(10)
           << g.mean_xi << std::setprecision(2) << std::setw(7) << g.converged_fraction;
        if (g.single_sample) os << "  (single sample)";
        if (g.failed) os << "  (" << g.failed << " failed)";
        os << '\n';
    }
    return os.str();
}

nlohmann::json summary_json(const std::vector<SummaryGroup>& groups) {
    nlohmann::json arr = nlohmann::json::array();
    for (const SummaryGroup& g : groups) {
        arr.push_back({{"method", g.method},
                       {"n", g.n},
                       {"m", g.m},
                       {"iteration", g.iteration},
                       {"count", g.count},
                       {"failed", g.failed},
                       {"mean_err", g.mean},
                       {"sd_err", g.sd},
                       {"se_err", g.se},
                       {"mean_xi", g.mean_xi},
                       {"mean_gamma", g.mean_gamma},
                       {"converged_fraction", g.converged_fraction},
                       {"single_sample", g.single_sample}});
    }
    return {{"groups", arr}};
}

ExperimentOutputs run_experiment(const ExperimentConfig& cfg) {
    ExperimentOutputs out;
    out.result = run_trials(cfg);
    out.summary = summarize(out.result.rows);

    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw Error(ErrorKind::io, "run_experiment: cannot create " + cfg.out_dir + ": " + ec.message());
    const std::filesystem::path dir(cfg.out_dir);

    out.csv_path = dir / "results.csv";
    {
        std::ofstream f(out.csv_path, std::ios::binary);
        if (!f) throw Error(ErrorKind::io, "run_experiment: cannot write " + out.csv_path.string());
        write_csv(f, out.result.rows);
    }

    nlohmann::json summary = summary_json(out.summary);
    summary["config"] = to_json(cfg);
    summary["row_count"] = out.result.rows.size();
    summary["total_wall_ms"] = out.result.total_wall_ms;
    summary["worker_wall_ms"] = out.result.worker_wall_ms;
    out.summary_path = dir / "summary.json";
    {
        std::ofstream f(out.summary_path);
        if (!f) throw Error(ErrorKind::io, "run_experiment: cannot write " + out.summary_path.string());
        f << summary.dump(2) << '\n';
    }

    if (cfg.gnuplot) {
        out.gnuplot_path = dir / "plot.gp";
        std::ofstream f(*out.gnuplot_path);
        f << "# Final-iteration mean error per method; run: gnuplot plot.gp\n"
             "set datafile separator ','\n"
             "set key autotitle columnhead\n"
             "set xlabel 'n'\n"
             "set ylabel '||theta_hat - theta*||_2'\n"
             "set terminal pngcairo size 900,600\n"
             "set output 'errors.png'\n"
             "plot for [meth in '";
        for (std::size_t i = 0; i < cfg.methods.size(); ++i) f << (i ? " " : "") << to_string(cfg.methods[i]);
        f << "'] 'results.csv' using ((strcol(2) eq meth && ($5 == " << cfg.T
          << " || strcol(2) eq 'oracle' || strcol(2) eq 'ordinary')) ? $3 : 1/0):6 "
             "smooth unique with linespoints title meth\n";
    }
    return out;
}

} // namespace altest
