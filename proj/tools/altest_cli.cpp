#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "altest/dataset_io.hpp"
#include "altest/error.hpp"
#include "altest/experiment.hpp"
#include "altest/geometry.hpp"

using namespace altest;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct ModelFlags {
    std::size_t p = 100;
    std::size_t s = 5;
    std::size_t m = 4;
    double rho = 0.8;
    double magnitude = 1.0;
    std::uint64_t seed = 1;

    void add(CLI::App* cmd) {
        cmd->add_option("--p", p, "coefficient dimension")->capture_default_str();
        cmd->add_option("--s", s, "sparsity of theta*")->capture_default_str();
        cmd->add_option("--m", m, "responses per observation (even)")->capture_default_str();
        cmd->add_option("--rho", rho, "within-block noise correlation")->capture_default_str();
        cmd->add_option("--magnitude", magnitude, "nonzero magnitude of theta*")->capture_default_str();
        cmd->add_option("--seed", seed, "root RNG seed")->capture_default_str();
    }

    ModelSpec spec() const {
        return ModelSpec(make_sparse_theta(p, s, magnitude), make_block_sigma(m, rho), seed);
    }
};

struct RunFlags {
    std::string preset;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs, trials, p, s, m, T, mn_budget, max_iter;
    std::optional<double> rho, magnitude, gamma_scale, gamma_value, solver_tol;
    std::optional<std::string> out, gamma_rule, resample_policy;
    std::vector<std::size_t> n_grid, m_grid;
    std::vector<std::string> methods;
    bool no_timing = false;
    bool gnuplot = false;

    void add(CLI::App* cmd) {
        cmd->add_option("--preset", preset, "fig1 | fig2 | custom")
            ->check(CLI::IsMember({"fig1", "fig2", "custom"}));
        cmd->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
        cmd->add_option("--seed", seed, "root RNG seed");
        cmd->add_option("--jobs", jobs, "concurrent trials");
        cmd->add_option("--out", out, "output directory");
        cmd->add_option("--trials", trials, "trials per grid point");
        cmd->add_option("--p", p);
        cmd->add_option("--s", s);
        cmd->add_option("--m", m);
        cmd->add_option("--rho", rho);
        cmd->add_option("--magnitude", magnitude);
        cmd->add_option("--T", T, "AltEst iterations");
        cmd->add_option("--n-grid", n_grid, "sample sizes")->delimiter(',');
        cmd->add_option("--m-grid", m_grid, "response counts for an mn budget sweep")->delimiter(',');
        cmd->add_option("--mn-budget", mn_budget);
        cmd->add_option("--methods", methods, "altest_resampled,altest_practical,oracle,ordinary")
            ->delimiter(',');
        cmd->add_option("--gamma-rule", gamma_rule)->check(CLI::IsMember({"oracle_noise", "plugin", "fixed"}));
        cmd->add_option("--gamma-scale", gamma_scale);
        cmd->add_option("--gamma-value", gamma_value);
        cmd->add_option("--solver-tol", solver_tol);
        cmd->add_option("--max-iter", max_iter);
        cmd->add_option("--resample-policy", resample_policy)
            ->check(CLI::IsMember({"per_iteration", "split"}));
        cmd->add_flag("--no-timing", no_timing, "write wall_ms = 0 for diffable output");
        cmd->add_flag("--gnuplot", gnuplot, "also write plot.gp");
    }

    // preset < config file < flags
    ExperimentConfig resolve() const {
        json file;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw Error(ErrorKind::config, "config: cannot open " + config_path);
            try {
                file = json::parse(in);
            } catch (const json::parse_error& e) {
                throw Error(ErrorKind::config, "config: " + config_path + ": " + e.what());
            }
        }
        Preset base = Preset::custom;
        if (!preset.empty()) base = parse_preset(preset);
        else if (file.is_object() && file.contains("preset") && file["preset"].is_string())
            base = parse_preset(file["preset"].get<std::string>());

        ExperimentConfig cfg = ExperimentConfig::preset_config(base);
        if (!file.is_null()) cfg = apply_json(file, cfg);
        cfg.preset = base;

        json over = json::object();
        if (seed) over["seed"] = *seed;
        if (jobs) over["jobs"] = *jobs;
        if (out) over["out"] = *out;
        if (trials) over["trials"] = *trials;
        if (p) over["p"] = *p;
        if (s) over["s"] = *s;
        if (m) over["m"] = *m;
        if (rho) over["rho"] = *rho;
        if (magnitude) over["magnitude"] = *magnitude;
        if (T) over["T"] = *T;
        if (!n_grid.empty()) over["n_grid"] = n_grid;
        if (!m_grid.empty()) over["m_grid"] = m_grid;
        if (mn_budget) over["mn_budget"] = *mn_budget;
        if (!methods.empty()) over["methods"] = methods;
        if (gamma_rule) over["gamma"]["rule"] = *gamma_rule;
        if (gamma_scale) over["gamma"]["scale"] = *gamma_scale;
        if (gamma_value) over["gamma"]["value"] = *gamma_value;
        if (solver_tol) over["solver"]["tol"] = *solver_tol;
        if (max_iter) over["solver"]["max_iter"] = *max_iter;
        if (resample_policy) over["resample_policy"] = *resample_policy;
        if (no_timing) over["timing"] = false;
        if (gnuplot) over["gnuplot"] = true;
        cfg = apply_json(over, cfg);
        cfg.validate();
        return cfg;
    }
};

json mc_json(const McEstimate& e) {
    return {{"value", e.value}, {"se", e.se}, {"samples", e.samples}};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Alternating estimation for multi-response sparse regression"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "sample a synthetic dataset to a file");
    ModelFlags gen_model;
    gen_model.add(gen);
    std::size_t gen_n = 80;
    std::uint64_t gen_trial = 0;
    std::string gen_out;
    gen->add_option("--n", gen_n, "observations")->capture_default_str();
    gen->add_option("--trial", gen_trial, "trial index selecting the RNG stream")->capture_default_str();
    gen->add_option("--out,-o", gen_out, "output file")->required();

    // run
    auto* run = app.add_subcommand("run", "run an experiment batch");
    RunFlags run_flags;
    run_flags.add(run);
    bool run_print_config = false;
    run->add_flag("--print-config", run_print_config, "print the resolved config and exit");

    // summarize
    auto* summ = app.add_subcommand("summarize", "aggregate a results CSV");
    std::string summ_csv;
    bool summ_json = false;
    summ->add_option("csv", summ_csv, "results CSV")->required()->check(CLI::ExistingFile);
    summ->add_flag("--json", summ_json, "emit JSON instead of a table");

    // geometry
    auto* geom = app.add_subcommand("geometry", "widths, compatibility and xi report");
    ModelFlags geom_model;
    geom_model.add(geom);
    std::size_t geom_samples = 100000;
    std::size_t geom_n = 80;
    geom->add_option("--samples", geom_samples, "Monte Carlo samples")->capture_default_str();
    geom->add_option("--n", geom_n, "sample size for the bound values")->capture_default_str();

    // bounds
    auto* bnd = app.add_subcommand("bounds", "e_orc and e_min report");
    ModelFlags bnd_model;
    bnd_model.add(bnd);
    std::size_t bnd_samples = 100000;
    std::vector<std::size_t> bnd_n{80};
    BoundConstants k;
    bnd->add_option("--samples", bnd_samples, "Monte Carlo samples for w(B)")->capture_default_str();
    bnd->add_option("--n", bnd_n, "sample sizes")->delimiter(',');
    bnd->add_option("--kappa", k.kappa)->capture_default_str();
    bnd->add_option("--mu-max", k.mu_max)->capture_default_str();
    bnd->add_option("--mu-min", k.mu_min)->capture_default_str();
    bnd->add_option("--c1", k.c1)->capture_default_str();
    bnd->add_option("--c", k.c)->capture_default_str();
    bnd->add_option("--kappa0", k.kappa0)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*gen) {
            const ModelSpec spec = gen_model.spec();
            const StreamId stream{gen_trial, 0, stream_role::dataset};
            const Dataset data = sample_dataset(spec, gen_n, stream);
            write_dataset(gen_out, data, {spec.seed(), stream});
            std::cout << "wrote " << data.n() << " observations (m=" << data.m() << ", p=" << data.p()
                      << ") to " << gen_out << "\n";
        } else if (*run) {
            const ExperimentConfig cfg = run_flags.resolve();
            if (run_print_config) {
                std::cout << to_json(cfg).dump(2) << "\n";
                return 0;
            }
            const ExperimentOutputs out = run_experiment(cfg);
            std::cout << format_summary_table(out.summary);
            std::cout << "rows: " << out.result.rows.size() << "  wall: " << out.result.total_wall_ms
                      << " ms\n";
            std::cout << "csv: " << out.csv_path.string() << "\nsummary: " << out.summary_path.string()
                      << "\n";
            if (out.gnuplot_path) std::cout << "gnuplot: " << out.gnuplot_path->string() << "\n";
        } else if (*summ) {
            const auto groups = summarize_csv(summ_csv);
            if (summ_json) std::cout << summary_json(groups).dump(2) << "\n";
            else std::cout << format_summary_table(groups);
        } else if (*geom) {
            const ModelSpec spec = geom_model.spec();
            const GeometryReport r = geometry_report(spec, geom_n, geom_samples);
            const json j = {
                {"p", spec.p()},
                {"s", geom_model.s},
                {"m", spec.m()},
                {"rho", geom_model.rho},
                {"n", geom_n},
                {"xi_identity", r.xi_sigma},
                {"xi_star", r.xi_star},
                {"width_ball", mc_json(r.width_ball)},
                {"width_cone", mc_json(r.width_cone)},
                {"psi", r.psi},
                {"psi_sampled", r.psi_sampled},
                {"rho_ball", r.rho},
                {"tau_oracle", r.tau_oracle},
                {"tau_identity", r.tau_identity},
                {"e_orc", r.e_orc},
                {"e_min", r.bound_diverged ? json(nullptr) : json(r.e_min)},
                {"bound_diverged", r.bound_diverged},
                {"mc_samples", r.mc_samples},
            };
            std::cout << j.dump(2) << "\n";
        } else if (*bnd) {
            const ModelSpec spec = bnd_model.spec();
            const McEstimate wb =
                width_l1_ball(spec.p(), bnd_samples, spec.seed(), {0, 0, stream_role::geometry_ball});
            const double xi_star = xi_factor(spec.sigma_star(), spec.sigma_star());
            const double psi =
                restricted_norm_compat(spec.theta_star(), 0, spec.seed(), {0, 0, stream_role::geometry_psi}).psi;
            const double lmin = symmetric_spectrum(spec.sigma_star()).min();
            json rows = json::array();
            for (std::size_t n : bnd_n) {
                BoundValues b;
                try {
                    b = bound_values({n, spec.m(), xi_star, psi, wb.value, lmin}, k);
                } catch (const Error& e) {
                    throw e.annotated("n=" + std::to_string(n));
                }
                rows.push_back({{"n", n}, {"e_orc", b.e_orc}, {"e_min", b.e_min}});
            }
            const json j = {{"xi_star", xi_star}, {"psi", psi}, {"width_ball", mc_json(wb)},
                            {"lambda_min_star", lmin}, {"bounds", rows}};
            std::cout << j.dump(2) << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "altest: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return e.kind() == ErrorKind::config ? kExitConfig : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "altest: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
