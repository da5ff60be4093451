#include "altest/gds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "altest/error.hpp"
#include "altest/rng.hpp"

namespace altest {

double NormDescriptor::value(const Vector& v) const {
    return v.lpNorm<1>();
}

double NormDescriptor::dual(const Vector& v) const {
    return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

bool NormDescriptor::in_subdifferential(const Vector& theta, const Vector& g, double tol) const {
    if (theta.size() != g.size()) return false;
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        if (theta(j) > 0.0) {
            if (std::abs(g(j) - 1.0) > tol) return false;
        } else if (theta(j) < 0.0) {
            if (std::abs(g(j) + 1.0) > tol) return false;
        } else if (std::abs(g(j)) > 1.0 + tol) {
            return false;
        }
    }
    return true;
}

GdsProblem assemble_problem(ObservationSpan data, const Matrix& sigma, double gamma,
                            const NormDescriptor& norm) {
    if (data.empty()) throw Error(ErrorKind::insufficient_data, "assemble_problem: empty dataset");
    if (!(gamma >= 0.0)) throw Error(ErrorKind::invalid_parameter, "assemble_problem: gamma must be >= 0");
    const auto m = data.front().X.rows();
    const auto p = data.front().X.cols();
    if (sigma.rows() != m || sigma.cols() != m) {
        throw Error(ErrorKind::invalid_parameter, "assemble_problem: sigma must be m x m");
    }
    if (static_cast<std::size_t>(p) != norm.dimension()) {
        throw Error(ErrorKind::invalid_parameter, "assemble_problem: norm dimension must equal p");
    }

    const SymmetricSpectrum spec = symmetric_spectrum(symmetrized(sigma));
    if (!(spec.min() > 1e-10 * std::max(1.0, spec.max()))) {
        throw Error(ErrorKind::ill_conditioned_covariance,
                    "assemble_problem: sigma min eigenvalue " + std::to_string(spec.min()) +
                        " is not safely invertible");
    }
    // Whitening W = Σ^{-1/2}; then XᵀΣ⁻¹X = (WX)ᵀ(WX).
    const Matrix whiten = spectral_apply(spec, [](double l) { return 1.0 / std::sqrt(l); });

    const auto n = static_cast<Eigen::Index>(data.size());
    Matrix stacked(n * m, p);
    Vector responses(n * m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Observation& o = data[static_cast<std::size_t>(i)];
        stacked.middleRows(i * m, m).noalias() = whiten * o.X;
        responses.segment(i * m, m).noalias() = whiten * o.y;
    }

    GdsProblem problem;
    problem.gram = Matrix::Zero(p, p);
    problem.gram.selfadjointView<Eigen::Lower>().rankUpdate(stacked.transpose(), 1.0 / double(n));
    problem.gram.triangularView<Eigen::StrictlyUpper>() = problem.gram.transpose();
    problem.linear.noalias() = stacked.transpose() * responses / double(n);
    problem.gamma = gamma;
    problem.norm = norm;
    return problem;
}

double residual_dual_norm(const GdsProblem& problem, const Vector& theta) {
    return problem.norm.dual(problem.gram * theta - problem.linear);
}

namespace {

// Restarted PDHG on the saddle form of the L1 program
//   min_x max_y  ‖x‖₁ + ⟨Ax, y⟩ − (⟨b, y⟩ + γ‖y‖₁)
// where the last term is the support function of the box |z − b| ≤ γ.
// Dual function: D(y) = −⟨b,y⟩ − γ‖y‖₁ on ‖Ay‖∞ ≤ 1.

void soft_threshold(Vector& v, double t) {
    v = v.array().sign() * (v.array().abs() - t).max(0.0);
}

struct Iterate {
    Vector x, y;
    Vector ax, ay;  // A x, A y cached
};

struct Kkt {
    double primal_inf = 0.0;  // ‖(|Ax − b| − γ)₊‖∞
    double primal_obj = 0.0;  // ‖x‖₁
    double dual_obj = 0.0;    // D(y / max(1, ‖Ay‖∞)), a valid lower bound
    double dual_inf = 0.0;    // ‖(|Ay| − 1)₊‖∞
    double gap = 0.0;
    double error = 0.0;       // combined, for restart decisions
};

Kkt evaluate(const Iterate& it, const Vector& b, double gamma) {
    Kkt k;
    k.primal_inf = std::max(0.0, ((it.ax - b).cwiseAbs().array() - gamma).maxCoeff());
    k.primal_obj = it.x.lpNorm<1>();
    const double ay_inf = it.ay.size() ? it.ay.lpNorm<Eigen::Infinity>() : 0.0;
    k.dual_inf = std::max(0.0, ay_inf - 1.0);
    const double scale = std::max(1.0, ay_inf);
    k.dual_obj = (-b.dot(it.y) - gamma * it.y.lpNorm<1>()) / scale;
    k.gap = k.primal_obj - k.dual_obj;
    // Restart metric uses the unscaled dual so progress on dual feasibility counts.
    const double raw_dual = -b.dot(it.y) - gamma * it.y.lpNorm<1>();
    const double raw_gap = k.primal_obj - raw_dual;
    const double pr = ((it.ax - b).cwiseAbs().array() - gamma).max(0.0).matrix().norm();
    const double dr = (it.ay.cwiseAbs().array() - 1.0).max(0.0).matrix().norm();
    k.error = std::sqrt(pr * pr + dr * dr + raw_gap * raw_gap);
    return k;
}

bool converged(const Kkt& k, double tol) {
    return k.primal_inf <= tol && k.gap <= tol * std::max(1.0, k.primal_obj);
}

double operator_norm_estimate(const Matrix& a) {
    const auto p = a.rows();
    if (p == 0) return 0.0;
    Engine engine = make_engine(0x5eedULL, {0, 0, stream_role::power_iteration});
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(p);
    for (Eigen::Index i = 0; i < p; ++i) v(i) = normal(engine);
    double lambda = 0.0;
    for (int it = 0; it < 1000; ++it) {
        const double nv = v.norm();
        if (nv == 0.0) return 0.0;
        v /= nv;
        Vector w = a * v;
        const double next = w.norm();
        const bool done = std::abs(next - lambda) <= 1e-10 * std::max(1.0, next);
        lambda = next;
        v = std::move(w);
        if (done && it > 10) break;
    }
    return lambda;
}

// Farkas ray for the constraint set: A d ≈ 0 with ⟨b,d⟩ + γ‖d‖₁ < 0.
bool certifies_infeasibility(const Matrix& a, const Vector& b, double gamma, const Vector& d,
                             double a_norm) {
    const double l1 = d.lpNorm<1>();
    if (!(l1 > 0.0)) return false;
    const Vector u = d / l1;
    const double lhs = b.dot(u) + gamma;
    const double ad = (a * u).lpNorm<Eigen::Infinity>();
    const double margin = -lhs;
    // Any feasible θ would need ‖θ‖₁ ≥ margin / ‖Au‖∞, far beyond every candidate.
    return margin > 1e-7 * std::max(1.0, b.lpNorm<Eigen::Infinity>()) &&
           ad <= 1e-9 * std::max(1.0, a_norm) * margin;
}

} // namespace

GdsSolution solve_gds(const GdsProblem& problem, const SolverOptions& options) {
    const Matrix& a = problem.gram;
    const Vector& b = problem.linear;
    const double gamma = problem.gamma;
    const auto p = b.size();
    if (a.rows() != p || a.cols() != p) {
        throw Error(ErrorKind::invalid_parameter, "solve_gds: gram must be p x p");
    }
    if (!(gamma >= 0.0)) throw Error(ErrorKind::invalid_parameter, "solve_gds: gamma must be >= 0");
    if (!(options.tol > 0.0)) throw Error(ErrorKind::invalid_parameter, "solve_gds: tol must be > 0");

    const double tol = options.tol;
    auto finish = [&](Vector x, std::size_t iters, bool ok) {
        GdsSolution s;
        s.residual_dual_norm = residual_dual_norm(problem, x);
        s.norm_value = problem.norm.value(x);
        s.theta_hat = std::move(x);
        s.solver_iterations = iters;
        s.converged = ok;
        return s;
    };

    if (p == 0) return finish(Vector(), 0, true);
    const double b_inf = b.lpNorm<Eigen::Infinity>();
    if (gamma >= b_inf) return finish(Vector::Zero(p), 0, true);

    const double a_norm = operator_norm_estimate(a);
    if (!(a_norm > 0.0)) {
        // A = 0 and γ < ‖b‖∞: the constraint |−b| ≤ γ cannot hold.
        throw Error(ErrorKind::infeasible_radius, "solve_gds: zero gram with gamma < ||linear||_inf");
    }
    const double eta = 0.95 / (1.02 * a_norm);
    double omega = 1.0;  // primal weight: τ = η/ω, σ = ηω

    Iterate cur{Vector::Zero(p), Vector::Zero(p), Vector::Zero(p), Vector::Zero(p)};
    Iterate start = cur;
    Vector sum_x = Vector::Zero(p), sum_y = Vector::Zero(p);
    std::size_t sum_count = 0;

    Iterate best = cur;
    Kkt best_kkt = evaluate(cur, b, gamma);
    Kkt start_kkt = best_kkt;
    double prev_candidate_error = std::numeric_limits<double>::infinity();
    Vector y_at_check = cur.y;
    bool restarted_since_check = false;

    constexpr std::size_t kCheckEvery = 64;
    std::size_t since_restart = 0;

    for (std::size_t k = 1; k <= options.max_iter; ++k) {
        const double tau = eta / omega;
        const double sig = eta * omega;

        Vector x_new = cur.x - tau * cur.ay;
        soft_threshold(x_new, tau);
        Vector ax_new = a * x_new;
        Vector y_new = cur.y + sig * (2.0 * ax_new - cur.ax - b);
        soft_threshold(y_new, sig * gamma);
        Vector ay_new = a * y_new;

        cur.x = std::move(x_new);
        cur.ax = std::move(ax_new);
        cur.y = std::move(y_new);
        cur.ay = std::move(ay_new);
        sum_x += cur.x;
        sum_y += cur.y;
        ++sum_count;
        ++since_restart;

        if (k % kCheckEvery != 0 && k != options.max_iter) continue;

        Iterate avg;
        avg.x = sum_x / double(sum_count);
        avg.y = sum_y / double(sum_count);
        avg.ax = a * avg.x;
        avg.ay = a * avg.y;

        const Kkt kc = evaluate(cur, b, gamma);
        const Kkt ka = evaluate(avg, b, gamma);
        const bool use_avg = ka.error < kc.error;
        const Iterate& cand = use_avg ? avg : cur;
        const Kkt& kk = use_avg ? ka : kc;

        for (const auto* pair : {&kc, &ka}) {
            const Iterate& it = pair == &kc ? cur : avg;
            if (converged(*pair, tol)) return finish(it.x, k, true);
            if (pair->error < best_kkt.error) {
                best_kkt = *pair;
                best = it;
            }
        }

        if (!restarted_since_check &&
            certifies_infeasibility(a, b, gamma, cur.y - y_at_check, a_norm)) {
            throw Error(ErrorKind::infeasible_radius,
                        "solve_gds: radius gamma=" + std::to_string(gamma) +
                            " admits no feasible point (dual ray certificate)");
        }
        y_at_check = cur.y;
        restarted_since_check = false;

        const bool sufficient = kk.error <= 0.2 * start_kkt.error;
        const bool necessary = kk.error <= 0.8 * start_kkt.error && kk.error > prev_candidate_error;
        const bool artificial = double(since_restart) >= 0.36 * double(k);
        prev_candidate_error = kk.error;

        if (sufficient || necessary || artificial) {
            const double dx = (cand.x - start.x).norm();
            const double dy = (cand.y - start.y).norm();
            if (dx > 1e-12 && dy > 1e-12) {
                omega = std::exp(0.5 * std::log(dy / dx) + 0.5 * std::log(omega));
            }
            cur = cand;
            start = cur;
            start_kkt = kk;
            sum_x.setZero();
            sum_y.setZero();
            sum_count = 0;
            since_restart = 0;
            prev_candidate_error = std::numeric_limits<double>::infinity();
            restarted_since_check = true;
            y_at_check = cur.y;
        }
    }
    return finish(best.x, options.max_iter, false);
}

GdsSolution solve_single_response(const Matrix& X, const Vector& y, double gamma,
                                  const NormDescriptor& norm, const SolverOptions& options) {
    if (X.rows() != y.size()) {
        throw Error(ErrorKind::invalid_parameter, "solve_single_response: X rows must equal y length");
    }
    if (static_cast<std::size_t>(X.cols()) != norm.dimension()) {
        throw Error(ErrorKind::invalid_parameter, "solve_single_response: norm dimension must equal p");
    }
    if (!(gamma >= 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "solve_single_response: gamma must be >= 0");
    }
    GdsProblem problem;
    problem.gram = X.transpose() * X;
    problem.linear = X.transpose() * y;
    problem.gamma = gamma;
    problem.norm = norm;
    return solve_gds(problem, options);
}

} // namespace altest
