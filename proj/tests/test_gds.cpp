#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "altest/error.hpp"
#include "altest/gds.hpp"
#include "support/fixtures.hpp"
#include "support/reference_lp.hpp"

using namespace altest;
using namespace altest::testing;
using Catch::Approx;

namespace {

Observation make_obs(const Matrix& X, const Vector& y) { return {X, y, Vector()}; }

GdsProblem direct_problem(const Matrix& gram, const Vector& linear, double gamma) {
    GdsProblem prob;
    prob.gram = gram;
    prob.linear = linear;
    prob.gamma = gamma;
    prob.norm = NormDescriptor::l1(static_cast<std::size_t>(linear.size()));
    return prob;
}

} // namespace

TEST_CASE("l1 norm descriptor", "[gds]") {
    const NormDescriptor n = NormDescriptor::l1(3);
    const Vector v = (Vector(3) << 1, -2, 0.5).finished();
    CHECK(n.value(v) == 3.5);
    CHECK(n.dual(v) == 2.0);
    const Vector theta = (Vector(3) << 2, -1, 0).finished();
    CHECK(n.in_subdifferential(theta, (Vector(3) << 1, -1, 0.3).finished()));
    CHECK_FALSE(n.in_subdifferential(theta, (Vector(3) << 1, 1, 0.3).finished()));
    CHECK_FALSE(n.in_subdifferential(theta, (Vector(3) << 1, -1, 1.3).finished()));
}

TEST_CASE("assemble_problem with identity design", "[gds]") {
    const Vector y = (Vector(3) << 0.5, -1.0, 2.0).finished();
    const Dataset d({make_obs(Matrix::Identity(3, 3), y)});
    const GdsProblem prob = assemble_problem(d, Matrix::Identity(3, 3), 0.1, NormDescriptor::l1(3));
    CHECK((prob.gram - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((prob.linear - y).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(prob.gamma == 0.1);
}

TEST_CASE("assemble_problem is idempotent under repeated observations", "[gds]") {
    std::mt19937_64 rng(3);
    const Matrix X = random_matrix(rng, 3, 4);
    const Vector y = random_matrix(rng, 3, 1);
    const Matrix sigma = random_spd(rng, 3);
    const Dataset one({make_obs(X, y)});
    const Dataset many(std::vector<Observation>(6, make_obs(X, y)));
    const GdsProblem a = assemble_problem(one, sigma, 0.0, NormDescriptor::l1(4));
    const GdsProblem b = assemble_problem(many, sigma, 0.0, NormDescriptor::l1(4));
    CHECK((a.gram - b.gram).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((a.linear - b.linear).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("assemble_problem matches a triple-loop sum", "[gds]") {
    std::mt19937_64 rng(17);
    const int m = 3, p = 4, n = 5;
    std::vector<Observation> obs;
    for (int i = 0; i < n; ++i) obs.push_back(make_obs(random_matrix(rng, m, p), random_matrix(rng, m, 1)));
    const Matrix sigma = random_spd(rng, m);
    const Matrix sinv = sigma.inverse();

    Matrix gram = Matrix::Zero(p, p);
    Vector linear = Vector::Zero(p);
    for (const auto& o : obs) {
        for (int a = 0; a < p; ++a) {
            for (int k = 0; k < m; ++k) {
                for (int l = 0; l < m; ++l) {
                    for (int b = 0; b < p; ++b) gram(a, b) += o.X(k, a) * sinv(k, l) * o.X(l, b);
                    linear(a) += o.X(k, a) * sinv(k, l) * o.y(l);
                }
            }
        }
    }
    gram /= n;
    linear /= n;

    const GdsProblem prob = assemble_problem(Dataset(obs), sigma, 0.0, NormDescriptor::l1(p));
    CHECK((prob.gram - gram).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((prob.linear - linear).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("assemble_problem rejects a singular sigma", "[gds][error]") {
    std::mt19937_64 rng(5);
    const Dataset d({make_obs(random_matrix(rng, 2, 3), random_matrix(rng, 2, 1))});
    Matrix singular = Matrix::Ones(2, 2);
    try {
        assemble_problem(d, singular, 0.0, NormDescriptor::l1(3));
        FAIL("expected ill-conditioned covariance");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ill_conditioned_covariance);
    }
}

TEST_CASE("solve_gds returns zero when the radius covers b", "[gds]") {
    const GdsProblem prob = random_problem(4, 6, 3, 8, 1.0);
    const GdsSolution sol = solve_gds(prob);
    CHECK(sol.theta_hat.isZero());
    CHECK(sol.norm_value == 0.0);
    CHECK(sol.converged);
}

TEST_CASE("solve_gds equality-constrained case recovers theta", "[gds]") {
    const Vector theta = (Vector(5) << 1.5, 0, -2, 0, 0.25).finished();
    const GdsSolution sol = solve_gds(direct_problem(Matrix::Identity(5, 5), theta, 0.0));
    REQUIRE(sol.converged);
    CHECK((sol.theta_hat - theta).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("solve_gds matches the reference LP on a small instance", "[gds]") {
    const GdsProblem prob = random_problem(2024, 6, 3, 8, 0.5);
    const ReferenceGds ref = reference_gds(prob);
    REQUIRE(ref.status == LpResult::Status::optimal);
    const GdsSolution sol = solve_gds(prob);
    REQUIRE(sol.converged);
    CHECK(std::abs(sol.norm_value - ref.objective) <= 1e-4);
    CHECK(sol.residual_dual_norm <= prob.gamma + 1e-5);
}

TEST_CASE("solve_gds agrees with the reference LP on random instances", "[gds][property]") {
    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t p = 1 + rng() % 10;
        const std::size_t m = 1 + rng() % 4;
        const std::size_t n = 1 + rng() % 12;
        const double frac = 0.05 + 0.9 * double(rng() % 1000) / 1000.0;
        const GdsProblem prob = random_problem(1000 + rep, p, m, n, frac);
        const ReferenceGds ref = reference_gds(prob);
        INFO("rep " << rep << " p=" << p << " m=" << m << " n=" << n);
        REQUIRE(ref.status == LpResult::Status::optimal);
        const GdsSolution sol = solve_gds(prob);
        REQUIRE(sol.converged);
        CHECK(std::abs(sol.norm_value - ref.objective) <= 1e-4);
        CHECK(sol.residual_dual_norm <= prob.gamma + 10 * 1e-6);
    }
}

TEST_CASE("residual_dual_norm is an exact scan", "[gds]") {
    const GdsProblem prob = random_problem(8, 7, 2, 5, 0.3);
    CHECK(residual_dual_norm(prob, Vector::Zero(7)) == prob.linear.cwiseAbs().maxCoeff());

    const Vector b = (Vector(3) << 1, -2, 3).finished();
    CHECK(residual_dual_norm(direct_problem(Matrix::Identity(3, 3), b, 0.0), b) == 0.0);

    std::mt19937_64 rng(8);
    const Vector theta = random_matrix(rng, 7, 1);
    double scan = 0.0;
    for (Eigen::Index i = 0; i < 7; ++i) {
        double row = -prob.linear(i);
        for (Eigen::Index j = 0; j < 7; ++j) row += prob.gram(i, j) * theta(j);
        scan = std::max(scan, std::abs(row));
    }
    CHECK(residual_dual_norm(prob, theta) == Approx(scan).epsilon(1e-13));
}

TEST_CASE("solve_single_response", "[gds]") {
    std::mt19937_64 rng(21);
    const Matrix X = random_matrix(rng, 5, 3);
    const Vector y = random_matrix(rng, 5, 1);

    SECTION("large radius gives zero") {
        const double g = (X.transpose() * y).cwiseAbs().maxCoeff();
        const GdsSolution sol = solve_single_response(X, y, g, NormDescriptor::l1(3));
        CHECK(sol.theta_hat.isZero());
    }

    SECTION("orthonormal columns at zero radius give Xᵀy") {
        const Matrix Q = Eigen::HouseholderQR<Matrix>(X).householderQ() * Matrix::Identity(5, 3);
        const GdsSolution sol = solve_single_response(Q, y, 0.0, NormDescriptor::l1(3));
        REQUIRE(sol.converged);
        CHECK((sol.theta_hat - Q.transpose() * y).cwiseAbs().maxCoeff() <= 1e-5);
    }

    SECTION("agrees with the assembled one-observation problem") {
        const double g = 0.4 * (X.transpose() * y).cwiseAbs().maxCoeff();
        const GdsSolution a = solve_single_response(X, y, g, NormDescriptor::l1(3));
        const Dataset d({make_obs(X, y)});
        const GdsSolution b =
            solve_gds(assemble_problem(d, Matrix::Identity(5, 5), g / 1.0, NormDescriptor::l1(3)));
        CHECK(a.norm_value == Approx(b.norm_value).margin(1e-5));
    }
}

TEST_CASE("solve_gds invariants", "[gds][property]") {
    const double tol = 1e-6;
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        // Norm-minimality: θ* is feasible when γ dominates the noise term.
        std::mt19937_64 rng(seed);
        const Vector theta_star = make_sparse_theta(8, 2);
        std::vector<Observation> obs;
        for (int i = 0; i < 6; ++i) {
            Matrix X = random_matrix(rng, 3, 8);
            Vector noise = 0.3 * random_matrix(rng, 3, 1);
            obs.push_back({X, X * theta_star + noise, noise});
        }
        GdsProblem prob = assemble_problem(Dataset(obs), Matrix::Identity(3, 3), 0.0,
                                           NormDescriptor::l1(8));
        prob.gamma = residual_dual_norm(prob, theta_star) * 1.01;
        const GdsSolution sol = solve_gds(prob, {tol, 50'000});
        REQUIRE(sol.converged);
        CHECK(sol.residual_dual_norm <= prob.gamma + 10 * tol);
        CHECK(sol.norm_value <= theta_star.lpNorm<1>() + 10 * tol);

        // Monotonicity in γ.
        GdsProblem tighter = prob;
        tighter.gamma = 0.5 * prob.gamma;
        const GdsSolution t = solve_gds(tighter, {tol, 50'000});
        REQUIRE(t.converged);
        CHECK(t.norm_value >= sol.norm_value - 10 * tol);

        // Joint scaling leaves the objective unchanged.
        GdsProblem scaled = prob;
        scaled.gram *= 3.0;
        scaled.linear *= 3.0;
        scaled.gamma *= 3.0;
        const GdsSolution s = solve_gds(scaled, {tol, 50'000});
        REQUIRE(s.converged);
        CHECK(std::abs(s.norm_value - sol.norm_value) <= 10 * tol * std::max(1.0, sol.norm_value));
    }
}

TEST_CASE("solve_gds certifies an infeasible radius", "[gds][error]") {
    Matrix gram = Matrix::Zero(2, 2);
    gram(0, 0) = 1.0;
    const Vector b = (Vector(2) << 0.0, 1.0).finished();
    try {
        solve_gds(direct_problem(gram, b, 0.5));
        FAIL("expected infeasible radius");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::infeasible_radius);
    }
}

TEST_CASE("solve_gds reports non-convergence with a tiny budget", "[gds]") {
    const GdsProblem prob = random_problem(77, 10, 3, 6, 0.1);
    const GdsSolution sol = solve_gds(prob, {1e-12, 3});
    CHECK_FALSE(sol.converged);
    CHECK(sol.theta_hat.size() == 10);
    CHECK(sol.residual_dual_norm == residual_dual_norm(prob, sol.theta_hat));
}
