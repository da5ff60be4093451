#pragma once

#include <cstdint>
#include <random>

#include "altest/gds.hpp"
#include "altest/model.hpp"

namespace altest::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> normal;
    Matrix a(rows, cols);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
    return a;
}

inline Matrix random_spd(std::mt19937_64& rng, Eigen::Index m, double ridge = 0.1) {
    const Matrix g = random_matrix(rng, m, m);
    Matrix s = g * g.transpose() / double(m);
    s.diagonal().array() += ridge;
    return s;
}

// Small synthetic GDS instance: random design, sparse truth, unit-diagonal noise.
inline GdsProblem random_problem(std::uint64_t seed, std::size_t p, std::size_t m, std::size_t n,
                                 double gamma_fraction) {
    Matrix sigma_star = Matrix::Identity(Eigen::Index(m), Eigen::Index(m));
    if (m >= 2) sigma_star(0, 1) = sigma_star(1, 0) = 0.5;
    const ModelSpec spec(make_sparse_theta(p, std::min<std::size_t>(2, p)), sigma_star, seed);
    const Dataset data = sample_dataset(spec, n, {seed, 0, 0});
    GdsProblem prob = assemble_problem(data, Matrix::Identity(Eigen::Index(m), Eigen::Index(m)), 0.0,
                                       NormDescriptor::l1(p));
    prob.gamma = gamma_fraction * prob.linear.lpNorm<Eigen::Infinity>();
    return prob;
}

} // namespace altest::testing
