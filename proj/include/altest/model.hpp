#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "altest/linalg.hpp"
#include "altest/rng.hpp"

namespace altest {

enum class DesignKind { gaussian };

// Ground truth for the pooled multi-response model y = X θ* + η, η ~ N(0, Σ*).
class ModelSpec {
public:
    ModelSpec(Vector theta_star, Matrix sigma_star, std::uint64_t seed,
              DesignKind design = DesignKind::gaussian);

    std::size_t p() const { return static_cast<std::size_t>(theta_star_.size()); }
    std::size_t m() const { return static_cast<std::size_t>(sigma_star_.rows()); }
    const Vector& theta_star() const { return theta_star_; }
    const Matrix& sigma_star() const { return sigma_star_; }
    DesignKind design() const { return design_; }
    std::uint64_t seed() const { return seed_; }

    // Σ*^{1/2} from the clamped eigendecomposition, used to colour the noise.
    const Matrix& noise_factor() const { return noise_factor_; }

private:
    Vector theta_star_;
    Matrix sigma_star_;
    Matrix noise_factor_;
    std::uint64_t seed_;
    DesignKind design_;
};

struct Observation {
    Matrix X;      // m x p
    Vector y;      // m
    Vector noise;  // m when generated synthetically, empty otherwise
};

using ObservationSpan = std::span<const Observation>;

class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<Observation> observations);

    std::size_t n() const { return observations_.size(); }
    std::size_t m() const { return m_; }
    std::size_t p() const { return p_; }
    bool has_noise() const;

    const Observation& operator[](std::size_t i) const { return observations_[i]; }
    ObservationSpan observations() const { return observations_; }
    operator ObservationSpan() const { return observations_; }

    bool operator==(const Dataset& other) const;

private:
    std::vector<Observation> observations_;
    std::size_t m_ = 0;
    std::size_t p_ = 0;
};

bool has_noise(ObservationSpan data);

struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
    bool operator==(const IndexRange&) const = default;
};

// 2T disjoint subsets; subset 2t-2 (0-based) feeds the GDS step of
// iteration t and subset 2t-1 its covariance step.
struct ResamplingPlan {
    std::size_t T = 0;
    std::vector<IndexRange> subsets;

    IndexRange gds_subset(std::size_t t) const { return subsets.at(2 * (t - 1)); }
    IndexRange covariance_subset(std::size_t t) const { return subsets.at(2 * (t - 1) + 1); }
};

inline ObservationSpan slice(ObservationSpan data, IndexRange r) {
    return data.subspan(r.begin, r.size());
}

Matrix make_block_sigma(std::size_t m, double rho);

// First ceil(s/2) entries +magnitude, next floor(s/2) entries -magnitude,
// the rest zero.
Vector make_sparse_theta(std::size_t p, std::size_t s, double magnitude = 1.0);

Dataset sample_dataset(const ModelSpec& spec, std::size_t n, const StreamId& stream);

ResamplingPlan plan_resampling(std::size_t n, std::size_t T);
inline ResamplingPlan plan_resampling(const Dataset& data, std::size_t T) {
    return plan_resampling(data.n(), T);
}

} // namespace altest
