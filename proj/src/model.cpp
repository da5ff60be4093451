#include "altest/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "altest/error.hpp"

namespace altest {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw Error(ErrorKind::invalid_parameter, msg);
}

} // namespace

ModelSpec::ModelSpec(Vector theta_star, Matrix sigma_star, std::uint64_t seed, DesignKind design)
    : theta_star_(std::move(theta_star)),
      sigma_star_(std::move(sigma_star)),
      seed_(seed),
      design_(design) {
    require(theta_star_.size() >= 1, "ModelSpec: p must be >= 1");
    require(sigma_star_.rows() >= 1, "ModelSpec: m must be >= 1");
    require(sigma_star_.rows() == sigma_star_.cols(), "ModelSpec: sigma_star must be square");
    require(asymmetry(sigma_star_) <= 1e-12, "ModelSpec: sigma_star must be symmetric");
    for (Eigen::Index i = 0; i < sigma_star_.rows(); ++i) {
        require(std::abs(sigma_star_(i, i) - 1.0) <= 1e-12,
                "ModelSpec: sigma_star must have unit diagonal");
    }
    const SymmetricSpectrum spec = symmetric_spectrum(sigma_star_);
    require(spec.min() > 0.0, "ModelSpec: sigma_star must be positive definite");
    // Eigenvalues below 1e-12 are clamped so near-singular Σ* still yields a factor.
    noise_factor_ = spectral_apply(spec, [](double l) { return l < 1e-12 ? 0.0 : std::sqrt(l); });
}

Dataset::Dataset(std::vector<Observation> observations) : observations_(std::move(observations)) {
    if (observations_.empty()) {
        throw Error(ErrorKind::insufficient_data, "Dataset: n must be >= 1");
    }
    m_ = static_cast<std::size_t>(observations_.front().X.rows());
    p_ = static_cast<std::size_t>(observations_.front().X.cols());
    for (const auto& o : observations_) {
        require(static_cast<std::size_t>(o.X.rows()) == m_ &&
                    static_cast<std::size_t>(o.X.cols()) == p_,
                "Dataset: all design blocks must share one shape");
        require(static_cast<std::size_t>(o.y.size()) == m_, "Dataset: response length must equal m");
        require(o.noise.size() == 0 || static_cast<std::size_t>(o.noise.size()) == m_,
                "Dataset: noise length must equal m");
    }
}

bool has_noise(ObservationSpan data) {
    if (data.empty()) return false;
    for (const auto& o : data) {
        if (o.noise.size() == 0) return false;
    }
    return true;
}

bool Dataset::has_noise() const { return altest::has_noise(observations_); }

bool Dataset::operator==(const Dataset& other) const {
    if (n() != other.n() || m_ != other.m_ || p_ != other.p_) return false;
    for (std::size_t i = 0; i < n(); ++i) {
        const auto& a = observations_[i];
        const auto& b = other.observations_[i];
        if (a.X != b.X || a.y != b.y) return false;
        if (a.noise.size() != b.noise.size() || a.noise != b.noise) return false;
    }
    return true;
}

Matrix make_block_sigma(std::size_t m, double rho) {
    require(m >= 2 && m % 2 == 0, "make_block_sigma: m must be even and >= 2");
    require(std::abs(rho) < 1.0, "make_block_sigma: |rho| must be < 1");
    Matrix s = Matrix::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (Eigen::Index k = 0; k + 1 < s.rows(); k += 2) {
        s(k, k + 1) = rho;
        s(k + 1, k) = rho;
    }
    return s;
}

Vector make_sparse_theta(std::size_t p, std::size_t s, double magnitude) {
    require(s >= 1, "make_sparse_theta: s must be >= 1");
    require(s <= p, "make_sparse_theta: s must not exceed p");
    Vector theta = Vector::Zero(static_cast<Eigen::Index>(p));
    const std::size_t positive = (s + 1) / 2;
    for (std::size_t j = 0; j < s; ++j) {
        theta(static_cast<Eigen::Index>(j)) = j < positive ? magnitude : -magnitude;
    }
    return theta;
}

Dataset sample_dataset(const ModelSpec& spec, std::size_t n, const StreamId& stream) {
    if (n < 1) throw Error(ErrorKind::insufficient_data, "sample_dataset: n must be >= 1");
    const auto m = static_cast<Eigen::Index>(spec.m());
    const auto p = static_cast<Eigen::Index>(spec.p());

    Engine engine = make_engine(spec.seed(), stream);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<Observation> obs;
    obs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Observation o;
        o.X.resize(m, p);
        // Row-major draw order so the stream layout matches the file format.
        for (Eigen::Index r = 0; r < m; ++r) {
            for (Eigen::Index c = 0; c < p; ++c) o.X(r, c) = normal(engine);
        }
        Vector z(m);
        for (Eigen::Index r = 0; r < m; ++r) z(r) = normal(engine);
        o.noise = spec.noise_factor() * z;
        o.y = o.X * spec.theta_star() + o.noise;
        obs.push_back(std::move(o));
    }
    return Dataset(std::move(obs));
}

ResamplingPlan plan_resampling(std::size_t n, std::size_t T) {
    require(T >= 1, "plan_resampling: T must be >= 1");
    if (n < 2 * T) {
        throw Error(ErrorKind::insufficient_data,
                    "plan_resampling: need n >= 2T (n=" + std::to_string(n) +
                        ", T=" + std::to_string(T) + ")");
    }
    ResamplingPlan plan;
    plan.T = T;
    const std::size_t k = 2 * T;
    const std::size_t size = n / k;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t begin = i * size;
        const std::size_t end = (i + 1 == k) ? n : begin + size;
        plan.subsets.push_back({begin, end});
    }
    return plan;
}

} // namespace altest
