#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "portfolio_cam/model.hpp"
#include "portfolio_cam/rng.hpp"

namespace pcam {

/// Lower-triangular L with L L' = rho (to 1e-10 element-wise).
///
/// Runs an unpivoted Cholesky that zeroes columns whose pivot vanishes, which
/// handles exactly singular correlation matrices. If rounding leaves the
/// reconstruction outside tolerance, the factor is rebuilt from the
/// eigendecomposition and re-triangularized with a QR step.
/// Throws ModelError (with the most negative eigenvalue) for non-PSD input.
Eigen::MatrixXd factor_correlation(const Eigen::MatrixXd& rho);
Eigen::MatrixXd factor_correlation(const CorrelationMatrix& rho);

double normal_cdf(double z) noexcept;
double beta_cdf(const AvailabilityDist& d, double x);
double beta_quantile(const AvailabilityDist& d, double u);

class DisruptionProcessConfig {
public:
    /// Throws ModelError when phi is outside [0, 1) or the marginal count
    /// does not match the correlation dimension.
    DisruptionProcessConfig(CorrelationMatrix spatial_rho, double temporal_phi,
                            std::vector<AvailabilityDist> marginals, std::uint64_t rng_seed);

    const CorrelationMatrix& spatial_rho() const noexcept { return rho_; }
    double temporal_phi() const noexcept { return phi_; }
    const std::vector<AvailabilityDist>& marginals() const noexcept { return marginals_; }
    std::uint64_t rng_seed() const noexcept { return seed_; }
    const Eigen::MatrixXd& factor() const noexcept { return factor_; }
    std::size_t size() const noexcept { return marginals_.size(); }

private:
    CorrelationMatrix rho_;
    double phi_;
    std::vector<AvailabilityDist> marginals_;
    std::uint64_t seed_;
    Eigen::MatrixXd factor_;
};

struct LatentState {
    Eigen::VectorXd z;
    std::uint64_t epoch = 0;
};

struct AvailabilityOutcome {
    Eigen::VectorXd p;
    std::vector<bool> up;
    Eigen::VectorXd delivered_res;
};

/// z ~ N(0, rho) at epoch 0.
LatentState stationary_state(const DisruptionProcessConfig& cfg, Rng& rng);

/// z' = phi z + sqrt(1 - phi^2) L eps.
LatentState step(const LatentState& state, const DisruptionProcessConfig& cfg, Rng& rng);

/// Copula transform p_i = F_i^{-1}(Phi(z_i)), then independent Bernoulli(p_i) draws.
AvailabilityOutcome realize(const LatentState& state, const DisruptionProcessConfig& cfg,
                            std::span<const CameraSpec> cameras, Rng& rng);

/// Sequential AR(1) disruption chain with its own random stream.
class DisruptionProcess {
public:
    DisruptionProcess(const DisruptionProcessConfig& cfg, std::uint64_t stream_seed);

    const LatentState& state() const noexcept { return state_; }
    void advance() { state_ = step(state_, *cfg_, rng_); }
    AvailabilityOutcome realize(std::span<const CameraSpec> cameras) {
        return pcam::realize(state_, *cfg_, cameras, rng_);
    }

private:
    const DisruptionProcessConfig* cfg_;
    Rng rng_;
    LatentState state_;
};

}  // namespace pcam
