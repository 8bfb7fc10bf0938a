#include "portfolio_cam/disruption.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

namespace pcam {

namespace {

constexpr double kReconstructionTolerance = 1e-10;

double reconstruction_error(const Eigen::MatrixXd& l, const Eigen::MatrixXd& m) {
    return (l * l.transpose() - m).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd semidefinite_cholesky(const Eigen::MatrixXd& m) {
    const auto n = m.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    const double floor = 1e-14 * std::max(m.diagonal().maxCoeff(), 1.0);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double pivot = m(j, j) - l.row(j).head(j).squaredNorm();
        if (pivot <= floor) continue;  // dependent column stays zero
        const double d = std::sqrt(pivot);
        l(j, j) = d;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            l(i, j) = (m(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / d;
        }
    }
    return l;
}

Eigen::MatrixXd eigen_triangular_factor(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    const Eigen::VectorXd root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd b = solver.eigenvectors() * root.asDiagonal();
    // b = R' Q' from the QR of b', so b b' = R' R with R' lower triangular.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(b.transpose());
    Eigen::MatrixXd l = qr.matrixQR().triangularView<Eigen::Upper>().toDenseMatrix().transpose();
    for (Eigen::Index j = 0; j < l.cols(); ++j) {
        if (l(j, j) < 0.0) l.col(j) *= -1.0;
    }
    return l;
}

}  // namespace

Eigen::MatrixXd factor_correlation(const Eigen::MatrixXd& rho) {
    const auto psd = check_psd(rho);
    if (!psd.ok) {
        std::ostringstream msg;
        msg << "cannot factor a matrix that is not positive semidefinite (most negative eigenvalue "
            << psd.min_eigenvalue << ")";
        throw ModelError(msg.str());
    }
    if (rho.rows() == 0) return rho;
    Eigen::MatrixXd l = semidefinite_cholesky(rho);
    if (reconstruction_error(l, rho) < kReconstructionTolerance) return l;
    l = eigen_triangular_factor(rho);
    return l;
}

Eigen::MatrixXd factor_correlation(const CorrelationMatrix& rho) {
    return factor_correlation(rho.matrix());
}

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double beta_cdf(const AvailabilityDist& d, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return boost::math::ibeta(d.alpha_shape(), d.beta_shape(), x);
}

double beta_quantile(const AvailabilityDist& d, double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return boost::math::ibeta_inv(d.alpha_shape(), d.beta_shape(), u);
}

DisruptionProcessConfig::DisruptionProcessConfig(CorrelationMatrix spatial_rho, double temporal_phi,
                                                 std::vector<AvailabilityDist> marginals,
                                                 std::uint64_t rng_seed)
    : rho_(std::move(spatial_rho)),
      phi_(temporal_phi),
      marginals_(std::move(marginals)),
      seed_(rng_seed) {
    if (!(phi_ >= 0.0 && phi_ < 1.0)) {
        std::ostringstream msg;
        msg << "temporal_phi must lie in [0, 1), got " << phi_;
        throw ModelError(msg.str());
    }
    if (marginals_.size() != rho_.size()) {
        throw ModelError("disruption has " + std::to_string(marginals_.size()) +
                         " marginals but the correlation matrix has dimension " +
                         std::to_string(rho_.size()));
    }
    factor_ = factor_correlation(rho_);
}

LatentState stationary_state(const DisruptionProcessConfig& cfg, Rng& rng) {
    Eigen::VectorXd eps(static_cast<Eigen::Index>(cfg.size()));
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = rng.normal();
    return {cfg.factor() * eps, 0};
}

LatentState step(const LatentState& state, const DisruptionProcessConfig& cfg, Rng& rng) {
    const auto n = static_cast<Eigen::Index>(cfg.size());
    if (state.z.size() != n) throw ModelError("latent state dimension does not match the process");
    Eigen::VectorXd eps(n);
    for (Eigen::Index i = 0; i < n; ++i) eps(i) = rng.normal();
    const double phi = cfg.temporal_phi();
    LatentState next;
    next.z = phi * state.z + std::sqrt(1.0 - phi * phi) * (cfg.factor() * eps);
    next.epoch = state.epoch + 1;
    return next;
}

AvailabilityOutcome realize(const LatentState& state, const DisruptionProcessConfig& cfg,
                            std::span<const CameraSpec> cameras, Rng& rng) {
    const auto n = static_cast<Eigen::Index>(cfg.size());
    if (state.z.size() != n || static_cast<Eigen::Index>(cameras.size()) != n) {
        throw ModelError("availability realization dimension mismatch");
    }
    AvailabilityOutcome out;
    out.p.resize(n);
    out.up.resize(cameras.size());
    out.delivered_res.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        out.p(i) = beta_quantile(cfg.marginals()[k], normal_cdf(state.z(i)));
        out.up[k] = rng.bernoulli(out.p(i));
        out.delivered_res(i) = out.up[k] ? cameras[k].resolution : 0.0;
    }
    return out;
}

DisruptionProcess::DisruptionProcess(const DisruptionProcessConfig& cfg, std::uint64_t stream_seed)
    : cfg_(&cfg), rng_(stream_seed), state_(stationary_state(cfg, rng_)) {}

}  // namespace pcam
