#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pcam {

/// Raised when a domain object is constructed from values that break its
/// invariants (bad shape parameters, non-PSD correlation, size mismatch).
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Beta(a, b) law of a camera's random availability probability.
class AvailabilityDist {
public:
    /// Beta(2,2); used when a scenario omits the marginals.
    AvailabilityDist() = default;
    AvailabilityDist(double alpha_shape, double beta_shape);

    double alpha_shape() const noexcept { return a_; }
    double beta_shape() const noexcept { return b_; }

    double mean() const noexcept;
    double variance() const noexcept;
    double std_dev() const noexcept;

    friend bool operator==(const AvailabilityDist&, const AvailabilityDist&) = default;

private:
    double a_ = 2.0;
    double b_ = 2.0;
};

double beta_mean(const AvailabilityDist& d) noexcept;
double beta_std(const AvailabilityDist& d) noexcept;

struct CameraSpec {
    int id = 0;
    double resolution = 1.0;
    AvailabilityDist avail;
};

/// Checks resolution > 0 and that ids run 0..N-1 in order. Throws ModelError.
void validate_cameras(std::span<const CameraSpec> cameras);

struct PsdReport {
    bool ok = true;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
};

/// Eigenvalue floor test: PSD iff min eigenvalue >= -1e-9 * max(|largest eigenvalue|, 1).
PsdReport check_psd(const Eigen::MatrixXd& m);

/// One human-readable line per violated invariant of a candidate correlation
/// matrix. Empty when the matrix is a valid correlation matrix.
std::vector<std::string> correlation_diagnostics(const Eigen::MatrixXd& rho);

/// Symmetric, unit-diagonal, entries in [-1, 1], positive semidefinite.
class CorrelationMatrix {
public:
    /// Throws ModelError carrying every diagnostic line.
    explicit CorrelationMatrix(Eigen::MatrixXd rho);

    static CorrelationMatrix identity(std::size_t n);

    std::size_t size() const noexcept { return static_cast<std::size_t>(rho_.rows()); }
    double operator()(std::size_t i, std::size_t j) const { return rho_(i, j); }
    const Eigen::MatrixXd& matrix() const noexcept { return rho_; }

    /// Off-diagonal entries multiplied by `factor`; re-validated.
    CorrelationMatrix scaled_off_diagonal(double factor) const;

private:
    Eigen::MatrixXd rho_;
};

/// First and second moments of delivered resolution plus the Θ/Ψ thresholds.
struct PortfolioInputs {
    Eigen::VectorXd expected_res;
    Eigen::MatrixXd cov;
    double theta = 0.0;
    double psi = 1.0;

    std::size_t size() const noexcept { return static_cast<std::size_t>(expected_res.size()); }
};

double expected_resolution(const CameraSpec& c) noexcept;

/// R_i R_j sigma_i sigma_j rho_ij. Throws ModelError when rho_ij is outside [-1, 1].
double resolution_covariance(const CameraSpec& ci, const CameraSpec& cj, double rho_ij);

PortfolioInputs build_portfolio_inputs(std::span<const CameraSpec> cameras,
                                       const CorrelationMatrix& rho, double theta, double psi);

/// Largest value of sum(alpha_i * E[R_i]) reachable with sum(alpha) <= psi and
/// alpha in [0,1]: the floor(psi) best cameras in full plus a fractional share of the next.
double max_attainable_quality(const Eigen::VectorXd& expected_res, double psi);

/// Total of the floor(psi) largest expected resolutions.
double budget_deliverable(const Eigen::VectorXd& expected_res, double psi);

/// Empty when Θ can be met under Ψ; otherwise a warning line.
std::vector<std::string> feasibility_warnings(const PortfolioInputs& inputs);

}  // namespace pcam
