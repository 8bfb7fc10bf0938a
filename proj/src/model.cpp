#include "portfolio_cam/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace pcam {

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& line : lines) {
        if (!out.empty()) out += '\n';
        out += line;
    }
    return out;
}

std::vector<double> sorted_descending(const Eigen::VectorXd& v) {
    std::vector<double> values(v.data(), v.data() + v.size());
    std::sort(values.begin(), values.end(), std::greater<>());
    return values;
}

}  // namespace

AvailabilityDist::AvailabilityDist(double alpha_shape, double beta_shape)
    : a_(alpha_shape), b_(beta_shape) {
    if (!(alpha_shape > 0.0) || !(beta_shape > 0.0) || !std::isfinite(alpha_shape) ||
        !std::isfinite(beta_shape)) {
        std::ostringstream msg;
        msg << "Beta shape parameters must be finite and positive, got (" << alpha_shape << ", "
            << beta_shape << ")";
        throw ModelError(msg.str());
    }
}

double AvailabilityDist::mean() const noexcept { return a_ / (a_ + b_); }

double AvailabilityDist::variance() const noexcept {
    const double s = a_ + b_;
    return a_ * b_ / (s * s * (s + 1.0));
}

double AvailabilityDist::std_dev() const noexcept { return std::sqrt(variance()); }

double beta_mean(const AvailabilityDist& d) noexcept { return d.mean(); }
double beta_std(const AvailabilityDist& d) noexcept { return d.std_dev(); }

void validate_cameras(std::span<const CameraSpec> cameras) {
    std::vector<std::string> problems;
    for (std::size_t i = 0; i < cameras.size(); ++i) {
        const auto& c = cameras[i];
        if (c.id != static_cast<int>(i)) {
            problems.push_back("camera at position " + std::to_string(i) + " has id " +
                               std::to_string(c.id) + "; ids must be contiguous from 0");
        }
        if (!(c.resolution > 0.0) || !std::isfinite(c.resolution)) {
            std::ostringstream msg;
            msg << "camera " << c.id << " resolution must be positive, got " << c.resolution;
            problems.push_back(msg.str());
        }
    }
    if (!problems.empty()) throw ModelError(join_lines(problems));
}

PsdReport check_psd(const Eigen::MatrixXd& m) {
    PsdReport report;
    if (m.rows() == 0) return report;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    report.min_eigenvalue = ev.minCoeff();
    report.max_eigenvalue = ev.maxCoeff();
    const double scale = std::max(std::abs(report.max_eigenvalue), 1.0);
    report.ok = report.min_eigenvalue >= -1e-9 * scale;
    return report;
}

std::vector<std::string> correlation_diagnostics(const Eigen::MatrixXd& rho) {
    std::vector<std::string> out;
    if (rho.rows() != rho.cols()) {
        out.push_back("correlation matrix is not square (" + std::to_string(rho.rows()) + "x" +
                      std::to_string(rho.cols()) + ")");
        return out;
    }
    const auto n = rho.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (rho(i, i) != 1.0) {
            std::ostringstream msg;
            msg << "rho[" << i << "][" << i << "] = " << rho(i, i) << " but the diagonal must be 1";
            out.push_back(msg.str());
        }
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (!std::isfinite(rho(i, j)) || rho(i, j) < -1.0 || rho(i, j) > 1.0) {
                std::ostringstream msg;
                msg << "rho[" << i << "][" << j << "] = " << rho(i, j) << " is outside [-1, 1]";
                out.push_back(msg.str());
            }
            if (rho(i, j) != rho(j, i)) {
                std::ostringstream msg;
                msg << "rho[" << i << "][" << j << "] = " << rho(i, j) << " differs from rho[" << j
                    << "][" << i << "] = " << rho(j, i);
                out.push_back(msg.str());
            }
        }
    }
    if (out.empty()) {
        const auto psd = check_psd(rho);
        if (!psd.ok) {
            std::ostringstream msg;
            msg.precision(6);
            msg << "correlation matrix is not positive semidefinite: most negative eigenvalue "
                << psd.min_eigenvalue;
            out.push_back(msg.str());
        }
    }
    return out;
}

CorrelationMatrix::CorrelationMatrix(Eigen::MatrixXd rho) : rho_(std::move(rho)) {
    const auto problems = correlation_diagnostics(rho_);
    if (!problems.empty()) throw ModelError(join_lines(problems));
}

CorrelationMatrix CorrelationMatrix::identity(std::size_t n) {
    const auto k = static_cast<Eigen::Index>(n);
    return CorrelationMatrix(Eigen::MatrixXd::Identity(k, k));
}

CorrelationMatrix CorrelationMatrix::scaled_off_diagonal(double factor) const {
    Eigen::MatrixXd scaled = rho_ * factor;
    scaled.diagonal().setOnes();
    return CorrelationMatrix(std::move(scaled));
}

double expected_resolution(const CameraSpec& c) noexcept { return c.resolution * beta_mean(c.avail); }

double resolution_covariance(const CameraSpec& ci, const CameraSpec& cj, double rho_ij) {
    if (!(rho_ij >= -1.0 && rho_ij <= 1.0)) {
        std::ostringstream msg;
        msg << "correlation coefficient " << rho_ij << " between cameras " << ci.id << " and "
            << cj.id << " is outside [-1, 1]";
        throw ModelError(msg.str());
    }
    return ci.resolution * cj.resolution * beta_std(ci.avail) * beta_std(cj.avail) * rho_ij;
}

PortfolioInputs build_portfolio_inputs(std::span<const CameraSpec> cameras,
                                       const CorrelationMatrix& rho, double theta, double psi) {
    validate_cameras(cameras);
    const std::size_t n = cameras.size();
    if (rho.size() != n) {
        throw ModelError("correlation matrix is " + std::to_string(rho.size()) + "x" +
                         std::to_string(rho.size()) + " but there are " + std::to_string(n) +
                         " cameras");
    }
    if (!(theta >= 0.0) || !std::isfinite(theta)) {
        throw ModelError("quality threshold theta must be nonnegative");
    }
    if (!(psi >= 1.0) || !std::isfinite(psi)) throw ModelError("camera budget psi must be >= 1");

    PortfolioInputs in;
    in.theta = theta;
    in.psi = psi;
    const auto k = static_cast<Eigen::Index>(n);
    in.expected_res.resize(k);
    in.cov.resize(k, k);
    for (std::size_t i = 0; i < n; ++i) {
        in.expected_res(i) = expected_resolution(cameras[i]);
        for (std::size_t j = 0; j <= i; ++j) {
            const double c = resolution_covariance(cameras[i], cameras[j], rho(i, j));
            in.cov(i, j) = c;
            in.cov(j, i) = c;
        }
    }
    return in;
}

double max_attainable_quality(const Eigen::VectorXd& expected_res, double psi) {
    const auto values = sorted_descending(expected_res);
    double remaining = std::max(psi, 0.0);
    double total = 0.0;
    for (double v : values) {
        if (remaining <= 0.0) break;
        const double share = std::min(remaining, 1.0);
        total += share * v;
        remaining -= share;
    }
    return total;
}

double budget_deliverable(const Eigen::VectorXd& expected_res, double psi) {
    const auto values = sorted_descending(expected_res);
    const auto take = std::min<std::size_t>(values.size(),
                                            static_cast<std::size_t>(std::max(std::floor(psi), 0.0)));
    return std::accumulate(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(take), 0.0);
}

std::vector<std::string> feasibility_warnings(const PortfolioInputs& inputs) {
    std::vector<std::string> out;
    const double total = inputs.expected_res.sum();
    if (inputs.theta > total) {
        std::ostringstream msg;
        msg << "theta " << inputs.theta << " exceeds total expected resolution " << total;
        out.push_back(msg.str());
    } else {
        const double reach = max_attainable_quality(inputs.expected_res, inputs.psi);
        if (inputs.theta > reach) {
            std::ostringstream msg;
            msg << "theta " << inputs.theta << " exceeds the best expected quality " << reach
                << " reachable with psi " << inputs.psi;
            out.push_back(msg.str());
        }
    }
    return out;
}

}  // namespace pcam
