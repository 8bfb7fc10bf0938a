#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "portfolio_cam/disruption.hpp"

using namespace pcam;
using doctest::Approx;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

bool lower_triangular(const Eigen::MatrixXd& l) {
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < l.cols(); ++j) {
            if (l(i, j) != 0.0) return false;
        }
    }
    return true;
}

Eigen::MatrixXd pair_rho(double r) {
    Eigen::MatrixXd m(2, 2);
    m << 1, r, r, 1;
    return m;
}

std::vector<CameraSpec> cameras(std::size_t n, AvailabilityDist d = {}) {
    std::vector<CameraSpec> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({int(i), 100.0 + 10.0 * i, d});
    return out;
}

std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = double(k);
    return r;
}

}  // namespace

TEST_CASE("factor_correlation examples") {
    CHECK(factor_correlation(Eigen::MatrixXd::Identity(4, 4)) == Eigen::MatrixXd::Identity(4, 4));

    const auto l = factor_correlation(pair_rho(0.5));
    CHECK(l(0, 0) == Approx(1.0));
    CHECK(l(0, 1) == 0.0);
    CHECK(l(1, 0) == Approx(0.5));
    CHECK(l(1, 1) == Approx(std::sqrt(0.75)));
}

TEST_CASE("factor_correlation reconstructs random and singular matrices") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
        const auto rho = oracle::random_correlation(7, rng);
        const auto l = factor_correlation(rho);
        CHECK(lower_triangular(l));
        CHECK(max_abs(l * l.transpose() - rho) < 1e-10);
    }

    std::normal_distribution<double> nd;
    for (int rank : {1, 2, 4}) {
        Eigen::MatrixXd w(7, rank);
        for (auto& x : w.reshaped()) x = nd(rng);
        Eigen::MatrixXd c = w * w.transpose();
        const Eigen::VectorXd inv = c.diagonal().cwiseSqrt().cwiseInverse();
        Eigen::MatrixXd rho = inv.asDiagonal() * c * inv.asDiagonal();
        rho.diagonal().setOnes();
        const auto l = factor_correlation(rho);
        CHECK(lower_triangular(l));
        CHECK(max_abs(l * l.transpose() - rho) < 1e-10);
    }

    const auto ones = factor_correlation(Eigen::MatrixXd::Ones(5, 5));
    CHECK(max_abs(ones * ones.transpose() - Eigen::MatrixXd::Ones(5, 5)) < 1e-10);

    // Perfectly anti-correlated pair inside a larger block.
    Eigen::MatrixXd anti = Eigen::MatrixXd::Identity(3, 3);
    anti(0, 1) = anti(1, 0) = -1;
    const auto la = factor_correlation(anti);
    CHECK(max_abs(la * la.transpose() - anti) < 1e-10);
}

TEST_CASE("factor_correlation rejects non-PSD input") {
    Eigen::MatrixXd m(3, 3);
    m << 1, 0.9, -0.9, 0.9, 1, 0.9, -0.9, 0.9, 1;
    CHECK_THROWS_WITH_AS(factor_correlation(m), doctest::Contains("-0.8"), ModelError);
}

TEST_CASE("normal and beta helpers") {
    CHECK(normal_cdf(0) == 0.5);
    CHECK(normal_cdf(1.959963984540054) == Approx(0.975).epsilon(1e-12));
    for (double x : {0.01, 0.2, 0.5, 0.77, 0.99}) {
        CHECK(beta_cdf({}, x) == Approx(oracle::beta22_cdf(x)).epsilon(1e-12));
        CHECK(beta_quantile({}, oracle::beta22_cdf(x)) == Approx(x).epsilon(1e-10));
        CHECK(beta_quantile(AvailabilityDist(1, 1), x) == Approx(x).epsilon(1e-12));
    }
}

TEST_CASE("config validation") {
    const auto rho = CorrelationMatrix::identity(2);
    const std::vector<AvailabilityDist> two(2);
    CHECK_NOTHROW(DisruptionProcessConfig(rho, 0.0, two, 1));
    CHECK_NOTHROW(DisruptionProcessConfig(rho, 0.999, two, 1));
    CHECK_THROWS_AS(DisruptionProcessConfig(rho, 1.0, two, 1), ModelError);
    CHECK_THROWS_AS(DisruptionProcessConfig(rho, -0.1, two, 1), ModelError);
    CHECK_THROWS_AS(DisruptionProcessConfig(rho, 0.0, std::vector<AvailabilityDist>(3), 1), ModelError);
}

TEST_CASE("latent AR(1) chain") {
    constexpr std::size_t steps = 100'000;
    for (double phi : {0.0, 0.5, 0.9}) {
        CAPTURE(phi);
        Eigen::MatrixXd r(3, 3);
        r << 1, 0.6, 0.2, 0.6, 1, 0.4, 0.2, 0.4, 1;
        const DisruptionProcessConfig cfg(CorrelationMatrix(r), phi, std::vector<AvailabilityDist>(3), 77);
        DisruptionProcess proc(cfg, derive_seed(cfg.rng_seed(), {0}));
        std::vector<std::vector<double>> z(3, std::vector<double>(steps));
        for (std::size_t t = 0; t < steps; ++t) {
            for (int i = 0; i < 3; ++i) z[i][t] = proc.state().z(i);
            proc.advance();
        }
        CHECK(proc.state().epoch == steps);
        for (int i = 0; i < 3; ++i) {
            const double ac = oracle::lag1_autocorrelation(z[i]);
            if (phi == 0.0) CHECK(std::abs(ac) < 0.01);
            if (phi == 0.9) {
                CHECK(ac >= 0.88);
                CHECK(ac <= 0.92);
            }
            double m = 0, v = 0;
            for (double x : z[i]) m += x;
            m /= steps;
            for (double x : z[i]) v += (x - m) * (x - m);
            v /= steps;
            CHECK(v >= 0.97);
            CHECK(v <= 1.03);
        }
        if (phi == 0.0) CHECK(oracle::pearson(z[0], z[1]) == Approx(0.6).epsilon(0.02));
    }
}

TEST_CASE("realize at the median") {
    const std::vector<AvailabilityDist> marg{AvailabilityDist(1, 1), AvailabilityDist(2, 2), AvailabilityDist(5, 2)};
    const DisruptionProcessConfig cfg(CorrelationMatrix::identity(3), 0, marg, 1);
    auto cams = cameras(3);
    for (int i = 0; i < 3; ++i) cams[i].avail = marg[i];
    Rng rng(4);
    const auto out = realize(LatentState{Eigen::VectorXd::Zero(3), 0}, cfg, cams, rng);
    CHECK(out.p(0) == Approx(0.5).epsilon(1e-12));
    CHECK(out.p(1) == Approx(0.5).epsilon(1e-12));
    CHECK(beta_cdf(marg[2], out.p(2)) == Approx(0.5).epsilon(1e-10));
    for (int i = 0; i < 3; ++i) {
        CHECK(out.delivered_res(i) == (out.up[i] ? cams[i].resolution : 0.0));
    }
}

TEST_CASE("copula marginals, up rates and spatial correlation") {
    constexpr std::size_t n = 1'000'000;
    const auto cams = cameras(3);
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(3, 3);
    r(0, 1) = r(1, 0) = 0.8;
    const DisruptionProcessConfig cfg(CorrelationMatrix(r), 0, std::vector<AvailabilityDist>(3), 2024);
    DisruptionProcess proc(cfg, derive_seed(cfg.rng_seed(), {0}));
    std::vector<std::vector<double>> p(3, std::vector<double>(n)), up(3, std::vector<double>(n));
    bool delivered_matches_up = true;
    for (std::size_t t = 0; t < n; ++t) {
        const auto out = proc.realize(cams);
        for (int i = 0; i < 3; ++i) {
            p[i][t] = out.p(i);
            up[i][t] = out.up[i];
            delivered_matches_up = delivered_matches_up && out.delivered_res(i) == (out.up[i] ? cams[i].resolution : 0.0);
        }
        proc.advance();
    }
    CHECK(delivered_matches_up);

    for (int i = 0; i < 3; ++i) {
        const auto ks = oracle::ks_test(p[i], oracle::beta22_cdf);
        CAPTURE(i);
        CHECK(ks.p_value > 0.01);
        CHECK(ks.statistic < 0.005);

        const double rate = std::accumulate(up[i].begin(), up[i].end(), 0.0) / n;
        CHECK(std::abs(rate - 0.5) < 3 * std::sqrt(0.25 / n));
    }

    const double rank_target = 6.0 / std::numbers::pi * std::asin(0.8 / 2);
    CHECK(std::abs(oracle::pearson(p[0], p[1]) - rank_target) < 0.05);
    CHECK(std::abs(oracle::pearson(ranks(p[0]), ranks(p[1])) - rank_target) < 0.005);
    CHECK(std::abs(oracle::pearson(p[0], p[2])) < 0.01);
    CHECK(std::abs(oracle::pearson(up[0], up[2])) < 0.01);
    CHECK(std::abs(oracle::pearson(up[1], up[2])) < 0.01);
}

TEST_CASE("up outcomes are uncorrelated under identity correlation") {
    constexpr std::size_t n = 1'000'000;
    const std::vector<AvailabilityDist> marg{AvailabilityDist(2, 2), AvailabilityDist(8, 2), AvailabilityDist(1, 3)};
    auto cams = cameras(3);
    for (int i = 0; i < 3; ++i) cams[i].avail = marg[i];
    const DisruptionProcessConfig cfg(CorrelationMatrix::identity(3), 0, marg, 5);
    DisruptionProcess proc(cfg, 99);
    std::vector<std::vector<double>> up(3, std::vector<double>(n));
    for (std::size_t t = 0; t < n; ++t) {
        const auto out = proc.realize(cams);
        for (int i = 0; i < 3; ++i) up[i][t] = out.up[i];
        proc.advance();
    }
    for (int i = 0; i < 3; ++i) {
        const double mu = beta_mean(marg[i]);
        const double rate = std::accumulate(up[i].begin(), up[i].end(), 0.0) / n;
        CHECK(std::abs(rate - mu) < 3 * std::sqrt(mu * (1 - mu) / n));
        for (int j = i + 1; j < 3; ++j) CHECK(std::abs(oracle::pearson(up[i], up[j])) < 0.01);
    }
}

TEST_CASE("disruption streams are deterministic") {
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(4, 4, 0.3);
    r.diagonal().setOnes();
    const DisruptionProcessConfig cfg(CorrelationMatrix(r), 0.7, std::vector<AvailabilityDist>(4), 10);
    const auto cams = cameras(4);
    auto run = [&](std::uint64_t seed) {
        DisruptionProcess proc(cfg, seed);
        std::vector<double> trace;
        for (int t = 0; t < 200; ++t) {
            const auto out = proc.realize(cams);
            trace.insert(trace.end(), out.p.begin(), out.p.end());
            for (bool u : out.up) trace.push_back(u);
            proc.advance();
        }
        return trace;
    };
    CHECK(run(1) == run(1));
    CHECK(run(1) != run(2));
}
