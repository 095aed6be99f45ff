#include <doctest.h>

#include <cmath>
#include <vector>

#include "dsbs/datasets.hpp"
#include "dsbs/drift.hpp"
#include "dsbs/errors.hpp"
#include "dsbs/gmm.hpp"
#include "test_util.hpp"

using namespace dsbs;
using dsbs::testing::norm;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

GaussianMixture two_component_1d() {
    return GaussianMixture::isotropic({0.5, 0.5}, {vec({2.0}), vec({-2.0})}, {0.25, 0.25});
}

// E[x_t | x_0 = 0, x_1 = y] / y for the VP reference process.
double bridge_mean_scale(const ReferenceSde& sde, double t) {
    const double b_rest = beta_integral(sde, t, 1.0);
    return std::exp(-0.5 * b_rest) * -std::expm1(-beta_integral(sde, 0.0, t)) / -std::expm1(-beta_integral(sde, 0.0, 1.0));
}

// Posterior mean of the endpoint by trapezoid quadrature of the mixture density
// reweighted by the bridge factor, 1D only.
double quadrature_mean(const GaussianMixture& gmm, const ReferenceSde& sde, double a, double x, double t) {
    const auto k0 = transition_params(sde, 0.0, 1.0);
    const auto kt = transition_params(sde, t, 1.0);
    const double lo = -12.0, hi = 12.0;
    const int n = 400000;
    const double h = (hi - lo) / n;
    std::vector<double> logf(n + 1);
    double top = -1e300;
    for (int i = 0; i <= n; ++i) {
        const double y = lo + h * i;
        double dens = 0.0;
        for (std::size_t k = 0; k < gmm.components(); ++k) {
            const double var = gmm.covariances[k](0, 0);
            const double z = y - gmm.means[k][0];
            dens += gmm.weights[k] * std::exp(-0.5 * z * z / var) / std::sqrt(var);
        }
        const double lw = std::pow(y - k0.mean_scale * a, 2) / (2 * k0.variance) -
                          std::pow(y - kt.mean_scale * x, 2) / (2 * kt.variance);
        logf[i] = std::log(dens) + lw;
        top = std::max(top, logf[i]);
    }
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double wgt = (i == 0 || i == n ? 0.5 : 1.0) * std::exp(logf[i] - top);
        num += wgt * (lo + h * i);
        den += wgt;
    }
    return num / den;
}

} // namespace

TEST_CASE("single component collapses to kappa1 theta - kappa2 x") {
    const auto sde = ReferenceSde::vp(2, ExpDecayBeta{1.0});
    GaussianMixture gmm;
    gmm.weights = {1.0};
    gmm.means = {vec({0.5, -1.0})};
    Eigen::MatrixXd cov(2, 2);
    cov << 0.6, 0.2, 0.2, 0.3;
    gmm.covariances = {cov};
    const std::vector<double> a{0.1, 0.2}, x{-0.4, 0.9};
    const double t = 0.35;
    const auto im = gmm_drift_vp_intermediates(gmm, sde, a, x, t);
    const auto u = gmm_drift_vp(gmm, sde, a, x, t);
    CHECK(im.responsibility[0] == 1.0);
    for (int k = 0; k < 2; ++k)
        CHECK(u[k] == doctest::Approx(im.kappa1 * im.theta_tilde[0][k] - im.kappa2 * x[k]).epsilon(1e-14));
    // kappa1 and kappa2 coincide with the empirical-drift coefficients.
    const auto c = drift_coefficients(sde, t);
    CHECK(im.kappa1 == doctest::Approx(c.c1).epsilon(1e-14));
    CHECK(im.kappa2 == doctest::Approx(c.c2).epsilon(1e-14));
    // Sigma_tilde is the inverse of the tilted precision.
    const Eigen::MatrixXd prec = cov.inverse() + (1 / im.zeta2 - 1 / im.zeta1) * Eigen::MatrixXd::Identity(2, 2);
    CHECK((im.sigma_tilde[0] * prec - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("centred single Gaussian gives zero drift at the origin") {
    const auto sde = ReferenceSde::vp(1, ExpDecayBeta{1.0});
    const auto gmm = GaussianMixture::isotropic({1.0}, {vec({0.0})}, {1.0});
    const std::vector<double> zero{0.0};
    CHECK(gmm_drift_vp(gmm, sde, zero, zero, 0.5)[0] == 0.0);
}

TEST_CASE("symmetric mixture gives zero drift at the origin") {
    const auto sde = ReferenceSde::vp(1, ExpDecayBeta{1.0});
    const std::vector<double> zero{0.0};
    for (double t : {0.0, 0.3, 0.7, 0.95})
        CHECK(std::abs(gmm_drift_vp(two_component_1d(), sde, zero, zero, t)[0]) < 1e-12);
}

TEST_CASE("closed form matches quadrature of the tilted posterior") {
    const auto sde = ReferenceSde::vp(1, ExpDecayBeta{1.0});
    const auto sde10 = ReferenceSde::vp(1, ExpDecayBeta{10.0});
    const auto skewed = GaussianMixture::isotropic({0.2, 0.5, 0.3}, {vec({-3.0}), vec({0.5}), vec({2.5})},
                                                   {0.3, 0.8, 0.1});
    for (const auto* s : {&sde, &sde10}) {
        for (const auto* g : {&skewed}) {
            for (double t : {0.0, 0.1, 0.5, 0.9}) {
                for (double x : {-1.0, 0.5, 2.0}) {
                    for (double a : {0.0, 0.7}) {
                        const std::vector<double> av{a}, xv{x};
                        const auto c = drift_coefficients(*s, t);
                        const double expected = c.c1 * quadrature_mean(*g, *s, a, x, t) - c.c2 * x;
                        const double got = gmm_drift_vp(*g, *s, av, xv, t)[0];
                        CHECK(got == doctest::Approx(expected).epsilon(1e-8).scale(1.0));
                    }
                }
            }
        }
    }
    const std::vector<double> a{0.0}, x{0.5};
    const auto c = drift_coefficients(sde, 0.5);
    CHECK(gmm_drift_vp(two_component_1d(), sde, a, x, 0.5)[0] ==
          doctest::Approx(c.c1 * quadrature_mean(two_component_1d(), sde, 0.0, 0.5, 0.5) - c.c2 * 0.5)
              .epsilon(1e-9));
}

TEST_CASE("closed form agrees with a 10^6-sample Monte-Carlo estimate within 3 standard errors") {
    const auto sde = ReferenceSde::vp(1, ExpDecayBeta{1.0});
    const auto gmm = two_component_1d();
    const DriftEvaluator ev(sde, sample_gmm(gmm, 1000000, 2024));
    const std::vector<double> a{0.0};
    for (const auto& [x0, t] : std::vector<std::pair<double, double>>{{0.5, 0.5}, {-1.0, 0.2}, {1.5, 0.8}}) {
        const std::vector<double> x{x0};
        std::vector<double> w(ev.dataset().size());
        ev.softmax_weights(x, t, w);
        double mean = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) mean += w[i] * ev.dataset()(i, 0);
        double var = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) var += w[i] * w[i] * std::pow(ev.dataset()(i, 0) - mean, 2);
        const double se = drift_coefficients(sde, t).c1 * std::sqrt(var);
        const double mc = ev.empirical_drift(x, t)[0];
        const double exact = gmm_drift_vp(gmm, sde, a, x, t)[0];
        CHECK_MESSAGE(std::abs(mc - exact) <= 3 * se, "x=", x0, " t=", t, " mc=", mc, " exact=", exact, " se=", se);
    }
}

TEST_CASE("empirical drift on 10^5 draws is within 5% of the closed form") {
    const auto sde = ReferenceSde::vp(2, ExpDecayBeta{1.0});
    const auto gmm = GaussianMixture::isotropic({0.3, 0.3, 0.4}, {vec({2.0, 0.0}), vec({-1.0, 1.5}), vec({-1.0, -1.5})},
                                                {0.2, 0.3, 0.25});
    const std::vector<double> a{0.0, 0.0};
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const DriftEvaluator ev(sde, sample_gmm(gmm, 100000, seed));
        for (double t : {0.1, 0.5, 0.9}) {
            for (std::size_t k = 0; k < gmm.components(); ++k) {
                const double s = bridge_mean_scale(sde, t);
                const std::vector<double> x{s * gmm.means[k][0], s * gmm.means[k][1]};
                const auto exact = gmm_drift_vp(gmm, sde, a, x, t);
                const auto got = ev.empirical_drift(x, t);
                const std::vector<double> diff{got[0] - exact[0], got[1] - exact[1]};
                CHECK_MESSAGE(norm(diff) <= 0.05 * norm(exact), "seed ", seed, " t ", t, " k ", k,
                              " rel ", norm(diff) / norm(exact));
            }
        }
    }
}

TEST_CASE("gmm errors") {
    const auto vp = ReferenceSde::vp(1, ExpDecayBeta{1.0});
    const auto gmm = two_component_1d();
    const std::vector<double> z{0.0};
    CHECK_THROWS_AS(gmm_drift_vp(gmm, vp, z, z, 1.0), TerminalTimeError);
    CHECK_THROWS_AS(gmm_drift_vp(gmm, vp, z, z, -0.5), InvalidArgument);
    CHECK_THROWS_AS(gmm_drift_vp(gmm, ReferenceSde::ve(1), z, z, 0.5), InvalidArgument);
    GaussianMixture bad = gmm;
    bad.covariances[0](0, 0) = -1.0;
    CHECK_THROWS_AS(gmm_drift_vp(bad, vp, z, z, 0.5), InvalidArgument);
    CHECK_THROWS_AS(GaussianMixture::isotropic({0.5, 0.6}, {vec({0.0}), vec({1.0})}, {1.0, 1.0}), InvalidArgument);
    GaussianMixture asym;
    asym.weights = {1.0};
    asym.means = {vec({0.0, 0.0})};
    Eigen::MatrixXd c(2, 2);
    c << 1.0, 0.5, 0.4, 1.0;
    asym.covariances = {c};
    CHECK_THROWS_AS(asym.validate(), InvalidArgument);
}

TEST_CASE("responsibilities survive extreme log-weights") {
    const auto sde = ReferenceSde::vp(1, ExpDecayBeta{10.0});
    const auto gmm = GaussianMixture::isotropic({0.5, 0.5}, {vec({-50.0}), vec({50.0})}, {1e-4, 1e-4});
    const std::vector<double> a{0.0}, x{3.0};
    const auto im = gmm_drift_vp_intermediates(gmm, sde, a, x, 0.99);
    CHECK(std::isfinite(im.responsibility[0]));
    CHECK(im.responsibility[0] + im.responsibility[1] == doctest::Approx(1.0));
    CHECK(std::isfinite(gmm_drift_vp(gmm, sde, a, x, 0.99)[0]));
}
