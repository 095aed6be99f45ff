#include "dsbs/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dsbs/errors.hpp"

namespace dsbs {

namespace {

Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& m, const char* what) {
    if (!m.isApprox(m.transpose(), 1e-12)) throw InvalidArgument(std::string(what) + ": matrix is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw InvalidArgument(std::string(what) + ": matrix is not positive-definite");
    return llt;
}

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

} // namespace

void GaussianMixture::validate() const {
    const std::size_t k = weights.size();
    if (k == 0) throw InvalidArgument("GaussianMixture: need at least one component");
    if (means.size() != k || covariances.size() != k)
        throw InvalidArgument("GaussianMixture: weights, means and covariances must have the same length");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw InvalidArgument("GaussianMixture: weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("GaussianMixture: weights must sum to 1");
    const auto d = means.front().size();
    if (d == 0) throw InvalidArgument("GaussianMixture: dimension must be positive");
    for (std::size_t j = 0; j < k; ++j) {
        if (means[j].size() != d || covariances[j].rows() != d || covariances[j].cols() != d)
            throw InvalidArgument("GaussianMixture: inconsistent component shapes");
        checked_llt(covariances[j], "GaussianMixture covariance");
    }
}

GaussianMixture GaussianMixture::isotropic(std::vector<double> weights, std::vector<Eigen::VectorXd> means,
                                           std::vector<double> variances) {
    if (variances.size() != means.size()) throw InvalidArgument("GaussianMixture: one variance per component");
    GaussianMixture gmm;
    gmm.weights = std::move(weights);
    for (std::size_t j = 0; j < means.size(); ++j) {
        const auto d = means[j].size();
        gmm.covariances.push_back(variances[j] * Eigen::MatrixXd::Identity(d, d));
    }
    gmm.means = std::move(means);
    gmm.validate();
    return gmm;
}

GmmDriftIntermediates gmm_drift_vp_intermediates(const GaussianMixture& gmm, const ReferenceSde& sde,
                                                 std::span<const double> start, std::span<const double> x,
                                                 double t) {
    if (sde.family() != Family::VP) throw InvalidArgument("gmm_drift_vp: the closed form is derived for VP only");
    if (std::isnan(t) || t < 0.0) throw InvalidArgument("gmm_drift_vp: time must be in [0, 1)");
    if (t >= 1.0) throw TerminalTimeError("gmm_drift_vp: the bridge drift is singular at t = 1");
    gmm.validate();
    const auto d = static_cast<Eigen::Index>(gmm.dim());
    if (static_cast<std::size_t>(d) != sde.dim() || start.size() != sde.dim() || x.size() != sde.dim())
        throw InvalidArgument("gmm_drift_vp: dimension mismatch");

    const double b_total = beta_integral(sde, 0.0, 1.0);
    const double b_rest = beta_integral(sde, t, 1.0);

    GmmDriftIntermediates out;
    out.zeta1 = -std::expm1(-b_total);
    out.zeta2 = std::max(-std::expm1(-b_rest), kVarianceFloor);
    const double beta_t = sde.beta(t);
    out.kappa1 = beta_t * std::exp(-0.5 * b_rest) / out.zeta2;
    out.kappa2 = beta_t * std::exp(-b_rest) / out.zeta2;
    out.m1 = as_vector(start) * std::exp(-0.5 * b_total);
    out.m2 = as_vector(x) * std::exp(-0.5 * b_rest);

    const double tilt = 1.0 / out.zeta2 - 1.0 / out.zeta1;
    const Eigen::VectorXd shift = out.m2 / out.zeta2 - out.m1 / out.zeta1;
    const auto identity = Eigen::MatrixXd::Identity(d, d);

    const std::size_t k_count = gmm.components();
    for (std::size_t k = 0; k < k_count; ++k) {
        const auto cov_llt = checked_llt(gmm.covariances[k], "gmm_drift_vp covariance");
        const Eigen::VectorXd prec_mean = cov_llt.solve(gmm.means[k]);
        Eigen::MatrixXd tilted_precision = cov_llt.solve(identity);
        tilted_precision = 0.5 * (tilted_precision + tilted_precision.transpose());
        tilted_precision.diagonal().array() += tilt;
        const auto tilted_llt = checked_llt(tilted_precision, "gmm_drift_vp tilted precision");

        const Eigen::VectorXd rhs = prec_mean + shift;
        const Eigen::VectorXd theta = tilted_llt.solve(rhs);
        const double quad_tilde = rhs.dot(theta);
        const double quad = gmm.means[k].dot(prec_mean);
        const double log_rho = -0.5 * log_det(tilted_llt) - 0.5 * log_det(cov_llt) + 0.5 * (quad_tilde - quad);

        out.theta_tilde.push_back(theta);
        out.sigma_tilde.push_back(tilted_llt.solve(identity));
        out.log_rho.push_back(log_rho);
        out.rho.push_back(std::exp(log_rho));
    }

    double max_term = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < k_count; ++k)
        if (gmm.weights[k] > 0.0) max_term = std::max(max_term, std::log(gmm.weights[k]) + out.log_rho[k]);
    out.responsibility.assign(k_count, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
        if (gmm.weights[k] > 0.0) out.responsibility[k] = std::exp(std::log(gmm.weights[k]) + out.log_rho[k] - max_term);
        total += out.responsibility[k];
    }
    for (double& r : out.responsibility) r /= total;
    return out;
}

std::vector<double> gmm_drift_vp(const GaussianMixture& gmm, const ReferenceSde& sde, std::span<const double> start,
                                 std::span<const double> x, double t) {
    const auto im = gmm_drift_vp_intermediates(gmm, sde, start, x, t);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sde.dim()));
    for (std::size_t k = 0; k < gmm.components(); ++k) mean += im.responsibility[k] * im.theta_tilde[k];
    const Eigen::VectorXd drift = im.kappa1 * mean - im.kappa2 * as_vector(x);
    return {drift.data(), drift.data() + drift.size()};
}

} // namespace dsbs
