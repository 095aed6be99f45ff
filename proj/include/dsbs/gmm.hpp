#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dsbs/sde.hpp"

namespace dsbs {

/// mu = sum_k weight_k Normal(mean_k, covariance_k).
struct GaussianMixture {
    std::vector<double> weights;
    std::vector<Eigen::VectorXd> means;
    std::vector<Eigen::MatrixXd> covariances;

    std::size_t components() const noexcept { return weights.size(); }
    std::size_t dim() const noexcept { return means.empty() ? 0 : static_cast<std::size_t>(means.front().size()); }

    /// Weights form a probability vector (sum within 1e-12), shapes agree and every
    /// covariance is symmetric positive-definite. Throws InvalidArgument otherwise.
    void validate() const;

    /// Isotropic components: covariance_k = variance_k * I.
    static GaussianMixture isotropic(std::vector<double> weights, std::vector<Eigen::VectorXd> means,
                                     std::vector<double> variances);
};

/// Everything the closed-form VP drift for a Gaussian-mixture target is built from.
struct GmmDriftIntermediates {
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double zeta1 = 0.0; // 1 - exp(-int_0^1 beta)
    double zeta2 = 0.0; // 1 - exp(-int_t^1 beta)
    Eigen::VectorXd m1; // a * exp(-int_0^1 beta / 2)
    Eigen::VectorXd m2; // x * exp(-int_t^1 beta / 2)
    std::vector<Eigen::VectorXd> theta_tilde;
    std::vector<Eigen::MatrixXd> sigma_tilde;
    std::vector<double> log_rho;
    std::vector<double> rho;            // exp(log_rho); may overflow for extreme inputs
    std::vector<double> responsibility; // weight_k rho_k / sum_j weight_j rho_j
};

/// Intermediates of the analytic VP drift when the target is a Gaussian mixture.
///
/// Each component contributes a tilted Gaussian with precision
///     Sigma_k^{-1} + (1/zeta2 - 1/zeta1) I
/// and mean theta_tilde_k; rho_k is the ratio of normalizing constants, evaluated in
/// log space through Cholesky factors.
GmmDriftIntermediates gmm_drift_vp_intermediates(const GaussianMixture& gmm, const ReferenceSde& sde,
                                                 std::span<const double> start, std::span<const double> x,
                                                 double t);

/// kappa1 * sum_k r_k theta_tilde_k - kappa2 * x, r_k the responsibilities.
std::vector<double> gmm_drift_vp(const GaussianMixture& gmm, const ReferenceSde& sde, std::span<const double> start,
                                 std::span<const double> x, double t);

} // namespace dsbs
