#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "dsbs/dataset.hpp"
#include "dsbs/sde.hpp"

namespace dsbs {

struct DriftOptions {
    /// When nonzero and smaller than the dataset, drift is estimated from a fixed
    /// uniform subsample (without replacement) of this many rows.
    std::size_t subsample = 0;
    std::uint64_t subsample_seed = 0;
    /// Invoked with t on every drift / gradient / partition query. Must be thread-safe.
    std::function<void(double)> query_observer;
};

/// u*(x, t) = C1(t) * (weighted mean of samples) - C2(t) * x.
struct DriftCoefficients {
    double c1 = 0.0;
    double c2 = 0.0;
};

/// Closed-form coefficients of the bridge drift for the given family at time t < 1.
DriftCoefficients drift_coefficients(const ReferenceSde& sde, double t);

/// Bridge drift toward a single target point (the n = 1 estimator).
std::vector<double> point_mass_drift(const ReferenceSde& sde, std::span<const double> target,
                                     std::span<const double> x, double t);

/// Sample-based Schrodinger bridge drift for a reference SDE, a data set and a start point a.
///
/// Each sample x_i gets log-weight
///     ||x_i - m0 a||^2 / (2 v0) - ||x_i - m(t) x||^2 / (2 v(t))
/// with (m0, v0) the kernel from 0 to 1 and (m(t), v(t)) the kernel from t to 1.
/// Weights are normalized with log-sum-exp; one query costs O(n d).
///
/// Immutable after construction and safe to query from many threads at once.
class DriftEvaluator {
public:
    /// `start` defaults to the origin when empty.
    DriftEvaluator(ReferenceSde sde, std::shared_ptr<const Dataset> data, std::vector<double> start = {},
                   DriftOptions options = {});
    DriftEvaluator(ReferenceSde sde, Dataset data, std::vector<double> start = {}, DriftOptions options = {});

    const ReferenceSde& sde() const noexcept { return sde_; }
    /// The rows the estimator actually uses (the subsample, if one was requested).
    const Dataset& dataset() const noexcept { return *data_; }
    std::span<const double> start() const noexcept { return start_; }
    std::size_t dim() const noexcept { return sde_.dim(); }

    double log_weight(std::span<const double> x, double t, std::size_t i) const;

    /// Normalized softmax weights, out.size() == dataset().size().
    void softmax_weights(std::span<const double> x, double t, std::span<double> out) const;

    /// log sum_i exp(log_weight_i), i.e. log h(x, t) up to the constant log n.
    double log_partition(std::span<const double> x, double t) const;

    void empirical_drift(std::span<const double> x, double t, std::span<double> out) const;
    std::vector<double> empirical_drift(std::span<const double> x, double t) const;

    /// Gradient in x of log_partition; sigma(t)^2 times this equals the drift.
    void grad_log_h(std::span<const double> x, double t, std::span<double> out) const;
    std::vector<double> grad_log_h(std::span<const double> x, double t) const;

    /// Number of queries whose kernel variance hit kVarianceFloor.
    std::size_t floored_variance_count() const noexcept { return floored_->load(std::memory_order_relaxed); }

private:
    struct Aggregate {
        double log_partition;
        double mean_scale;
        double variance;
    };

    void check_query(std::span<const double> x, double t) const;
    // Fills `mean` with the softmax-weighted sample mean; `weights` (optional) with the weights.
    Aggregate aggregate(std::span<const double> x, double t, std::span<double> mean,
                        std::span<double> weights = {}) const;

    ReferenceSde sde_;
    std::shared_ptr<const Dataset> data_;
    std::vector<double> start_;
    DriftOptions options_;
    std::vector<double> columns_;     // column-major copy: columns_[k * n + i]
    std::vector<double> start_terms_; // ||x_i - m0 a||^2 / (2 v0)
    std::shared_ptr<std::atomic<std::size_t>> floored_;
};

} // namespace dsbs
