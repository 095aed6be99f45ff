#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dsbs/dataset.hpp"
#include "dsbs/drift.hpp"

namespace dsbs {

/// Largest cloud w2_exact accepts by default (the cost matrix is materialized).
inline constexpr std::size_t kExactSizeCap = 4096;

/// Squared Euclidean distance between row i of a and row j of b.
double squared_distance(const Dataset& a, std::size_t i, const Dataset& b, std::size_t j);

/// Empirical W2 between two equal-size uniform clouds by exact min-cost assignment:
///     sqrt( (1/m) min_perm sum_i ||a_i - b_perm(i)||^2 ).
/// The per-pair costs of the optimal matching are summed in ascending order, so the
/// value does not depend on row order.
double w2_exact(const Dataset& a, const Dataset& b, std::size_t cap = kExactSizeCap);

struct EntropicResult {
    double w2 = 0.0;
    double epsilon = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    double marginal_error = 0.0; // L1 violation of the row marginal
};

/// Log-domain Sinkhorn on squared Euclidean costs with uniform marginals and epsilon
/// annealing. Returns sqrt of the transport cost of the final plan, which is biased
/// upward for epsilon > 0. Non-convergence is reported, not thrown.
EntropicResult w2_entropic(const Dataset& a, const Dataset& b, double epsilon, std::size_t max_iter = 20000,
                           double tol = 1e-6);

/// Median of all pairwise squared distances between a and b.
double median_squared_distance(const Dataset& a, const Dataset& b);

struct SubsampledResult {
    double mean = 0.0;
    std::vector<double> values;
    std::size_t subsample = 0;
    std::size_t repetitions = 0;
};

/// Mean of w2_exact over `repetitions` disjoint random subsamples of size `subsample`
/// drawn from each cloud.
SubsampledResult w2_subsampled(const Dataset& a, const Dataset& b, std::size_t subsample, std::size_t repetitions,
                               std::uint64_t seed);

/// V-statistic 2 E||a-b|| - E||a-a'|| - E||b-b'|| over all pairs.
double energy_distance(const Dataset& a, const Dataset& b);

/// Fraction of points whose nearest centre is each row of `centers`.
std::vector<double> mode_coverage(const Dataset& cloud, const Dataset& centers);

using DriftOracle = std::function<std::vector<double>(std::span<const double> x, double t)>;

struct DriftProbe {
    std::vector<double> x;
    double t = 0.0;
};

struct DriftErrorStats {
    double max_relative = 0.0;
    double mean_relative = 0.0;
    double max_absolute = 0.0;
    std::size_t probes = 0;
};

/// Compares the empirical drift with an analytic oracle. The relative error of one
/// probe is ||emp - oracle|| / ||oracle|| (absolute error where the oracle vanishes).
DriftErrorStats drift_error_report(const DriftEvaluator& ev, const DriftOracle& oracle,
                                   std::span<const DriftProbe> probes);

} // namespace dsbs
