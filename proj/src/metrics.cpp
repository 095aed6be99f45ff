#include "dsbs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "detail/reduce.hpp"
#include "detail/vexp.hpp"
#include "dsbs/assignment.hpp"
#include "dsbs/errors.hpp"
#include "dsbs/rng.hpp"

namespace dsbs {

namespace {

void check_same_dim(const Dataset& a, const Dataset& b, const char* what) {
    if (a.dim() != b.dim()) throw InvalidArgument(std::string(what) + ": clouds have different dimensions");
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed, std::uint64_t stream) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    RandomStream rng(seed, stream);
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    return idx;
}

// log sum_j exp(z_j), z given in `buf` (overwritten).
double log_sum_exp(std::span<double> buf) {
    const double mx = detail::lane_max(buf.data(), buf.size());
    if (mx == -std::numeric_limits<double>::infinity()) return mx;
    detail::exp_shifted(buf.data(), mx, buf.data(), buf.size());
    return mx + std::log(detail::lane_sum(buf.data(), buf.size()));
}

// Squared distances from one row of `a` to every row of `b`, cached for small problems.
class CostRows {
public:
    static constexpr std::size_t kCacheEntries = std::size_t{1} << 22;

    CostRows(const Dataset& a, const Dataset& b) : a_(a), b_(b) {
        if (a.size() * b.size() <= kCacheEntries) {
            cache_.resize(a.size() * b.size());
            for (std::size_t i = 0; i < a.size(); ++i) compute(i, {cache_.data() + i * b.size(), b.size()});
        }
    }

    std::span<const double> row(std::size_t i, std::span<double> scratch) const {
        if (!cache_.empty()) return {cache_.data() + i * b_.size(), b_.size()};
        compute(i, scratch);
        return scratch.first(b_.size());
    }

private:
    void compute(std::size_t i, std::span<double> out) const {
        for (std::size_t j = 0; j < b_.size(); ++j) out[j] = squared_distance(a_, i, b_, j);
    }

    const Dataset& a_;
    const Dataset& b_;
    std::vector<double> cache_;
};

} // namespace

double squared_distance(const Dataset& a, std::size_t i, const Dataset& b, std::size_t j) {
    const auto x = a.row(i);
    const auto y = b.row(j);
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double diff = x[k] - y[k];
        s += diff * diff;
    }
    return s;
}

double w2_exact(const Dataset& a, const Dataset& b, std::size_t cap) {
    check_same_dim(a, b, "w2_exact");
    if (a.size() != b.size())
        throw InvalidArgument("w2_exact: clouds must have equal size; use w2_entropic or w2_subsampled");
    const std::size_t m = a.size();
    if (m > cap)
        throw InvalidArgument("w2_exact: " + std::to_string(m) + " points exceeds the exact-size cap of " +
                              std::to_string(cap) + "; use w2_entropic or w2_subsampled");
    std::vector<double> cost(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) cost[i * m + j] = squared_distance(a, i, b, j);
    const auto match = linear_assignment(cost, m);
    std::vector<double> matched(m);
    for (std::size_t i = 0; i < m; ++i) matched[i] = cost[i * m + match[i]];
    std::sort(matched.begin(), matched.end());
    double total = 0.0;
    for (double c : matched) total += c;
    return std::sqrt(total / static_cast<double>(m));
}

double median_squared_distance(const Dataset& a, const Dataset& b) {
    check_same_dim(a, b, "median_squared_distance");
    std::vector<double> all;
    all.reserve(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) all.push_back(squared_distance(a, i, b, j));
    auto mid = all.begin() + static_cast<std::ptrdiff_t>(all.size() / 2);
    std::nth_element(all.begin(), mid, all.end());
    return *mid;
}

EntropicResult w2_entropic(const Dataset& a, const Dataset& b, double epsilon, std::size_t max_iter, double tol) {
    check_same_dim(a, b, "w2_entropic");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("w2_entropic: epsilon must be positive");
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    const double log_a = -std::log(static_cast<double>(na));
    const double log_b = -std::log(static_cast<double>(nb));

    const CostRows rows(a, b);
    const CostRows cols(b, a);
    std::vector<double> f(na, 0.0), g(nb, 0.0), buf(std::max(na, nb)), scratch(std::max(na, nb));

    double max_cost = 0.0;
    for (std::size_t i = 0; i < na; ++i) {
        const auto c = rows.row(i, scratch);
        max_cost = std::max(max_cost, detail::lane_max(c.data(), nb));
    }

    auto update_f = [&](double eps) {
        const double inv = 1.0 / eps;
        for (std::size_t i = 0; i < na; ++i) {
            const auto c = rows.row(i, scratch);
            for (std::size_t j = 0; j < nb; ++j) buf[j] = (g[j] - c[j]) * inv + log_b;
            f[i] = -eps * log_sum_exp({buf.data(), nb});
        }
    };
    auto update_g = [&](double eps) {
        const double inv = 1.0 / eps;
        for (std::size_t j = 0; j < nb; ++j) {
            const auto c = cols.row(j, scratch);
            for (std::size_t i = 0; i < na; ++i) buf[i] = (f[i] - c[i]) * inv + log_a;
            g[j] = -eps * log_sum_exp({buf.data(), na});
        }
    };
    // L1 distance of the plan's row sums from the uniform marginal.
    auto row_error = [&](double eps) {
        const double inv = 1.0 / eps;
        double err = 0.0;
        for (std::size_t i = 0; i < na; ++i) {
            const auto c = rows.row(i, scratch);
            for (std::size_t j = 0; j < nb; ++j) buf[j] = (f[i] + g[j] - c[j]) * inv + log_b;
            err += std::abs(std::exp(log_a + log_sum_exp({buf.data(), nb})) - std::exp(log_a));
        }
        return err;
    };

    std::size_t iter = 0;
    double eps = std::max(max_cost, epsilon);

    // Anneal from the cost scale down to the target epsilon, warm-starting the potentials.
    for (; eps > epsilon && iter < max_iter; eps = std::max(0.5 * eps, epsilon)) {
        for (int k = 0; k < 10 && iter < max_iter; ++k, ++iter) {
            update_f(eps);
            update_g(eps);
        }
        if (iter == max_iter) break;
    }

    double err = std::numeric_limits<double>::infinity();
    while (iter < max_iter) {
        update_f(eps);
        update_g(eps);
        ++iter;
        if (iter % 5 == 0 || iter == max_iter) {
            err = row_error(eps);
            if (err < tol) break;
        }
    }
    if (!std::isfinite(err)) err = row_error(eps);

    // The plan is evaluated at the epsilon its potentials were computed for, which is
    // larger than requested only when the iteration budget ran out during annealing.
    const double inv = 1.0 / eps;
    double cost = 0.0;
    for (std::size_t i = 0; i < na; ++i) {
        const auto c = rows.row(i, scratch);
        for (std::size_t j = 0; j < nb; ++j) buf[j] = (f[i] + g[j] - c[j]) * inv + log_a + log_b;
        const double mx = detail::lane_max(buf.data(), nb);
        detail::exp_shifted(buf.data(), mx, buf.data(), nb);
        cost += std::exp(mx) * detail::lane_dot(buf.data(), c.data(), nb);
    }

    EntropicResult result;
    result.epsilon = eps;
    result.w2 = std::sqrt(cost);
    result.iterations = iter;
    result.marginal_error = err;
    result.converged = err < tol;
    return result;
}

SubsampledResult w2_subsampled(const Dataset& a, const Dataset& b, std::size_t subsample, std::size_t repetitions,
                               std::uint64_t seed) {
    check_same_dim(a, b, "w2_subsampled");
    if (subsample == 0 || repetitions == 0) throw InvalidArgument("w2_subsampled: need subsample and repetitions >= 1");
    if (subsample * repetitions > std::min(a.size(), b.size()))
        throw InvalidArgument("w2_subsampled: " + std::to_string(repetitions) + " disjoint subsamples of " +
                              std::to_string(subsample) + " points do not fit in the clouds");
    const auto ia = shuffled_indices(a.size(), seed, 0);
    const auto ib = shuffled_indices(b.size(), seed, 1);
    SubsampledResult out;
    out.subsample = subsample;
    out.repetitions = repetitions;
    for (std::size_t r = 0; r < repetitions; ++r) {
        const std::span<const std::size_t> ra(ia.data() + r * subsample, subsample);
        const std::span<const std::size_t> rb(ib.data() + r * subsample, subsample);
        out.values.push_back(w2_exact(a.select(ra), b.select(rb), std::max(subsample, kExactSizeCap)));
    }
    out.mean = std::accumulate(out.values.begin(), out.values.end(), 0.0) / static_cast<double>(repetitions);
    return out;
}

double energy_distance(const Dataset& a, const Dataset& b) {
    check_same_dim(a, b, "energy_distance");
    auto mean_dist = [](const Dataset& x, const Dataset& y) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = 0; j < y.size(); ++j) s += std::sqrt(squared_distance(x, i, y, j));
        return s / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
    };
    const double value = 2.0 * mean_dist(a, b) - mean_dist(a, a) - mean_dist(b, b);
    return std::max(value, 0.0);
}

std::vector<double> mode_coverage(const Dataset& cloud, const Dataset& centers) {
    check_same_dim(cloud, centers, "mode_coverage");
    std::vector<double> counts(centers.size(), 0.0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centers.size(); ++c) {
            const double dist = squared_distance(cloud, i, centers, c);
            if (dist < best_d) {
                best_d = dist;
                best = c;
            }
        }
        counts[best] += 1.0;
    }
    for (double& c : counts) c /= static_cast<double>(cloud.size());
    return counts;
}

DriftErrorStats drift_error_report(const DriftEvaluator& ev, const DriftOracle& oracle,
                                   std::span<const DriftProbe> probes) {
    if (probes.empty()) throw InvalidArgument("drift_error_report: empty probe grid");
    DriftErrorStats stats;
    double sum_rel = 0.0;
    std::vector<double> emp(ev.dim()), diff(ev.dim());
    for (const auto& probe : probes) {
        ev.empirical_drift(probe.x, probe.t, emp);
        const auto ref = oracle(probe.x, probe.t);
        if (ref.size() != ev.dim()) throw InvalidArgument("drift_error_report: oracle returned wrong dimension");
        for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = emp[k] - ref[k];
        const double abs_err = norm(diff);
        const double ref_norm = norm(ref);
        const double rel = ref_norm > 0.0 ? abs_err / ref_norm : abs_err;
        stats.max_absolute = std::max(stats.max_absolute, abs_err);
        stats.max_relative = std::max(stats.max_relative, rel);
        sum_rel += rel;
    }
    stats.probes = probes.size();
    stats.mean_relative = sum_rel / static_cast<double>(probes.size());
    return stats;
}

} // namespace dsbs
