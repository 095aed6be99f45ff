#include "dsbs/drift.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "detail/reduce.hpp"
#include "detail/vexp.hpp"
#include "dsbs/errors.hpp"
#include "dsbs/rng.hpp"

namespace dsbs {

namespace {

void check_drift_time(double t) {
    if (std::isnan(t) || t < 0.0) {
        std::ostringstream os;
        os << "drift query time " << t << " is negative or NaN";
        throw InvalidArgument(os.str());
    }
    if (t >= 1.0) {
        std::ostringstream os;
        os << "drift query at t = " << t << ": the bridge drift is singular at the terminal time";
        throw TerminalTimeError(os.str());
    }
}

std::shared_ptr<const Dataset> maybe_subsample(std::shared_ptr<const Dataset> data, const DriftOptions& options) {
    if (!data) throw InvalidState("DriftEvaluator: no dataset");
    const std::size_t n = data->size();
    if (options.subsample == 0 || options.subsample >= n) return data;
    // Partial Fisher-Yates: the first `subsample` entries of a seeded shuffle.
    std::vector<std::size_t> index(n);
    std::iota(index.begin(), index.end(), std::size_t{0});
    RandomStream rng(options.subsample_seed, 0);
    for (std::size_t i = 0; i < options.subsample; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(index[i], index[j]);
    }
    index.resize(options.subsample);
    return std::make_shared<const Dataset>(data->select(index));
}

constexpr std::size_t kBlock = 512;

// Per-thread scratch for one query.
std::span<double> scratch(std::size_t n) {
    thread_local std::vector<double> buffer;
    if (buffer.size() < n) buffer.resize(n);
    return {buffer.data(), n};
}

} // namespace

DriftCoefficients drift_coefficients(const ReferenceSde& sde, double t) {
    check_drift_time(t);
    const double variance = std::max(transition_params(sde, t, 1.0).variance, kVarianceFloor);
    switch (sde.family()) {
    case Family::VE: {
        const double c = sde.alpha_rate(t) / variance;
        return {c, c};
    }
    case Family::VP:
    case Family::SubVP: {
        const double b = beta_integral(sde, t, 1.0);
        double numerator = sde.beta(t);
        if (sde.family() == Family::SubVP) numerator *= -std::expm1(-2.0 * beta_integral(sde, 0.0, t));
        return {numerator * std::exp(-0.5 * b) / variance, numerator * std::exp(-b) / variance};
    }
    }
    return {};
}

std::vector<double> point_mass_drift(const ReferenceSde& sde, std::span<const double> target,
                                     std::span<const double> x, double t) {
    if (target.size() != sde.dim() || x.size() != sde.dim())
        throw InvalidArgument("point_mass_drift: dimension mismatch");
    const auto c = drift_coefficients(sde, t);
    std::vector<double> out(sde.dim());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = c.c1 * target[k] - c.c2 * x[k];
    return out;
}

DriftEvaluator::DriftEvaluator(ReferenceSde sde, Dataset data, std::vector<double> start, DriftOptions options)
    : DriftEvaluator(std::move(sde), std::make_shared<const Dataset>(std::move(data)), std::move(start),
                     std::move(options)) {}

DriftEvaluator::DriftEvaluator(ReferenceSde sde, std::shared_ptr<const Dataset> data, std::vector<double> start,
                               DriftOptions options)
    : sde_(std::move(sde)),
      data_(maybe_subsample(std::move(data), options)),
      start_(std::move(start)),
      options_(std::move(options)),
      floored_(std::make_shared<std::atomic<std::size_t>>(0)) {
    const std::size_t d = sde_.dim();
    if (start_.empty()) start_.assign(d, 0.0);
    if (data_->dim() != d || start_.size() != d)
        throw InvalidArgument("DriftEvaluator: dataset, start point and SDE dimensions must agree");
    for (double v : start_)
        if (!std::isfinite(v)) throw InvalidArgument("DriftEvaluator: start point must be finite");

    const std::size_t n = data_->size();
    columns_.resize(n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) columns_[k * n + i] = (*data_)(i, k);

    const KernelParams k0 = transition_params(sde_, 0.0, 1.0);
    const double inv_two_v0 = 0.5 / std::max(k0.variance, kVarianceFloor);
    start_terms_.assign(n, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
        const double anchor = k0.mean_scale * start_[k];
        const double* col = columns_.data() + k * n;
        for (std::size_t i = 0; i < n; ++i) {
            const double diff = col[i] - anchor;
            start_terms_[i] += diff * diff;
        }
    }
    for (double& v : start_terms_) v *= inv_two_v0;
}

void DriftEvaluator::check_query(std::span<const double> x, double t) const {
    if (options_.query_observer) options_.query_observer(t);
    check_drift_time(t);
    if (x.size() != dim()) {
        std::ostringstream os;
        os << "drift query: expected dimension " << dim() << ", got " << x.size();
        throw InvalidArgument(os.str());
    }
}

double DriftEvaluator::log_weight(std::span<const double> x, double t, std::size_t i) const {
    check_query(x, t);
    if (i >= data_->size()) throw InvalidArgument("log_weight: sample index out of range");
    const KernelParams kt = transition_params(sde_, t, 1.0);
    const KernelParams k0 = transition_params(sde_, 0.0, 1.0);
    const double vt = std::max(kt.variance, kVarianceFloor);
    const double v0 = std::max(k0.variance, kVarianceFloor);
    double to_start = 0.0;
    double to_x = 0.0;
    for (std::size_t k = 0; k < dim(); ++k) {
        const double xi = (*data_)(i, k);
        const double a = xi - k0.mean_scale * start_[k];
        const double b = xi - kt.mean_scale * x[k];
        to_start += a * a;
        to_x += b * b;
    }
    return to_start / (2.0 * v0) - to_x / (2.0 * vt);
}

DriftEvaluator::Aggregate DriftEvaluator::aggregate(std::span<const double> x, double t, std::span<double> mean,
                                                    std::span<double> weights) const {
    const std::size_t n = data_->size();
    const std::size_t d = dim();
    const KernelParams kt = transition_params(sde_, t, 1.0);
    double variance = kt.variance;
    if (variance < kVarianceFloor) {
        variance = kVarianceFloor;
        floored_->fetch_add(1, std::memory_order_relaxed);
    }
    const double inv_two_v = 0.5 / variance;
    const std::size_t blocks = (n + kBlock - 1) / kBlock;

    // Layout: log-weights of one block, weights of one block, target point, block shifts.
    auto buf = scratch(2 * kBlock + d + blocks);
    double* lw = buf.data();
    double* target = lw + 2 * kBlock;
    double* shifts = target + d;
    for (std::size_t k = 0; k < d; ++k) target[k] = kt.mean_scale * x[k];
    std::fill(mean.begin(), mean.end(), 0.0);

    // Online log-sum-exp over blocks that stay in L1: sums are kept relative to
    // the running maximum and rescaled when it grows.
    const double* st = start_terms_.data();
    double run_max = -std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t lo = b * kBlock;
        const std::size_t len = std::min(kBlock, n - lo);
        std::fill(lw, lw + len, 0.0);
        for (std::size_t k = 0; k < d; ++k) {
            const double* col = columns_.data() + k * n + lo;
            const double c = target[k];
            for (std::size_t i = 0; i < len; ++i) {
                const double diff = col[i] - c;
                lw[i] += diff * diff;
            }
        }
        for (std::size_t i = 0; i < len; ++i) lw[i] = st[lo + i] - inv_two_v * lw[i];

        const double block_max = detail::lane_max(lw, len);
        if (block_max > run_max) {
            if (total > 0.0) {
                const double rescale = std::exp(run_max - block_max);
                total *= rescale;
                for (double& m : mean) m *= rescale;
            }
            run_max = block_max;
        }
        shifts[b] = run_max;
        if (run_max == -std::numeric_limits<double>::infinity()) continue;

        double* w = weights.empty() ? lw + kBlock : weights.data() + lo;
        detail::exp_shifted(lw, run_max, w, len);
        total += detail::lane_sum(w, len);
        for (std::size_t k = 0; k < d; ++k) mean[k] += detail::lane_dot(w, columns_.data() + k * n + lo, len);
    }

    const double inv_total = 1.0 / total;
    for (double& m : mean) m *= inv_total;
    if (!weights.empty()) {
        for (std::size_t b = 0; b < blocks; ++b) {
            const std::size_t lo = b * kBlock;
            const std::size_t len = std::min(kBlock, n - lo);
            const double f = std::exp(shifts[b] - run_max) * inv_total;
            for (std::size_t i = 0; i < len; ++i) weights[lo + i] *= f;
        }
    }
    return {run_max + std::log(total), kt.mean_scale, variance};
}

void DriftEvaluator::softmax_weights(std::span<const double> x, double t, std::span<double> out) const {
    check_query(x, t);
    if (out.size() != data_->size()) throw InvalidArgument("softmax_weights: output size must equal dataset size");
    std::vector<double> mean(dim());
    aggregate(x, t, mean, out);
}

double DriftEvaluator::log_partition(std::span<const double> x, double t) const {
    check_query(x, t);
    std::vector<double> mean(dim());
    return aggregate(x, t, mean).log_partition;
}

void DriftEvaluator::empirical_drift(std::span<const double> x, double t, std::span<double> out) const {
    check_query(x, t);
    if (out.size() != dim()) throw InvalidArgument("empirical_drift: output dimension mismatch");
    const DriftCoefficients c = drift_coefficients(sde_, t);
    aggregate(x, t, out);
    for (std::size_t k = 0; k < dim(); ++k) out[k] = c.c1 * out[k] - c.c2 * x[k];
}

std::vector<double> DriftEvaluator::empirical_drift(std::span<const double> x, double t) const {
    std::vector<double> out(dim());
    empirical_drift(x, t, out);
    return out;
}

void DriftEvaluator::grad_log_h(std::span<const double> x, double t, std::span<double> out) const {
    check_query(x, t);
    if (out.size() != dim()) throw InvalidArgument("grad_log_h: output dimension mismatch");
    const Aggregate agg = aggregate(x, t, out);
    const double scale = agg.mean_scale / agg.variance;
    for (std::size_t k = 0; k < dim(); ++k) out[k] = scale * (out[k] - agg.mean_scale * x[k]);
}

std::vector<double> DriftEvaluator::grad_log_h(std::span<const double> x, double t) const {
    std::vector<double> out(dim());
    grad_log_h(x, t, out);
    return out;
}

} // namespace dsbs
