#include "dsbs/dataset.hpp"

#include <cmath>
#include <string>

#include "dsbs/errors.hpp"

namespace dsbs {

Dataset::Dataset(std::size_t n, std::size_t d, std::vector<double> values)
    : n_(n), d_(d), values_(std::move(values)) {
    if (n_ == 0) throw InvalidArgument("Dataset: need at least one point");
    if (d_ == 0) throw InvalidArgument("Dataset: dimension must be positive");
    if (values_.size() != n_ * d_)
        throw InvalidArgument("Dataset: expected " + std::to_string(n_ * d_) + " values, got " +
                              std::to_string(values_.size()));
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]))
            throw InvalidArgument("Dataset: non-finite entry at row " + std::to_string(i / d_));
    }
}

std::vector<double> Dataset::mean() const {
    std::vector<double> out(d_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t k = 0; k < d_; ++k) out[k] += values_[i * d_ + k];
    for (double& v : out) v /= static_cast<double>(n_);
    return out;
}

Dataset Dataset::select(std::span<const std::size_t> rows) const {
    std::vector<double> out;
    out.reserve(rows.size() * d_);
    for (std::size_t i : rows) {
        if (i >= n_) throw InvalidArgument("Dataset::select: row index out of range");
        const auto r = row(i);
        out.insert(out.end(), r.begin(), r.end());
    }
    return Dataset(rows.size(), d_, std::move(out));
}

} // namespace dsbs
