#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dsbs {

/// n x d point cloud stored row-major. The only representation of a target
/// distribution; also used for generated samples.
class Dataset {
public:
    /// Throws InvalidArgument unless n >= 1, d >= 1, values.size() == n*d and all entries are finite.
    Dataset(std::size_t n, std::size_t d, std::vector<double> values);

    std::size_t size() const noexcept { return n_; }
    std::size_t dim() const noexcept { return d_; }

    std::span<const double> row(std::size_t i) const noexcept { return {values_.data() + i * d_, d_}; }
    std::span<const double> values() const noexcept { return values_; }
    double operator()(std::size_t i, std::size_t k) const noexcept { return values_[i * d_ + k]; }

    /// Column means.
    std::vector<double> mean() const;

    /// Rows selected by index, in the given order.
    Dataset select(std::span<const std::size_t> rows) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::size_t n_;
    std::size_t d_;
    std::vector<double> values_;
};

} // namespace dsbs
