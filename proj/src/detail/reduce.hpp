#pragma once

#include <cstddef>
#include <limits>

namespace dsbs::detail {

// Reductions with a fixed number of independent accumulators. The summation
// order depends only on n, so results are reproducible, and the inner loops
// vectorize without reassociation flags.
inline constexpr std::size_t kLanes = 8;

inline double lane_sum(const double* a, std::size_t n) noexcept {
    double acc[kLanes] = {};
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        for (std::size_t j = 0; j < kLanes; ++j) acc[j] += a[i + j];
    double s = 0.0;
    for (std::size_t j = 0; j < kLanes; ++j) s += acc[j];
    for (; i < n; ++i) s += a[i];
    return s;
}

inline double lane_dot(const double* a, const double* b, std::size_t n) noexcept {
    double acc[kLanes] = {};
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        for (std::size_t j = 0; j < kLanes; ++j) acc[j] += a[i + j] * b[i + j];
    double s = 0.0;
    for (std::size_t j = 0; j < kLanes; ++j) s += acc[j];
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline double lane_max(const double* a, std::size_t n) noexcept {
    double acc[kLanes];
    for (double& v : acc) v = -std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        for (std::size_t j = 0; j < kLanes; ++j) acc[j] = a[i + j] > acc[j] ? a[i + j] : acc[j];
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < kLanes; ++j) m = acc[j] > m ? acc[j] : m;
    for (; i < n; ++i) m = a[i] > m ? a[i] : m;
    return m;
}

} // namespace dsbs::detail
