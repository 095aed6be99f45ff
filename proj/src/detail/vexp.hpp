#pragma once

#include <bit>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>

namespace dsbs::detail {

// exp(x) for x <= 0, written branch-free so the loop below auto-vectorizes.
// Cody-Waite reduction x = k ln2 + r, |r| <= ln2/2, then a degree-13 Taylor
// polynomial (truncation error < 1e-17 relative). Inputs below -708 flush to 0;
// callers only exponentiate log-weights shifted by their maximum, where such
// terms are negligible against the max term (which contributes exactly 1).
inline double exp_nonpositive(double x) noexcept {
    constexpr double kLog2e = 1.4426950408889634;
    constexpr double kLn2Hi = 6.93147180369123816490e-01;
    constexpr double kLn2Lo = 1.90821492927058770002e-10;
    constexpr double kShifter = 6755399441055744.0; // 1.5 * 2^52
    constexpr double kMin = -708.0;

    const double xc = std::max(x, kMin);
    const double kd = xc * kLog2e + kShifter;
    const double k = kd - kShifter;
    const double r = (xc - k * kLn2Hi) - k * kLn2Lo;

    double p = 1.0 / 6227020800.0;
    p = p * r + 1.0 / 479001600.0;
    p = p * r + 1.0 / 39916800.0;
    p = p * r + 1.0 / 3628800.0;
    p = p * r + 1.0 / 362880.0;
    p = p * r + 1.0 / 40320.0;
    p = p * r + 1.0 / 5040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;

    // Low mantissa bits of kd hold k in two's complement; shifting them into the
    // exponent field and adding the bias yields 2^k.
    const std::uint64_t keep = std::uint64_t{0} - static_cast<std::uint64_t>(x >= kMin);
    const std::uint64_t bits = ((std::bit_cast<std::uint64_t>(kd) << 52) + (std::uint64_t{1023} << 52)) & keep;
    return p * std::bit_cast<double>(bits);
}

/// out[i] = exp(in[i] - shift), requires in[i] <= shift.
inline void exp_shifted(const double* in, double shift, double* out, std::size_t n) noexcept {
    for (std::size_t i = 0; i < n; ++i) out[i] = exp_nonpositive(in[i] - shift);
}

} // namespace dsbs::detail
