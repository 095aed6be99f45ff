#include <doctest.h>

#include <cmath>
#include <vector>

#include "dsbs/rng.hpp"

using dsbs::RandomStream;

TEST_CASE("philox4x32-10 known-answer vectors") {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(dsbs::philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(dsbs::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(dsbs::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
    RandomStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        CHECK(x != c.next_u64());
        CHECK(x != d.next_u64());
    }
}

TEST_CASE("uniform stays inside the open unit interval") {
    RandomStream rng(1, 0);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
}

TEST_CASE("normal variates have unit moments") {
    RandomStream rng(2024, 3);
    const int n = 200000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s1 += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    // Standard errors: mean 1/sqrt(n), second moment sqrt(2/n), fourth moment sqrt(96/n).
    CHECK(std::abs(s1 / n) < 5.0 / std::sqrt(n));
    CHECK(std::abs(s2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(s4 / n - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("below is unbiased over a small range") {
    RandomStream rng(9, 0);
    std::vector<int> counts(8, 0);
    const int n = 80000;
    for (int i = 0; i < n; ++i) ++counts[rng.below(8)];
    for (int c : counts) CHECK(std::abs(c - n / 8) < 5 * std::sqrt(n / 8.0));
}

TEST_CASE("mix_seed separates tags") {
    CHECK(dsbs::mix_seed(0, 0) != dsbs::mix_seed(0, 1));
    CHECK(dsbs::mix_seed(1, 0) != dsbs::mix_seed(0, 0));
    CHECK(dsbs::mix_seed(5, 5) == dsbs::mix_seed(5, 5));
}
