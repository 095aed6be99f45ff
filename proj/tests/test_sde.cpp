#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dsbs/errors.hpp"
#include "dsbs/rng.hpp"
#include "dsbs/sde.hpp"

using namespace dsbs;

namespace {

bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

// Sorted random triple 0 <= s <= t <= u <= 1.
std::array<double, 3> random_triple(RandomStream& rng) {
    std::array<double, 3> v{rng.uniform(), rng.uniform(), rng.uniform()};
    std::sort(v.begin(), v.end());
    return v;
}

} // namespace

TEST_CASE("base_drift") {
    const auto vp = ReferenceSde::vp(2, ExpDecayBeta{1.0});
    const auto ve = ReferenceSde::ve(2);
    const std::vector<double> zero{0, 0};
    CHECK(base_drift(vp, zero, 0.3) == std::vector<double>{0, 0});
    CHECK(base_drift(ve, std::vector<double>{5, -2}, 0.7) == std::vector<double>{0, 0});
    CHECK(base_drift(vp, std::vector<double>{2, 0}, 0.0) == std::vector<double>{-1, 0});
    CHECK_THROWS_AS(base_drift(vp, std::vector<double>{1, 2, 3}, 0.1), InvalidArgument);
    CHECK_THROWS_AS(base_drift(vp, zero, 1.5), InvalidArgument);
}

TEST_CASE("diffusion_coeff") {
    CHECK(diffusion_coeff(ReferenceSde::ve(1), 0.5) == 1.0);
    CHECK(diffusion_coeff(ReferenceSde::vp(1, ExpDecayBeta{1.0}), 0.0) == 1.0);
    CHECK(diffusion_coeff(ReferenceSde::subvp(1, ExpDecayBeta{1.0}), 0.0) == 0.0);
    // SMLD-style VE: sqrt(alpha'(t)) with alpha = s_min^2 r^{2t}.
    const auto smld = ReferenceSde::ve(1, GeometricSmld{0.01, 50.0});
    const double expected = sigma_profile(scheme::Smld{0.01, 50.0}, 0.4);
    CHECK(rel_close(diffusion_coeff(smld, 0.4), expected, 1e-14));
}

TEST_CASE("beta_integral closed forms") {
    const auto vp1 = ReferenceSde::vp(1, ExpDecayBeta{1.0});
    const auto vp10 = ReferenceSde::vp(1, ExpDecayBeta{10.0});
    CHECK(beta_integral(vp1, 0.0, 1.0) == doctest::Approx(0.632120558828557678).epsilon(1e-15));
    CHECK(beta_integral(vp10, 0.0, 1.0) == doctest::Approx(0.999954600070237515).epsilon(1e-15));
    CHECK(beta_integral(vp1, 0.4, 0.4) == 0.0);
    const auto ddpm = ReferenceSde::vp(1, LinearDdpmBeta{0.1, 20.0});
    CHECK(beta_integral(ddpm, 0.0, 1.0) == doctest::Approx(0.1 + 0.5 * 19.9).epsilon(1e-15));
    CHECK_THROWS_AS(beta_integral(vp1, 0.6, 0.5), InvalidArgument);
    CHECK_THROWS_AS(beta_integral(ReferenceSde::ve(1), 0.0, 0.5), InvalidArgument);
}

TEST_CASE("beta_integral is additive") {
    RandomStream rng(11, 0);
    for (const Schedule sched : {Schedule{ExpDecayBeta{1.0}}, Schedule{ExpDecayBeta{10.0}},
                                 Schedule{LinearDdpmBeta{0.1, 20.0}}}) {
        const auto sde = ReferenceSde::vp(1, sched);
        for (int i = 0; i < 1000; ++i) {
            const auto [s, t, u] = random_triple(rng);
            const double whole = beta_integral(sde, s, u);
            const double parts = beta_integral(sde, s, t) + beta_integral(sde, t, u);
            CHECK(std::abs(whole - parts) <= 1e-14 * std::max(whole, 1e-300) + 1e-300);
        }
    }
}

TEST_CASE("transition_params examples") {
    const auto ve = ReferenceSde::ve(1);
    auto k = transition_params(ve, 0.0, 0.25);
    CHECK(k.mean_scale == 1.0);
    CHECK(k.variance == 0.25);

    const auto vp = ReferenceSde::vp(1, ExpDecayBeta{1.0});
    k = transition_params(vp, 0.0, 1.0);
    CHECK(k.mean_scale == doctest::Approx(0.729015504215524673).epsilon(1e-14));
    CHECK(k.variance == doctest::Approx(0.468536394613384327).epsilon(1e-14));

    for (const auto& sde : {ve, vp, ReferenceSde::subvp(1), ReferenceSde::subvp(1, ExpDecayBeta{1.0}, true)}) {
        k = transition_params(sde, 0.4, 0.4);
        CHECK(k.mean_scale == 1.0);
        CHECK(k.variance == 0.0);
        CHECK(transition_params(sde, 0.2, 0.7).variance > 0.0);
        CHECK_THROWS_AS(transition_params(sde, 0.7, 0.2), InvalidArgument);
    }
}

TEST_CASE("sub-VP kernel variants") {
    const auto paper = ReferenceSde::subvp(1, ExpDecayBeta{1.0});
    const auto exact = ReferenceSde::subvp(1, ExpDecayBeta{1.0}, true);
    // From s = 0 the two variances coincide: (1-e^{-A})^2 = 1 + e^{-2A} - 2 e^{-A}.
    for (double t : {0.1, 0.5, 1.0}) {
        CHECK(rel_close(transition_params(paper, 0.0, t).variance, transition_params(exact, 0.0, t).variance, 1e-13));
    }
    // Exact conditional variance written out term by term.
    const double s = 0.3, t = 0.8;
    const double as = beta_integral(exact, 0.0, s), at = beta_integral(exact, 0.0, t);
    const double expected = 1.0 + std::exp(-2 * at) - std::exp(-(at - as)) - std::exp(-(at + as));
    CHECK(rel_close(transition_params(exact, s, t).variance, expected, 1e-12));
    CHECK(!rel_close(transition_params(paper, s, t).variance, expected, 1e-3));
}

TEST_CASE("VE kernel composes additively") {
    RandomStream rng(1, 0);
    for (const auto& sde : {ReferenceSde::ve(1), ReferenceSde::ve(1, GeometricSmld{0.01, 50.0})}) {
        for (int i = 0; i < 1000; ++i) {
            const auto [s, t, u] = random_triple(rng);
            const auto su = transition_params(sde, s, u);
            const auto st = transition_params(sde, s, t);
            const auto tu = transition_params(sde, t, u);
            CHECK(su.mean_scale == 1.0);
            CHECK(std::abs(su.variance - (st.variance + tu.variance)) <= 1e-12 * su.variance + 1e-300);
        }
    }
}

TEST_CASE("VP and exact sub-VP kernels compose") {
    RandomStream rng(2, 0);
    for (const auto& sde : {ReferenceSde::vp(1, ExpDecayBeta{1.0}), ReferenceSde::vp(1, ExpDecayBeta{10.0}),
                            ReferenceSde::vp(1, LinearDdpmBeta{0.1, 20.0}),
                            ReferenceSde::subvp(1, ExpDecayBeta{1.0}, true)}) {
        for (int i = 0; i < 1000; ++i) {
            const auto [s, t, u] = random_triple(rng);
            const auto su = transition_params(sde, s, u);
            const auto st = transition_params(sde, s, t);
            const auto tu = transition_params(sde, t, u);
            const double m = st.mean_scale * tu.mean_scale;
            const double v = tu.mean_scale * tu.mean_scale * st.variance + tu.variance;
            CHECK(std::abs(su.mean_scale - m) <= 1e-12 * su.mean_scale);
            CHECK(std::abs(su.variance - v) <= 1e-12 * su.variance + 1e-300);
        }
    }
}

TEST_CASE("printed sub-VP kernel does not compose") {
    const auto sde = ReferenceSde::subvp(1, ExpDecayBeta{1.0});
    const auto su = transition_params(sde, 0.1, 0.9);
    const auto st = transition_params(sde, 0.1, 0.5);
    const auto tu = transition_params(sde, 0.5, 0.9);
    const double v = tu.mean_scale * tu.mean_scale * st.variance + tu.variance;
    CHECK(std::abs(su.variance - v) > 1e-3 * su.variance);
}

TEST_CASE("sigma_profile values") {
    CHECK(sigma_profile(scheme::VeDsbs{}, 0.0) == 1.0);
    CHECK(sigma_profile(scheme::VeDsbs{}, 0.77) == 1.0);
    CHECK(sigma_profile(scheme::Ddpm{0.1, 20.0}, 1.0) == doctest::Approx(4.47213595499957939).epsilon(1e-15));
    CHECK(sigma_profile(scheme::VpDsbs{10.0}, 1.0) == doctest::Approx(0.0213072592706065440).epsilon(1e-14));
    CHECK_THROWS_AS(sigma_profile(scheme::Smld{1.0, 0.5}, 0.5), InvalidArgument);
    CHECK_THROWS_AS(sigma_profile(scheme::Ddpm{0.0, 20.0}, 0.5), InvalidArgument);
    CHECK_THROWS_AS(sigma_profile(scheme::VpDsbs{-1.0}, 0.5), InvalidArgument);
}

TEST_CASE("sigma_profile monotonicity") {
    auto values = [](const SigmaScheme& s) {
        std::vector<double> v;
        for (int j = 0; j <= 200; ++j) v.push_back(sigma_profile(s, j / 200.0));
        return v;
    };
    auto strictly_increasing = [](const std::vector<double>& v) {
        return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
    };
    auto strictly_decreasing = [](const std::vector<double>& v) {
        return std::adjacent_find(v.begin(), v.end(), std::less_equal<>()) == v.end();
    };
    CHECK(strictly_increasing(values(scheme::Smld{})));
    CHECK(strictly_increasing(values(scheme::Ddpm{})));
    CHECK(strictly_decreasing(values(scheme::VpDsbs{1.0})));
    CHECK(strictly_decreasing(values(scheme::VpDsbs{10.0})));
    const auto ve = values(scheme::VeDsbs{});
    CHECK(std::all_of(ve.begin(), ve.end(), [](double x) { return x == 1.0; }));
}

TEST_CASE("scheme parsing and names") {
    CHECK(scheme_name(parse_scheme("vp:10")) == "VP-DSBS-10");
    CHECK(scheme_name(parse_scheme("ve")) == "VE-DSBS");
    CHECK(scheme_name(parse_scheme("ddpm")) == "DDPM");
    CHECK(std::get<scheme::Smld>(parse_scheme("smld:0.02:30")).sigma_max == 30.0);
    CHECK_THROWS_AS(parse_scheme("bogus"), InvalidArgument);
    CHECK_THROWS_AS(parse_scheme("vp:abc"), InvalidArgument);
}

TEST_CASE("schedule invariants are enforced") {
    CHECK_THROWS_AS(ReferenceSde::ve(2, ExpDecayBeta{1.0}), InvalidArgument);
    CHECK_THROWS_AS(ReferenceSde::vp(2, LinearAlpha{}), InvalidArgument);
    CHECK_THROWS_AS(ReferenceSde::ve(2, GeometricSmld{0.5, 0.5}), InvalidArgument);
    CHECK_THROWS_AS(ReferenceSde::vp(2, LinearDdpmBeta{2.0, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(ReferenceSde::vp(2, ExpDecayBeta{0.0}), InvalidArgument);
    CHECK_THROWS_AS(ReferenceSde::ve(0), InvalidArgument);
}

TEST_CASE("time grid") {
    const auto g = TimeGrid::uniform(100);
    CHECK(g.steps() == 100);
    CHECK(g.node(0) == 0.0);
    CHECK(g.node(100) == 1.0);
    for (std::size_t j = 0; j < g.steps(); ++j) CHECK(g.step(j) > 0.0);
    CHECK_NOTHROW(TimeGrid({0.0, 0.1, 0.5, 1.0}));
    CHECK_THROWS_AS(TimeGrid({0.0, 0.5, 0.5, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(TimeGrid({0.1, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(TimeGrid({0.0, 0.9}), InvalidArgument);
    CHECK_THROWS_AS(TimeGrid::uniform(0), InvalidArgument);
}
