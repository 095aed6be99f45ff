#include "dsbs/sde.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "dsbs/errors.hpp"

namespace dsbs {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void check_time(double t, const char* what) {
    if (!(t >= 0.0 && t <= 1.0)) {
        std::ostringstream os;
        os << what << ": time " << t << " outside [0, 1]";
        throw InvalidArgument(os.str());
    }
}

void check_dim(const ReferenceSde& sde, std::size_t got, const char* what) {
    if (got != sde.dim()) {
        std::ostringstream os;
        os << what << ": expected dimension " << sde.dim() << ", got " << got;
        throw InvalidArgument(os.str());
    }
}

void check_tau(double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("tau must be a positive finite real");
}

void check_smld(double sigma_min, double sigma_max) {
    if (!(sigma_min > 0.0 && sigma_max > sigma_min && std::isfinite(sigma_max)))
        throw InvalidArgument("SMLD schedule requires sigma_max > sigma_min > 0");
}

void check_ddpm(double beta_min, double beta_max) {
    if (!(beta_min > 0.0 && beta_max >= beta_min && std::isfinite(beta_max)))
        throw InvalidArgument("DDPM schedule requires beta_max >= beta_min > 0");
}

// A(t) - A(s) for the beta schedules, written to stay accurate for t close to s.
double beta_integral_impl(const Schedule& schedule, double s, double t) {
    return std::visit(
        overloaded{
            [&](const ExpDecayBeta& b) { return -std::exp(-b.tau * s) * std::expm1(-b.tau * (t - s)); },
            [&](const LinearDdpmBeta& b) {
                return (t - s) * (b.beta_min + 0.5 * (b.beta_max - b.beta_min) * (t + s));
            },
            [](const auto&) -> double { throw InvalidArgument("beta_integral requires a VP or SubVP schedule"); },
        },
        schedule);
}

} // namespace

bool is_alpha_schedule(const Schedule& schedule) noexcept {
    return std::holds_alternative<LinearAlpha>(schedule) || std::holds_alternative<GeometricSmld>(schedule);
}

void validate_schedule(const Schedule& schedule) {
    std::visit(overloaded{
                   [](const LinearAlpha&) {},
                   [](const GeometricSmld& g) { check_smld(g.sigma_min, g.sigma_max); },
                   [](const ExpDecayBeta& b) { check_tau(b.tau); },
                   [](const LinearDdpmBeta& b) { check_ddpm(b.beta_min, b.beta_max); },
               },
               schedule);
}

std::string to_string(Family family) {
    switch (family) {
    case Family::VE: return "ve";
    case Family::VP: return "vp";
    case Family::SubVP: return "subvp";
    }
    return "?";
}

ReferenceSde::ReferenceSde(Family family, Schedule schedule, std::size_t dim, bool subvp_exact_variance)
    : family_(family), schedule_(schedule), dim_(dim), subvp_exact_variance_(subvp_exact_variance) {
    if (dim == 0) throw InvalidArgument("ReferenceSde: dimension must be positive");
    validate_schedule(schedule_);
    const bool alpha = is_alpha_schedule(schedule_);
    if ((family_ == Family::VE) != alpha)
        throw InvalidArgument("ReferenceSde: VE requires an alpha schedule, VP/SubVP a beta schedule");
}

ReferenceSde ReferenceSde::ve(std::size_t dim, Schedule schedule) {
    return ReferenceSde(Family::VE, schedule, dim);
}

ReferenceSde ReferenceSde::vp(std::size_t dim, Schedule schedule) {
    return ReferenceSde(Family::VP, schedule, dim);
}

ReferenceSde ReferenceSde::subvp(std::size_t dim, Schedule schedule, bool exact_variance) {
    return ReferenceSde(Family::SubVP, schedule, dim, exact_variance);
}

double ReferenceSde::alpha(double t) const {
    return std::visit(overloaded{
                          [&](const LinearAlpha&) { return t; },
                          [&](const GeometricSmld& g) {
                              const double ratio = g.sigma_max / g.sigma_min;
                              return g.sigma_min * g.sigma_min * std::pow(ratio, 2.0 * t);
                          },
                          [](const auto&) -> double { throw InvalidArgument("alpha(t) requires a VE schedule"); },
                      },
                      schedule_);
}

double ReferenceSde::alpha_rate(double t) const {
    return std::visit(overloaded{
                          [](const LinearAlpha&) { return 1.0; },
                          [&](const GeometricSmld& g) {
                              const double ratio = g.sigma_max / g.sigma_min;
                              return 2.0 * std::log(ratio) * g.sigma_min * g.sigma_min * std::pow(ratio, 2.0 * t);
                          },
                          [](const auto&) -> double { throw InvalidArgument("alpha'(t) requires a VE schedule"); },
                      },
                      schedule_);
}

double ReferenceSde::beta(double t) const {
    return std::visit(overloaded{
                          [&](const ExpDecayBeta& b) { return b.tau * std::exp(-b.tau * t); },
                          [&](const LinearDdpmBeta& b) { return b.beta_min + t * (b.beta_max - b.beta_min); },
                          [](const auto&) -> double { throw InvalidArgument("beta(t) requires a VP schedule"); },
                      },
                      schedule_);
}

void base_drift(const ReferenceSde& sde, std::span<const double> x, double t, std::span<double> out) {
    check_dim(sde, x.size(), "base_drift");
    check_dim(sde, out.size(), "base_drift output");
    check_time(t, "base_drift");
    if (sde.family() == Family::VE) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    const double scale = -0.5 * sde.beta(t);
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = scale * x[k];
}

std::vector<double> base_drift(const ReferenceSde& sde, std::span<const double> x, double t) {
    std::vector<double> out(sde.dim());
    base_drift(sde, x, t, out);
    return out;
}

double diffusion_coeff(const ReferenceSde& sde, double t) {
    check_time(t, "diffusion_coeff");
    switch (sde.family()) {
    case Family::VE: return std::sqrt(sde.alpha_rate(t));
    case Family::VP: return std::sqrt(sde.beta(t));
    case Family::SubVP: {
        const double a = beta_integral_impl(sde.schedule(), 0.0, t);
        return std::sqrt(sde.beta(t) * -std::expm1(-2.0 * a));
    }
    }
    return 0.0;
}

double beta_integral(const ReferenceSde& sde, double s, double t) {
    check_time(s, "beta_integral");
    check_time(t, "beta_integral");
    if (s > t) throw InvalidArgument("beta_integral: s must not exceed t");
    if (sde.family() == Family::VE) throw InvalidArgument("beta_integral: VE has no beta schedule");
    return beta_integral_impl(sde.schedule(), s, t);
}

KernelParams transition_params(const ReferenceSde& sde, double s, double t) {
    check_time(s, "transition_params");
    check_time(t, "transition_params");
    if (s > t) throw InvalidArgument("transition_params: s must not exceed t");
    if (s == t) return {1.0, 0.0};

    if (sde.family() == Family::VE) {
        const double variance = std::visit(
            overloaded{
                [&](const LinearAlpha&) { return t - s; },
                [&](const GeometricSmld& g) {
                    const double log_ratio = std::log(g.sigma_max / g.sigma_min);
                    return sde.alpha(s) * std::expm1(2.0 * log_ratio * (t - s));
                },
                [](const auto&) -> double { return 0.0; },
            },
            sde.schedule());
        return {1.0, variance};
    }

    const double b = beta_integral_impl(sde.schedule(), s, t);
    const double mean_scale = std::exp(-0.5 * b);
    const double one_minus = -std::expm1(-b);
    if (sde.family() == Family::VP) return {mean_scale, one_minus};

    if (sde.subvp_exact_variance()) {
        // 1 + e^{-2A(t)} - e^{-(A(t)-A(s))} - e^{-(A(t)+A(s))}, factored.
        const double a_s = beta_integral_impl(sde.schedule(), 0.0, s);
        const double a_t = a_s + b;
        return {mean_scale, one_minus * -std::expm1(-(a_t + a_s))};
    }
    return {mean_scale, one_minus * one_minus};
}

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw InvalidArgument("TimeGrid: need at least two nodes");
    if (nodes_.front() != 0.0 || nodes_.back() != 1.0)
        throw InvalidArgument("TimeGrid: first node must be 0 and last node must be 1");
    for (std::size_t j = 0; j + 1 < nodes_.size(); ++j) {
        if (!(nodes_[j + 1] > nodes_[j])) throw InvalidArgument("TimeGrid: nodes must be strictly increasing");
    }
}

TimeGrid TimeGrid::uniform(std::size_t steps) {
    if (steps == 0) throw InvalidArgument("TimeGrid: need at least one step");
    std::vector<double> nodes(steps + 1);
    for (std::size_t j = 0; j <= steps; ++j) nodes[j] = static_cast<double>(j) / static_cast<double>(steps);
    nodes.back() = 1.0;
    return TimeGrid(std::move(nodes));
}

double sigma_profile(const SigmaScheme& s, double t) {
    check_time(t, "sigma_profile");
    return std::visit(overloaded{
                          [](const scheme::VeDsbs&) { return 1.0; },
                          [&](const scheme::VpDsbs& v) {
                              check_tau(v.tau);
                              return std::sqrt(v.tau * std::exp(-v.tau * t));
                          },
                          [&](const scheme::SubVpDsbs& v) {
                              check_tau(v.tau);
                              return diffusion_coeff(ReferenceSde::subvp(1, ExpDecayBeta{v.tau}), t);
                          },
                          [&](const scheme::Smld& v) {
                              check_smld(v.sigma_min, v.sigma_max);
                              const double ratio = v.sigma_max / v.sigma_min;
                              return v.sigma_min * std::pow(ratio, t) * std::sqrt(2.0 * std::log(ratio));
                          },
                          [&](const scheme::Ddpm& v) {
                              check_ddpm(v.beta_min, v.beta_max);
                              return std::sqrt(v.beta_min + t * (v.beta_max - v.beta_min));
                          },
                      },
                      s);
}

namespace {

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

double parse_number(const std::string& text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw InvalidArgument("cannot parse number '" + text + "'");
    return v;
}

} // namespace

std::string scheme_name(const SigmaScheme& s) {
    return std::visit(overloaded{
                          [](const scheme::VeDsbs&) { return std::string("VE-DSBS"); },
                          [](const scheme::VpDsbs& v) { return "VP-DSBS-" + format_number(v.tau); },
                          [](const scheme::SubVpDsbs& v) { return "subVP-DSBS-" + format_number(v.tau); },
                          [](const scheme::Smld&) { return std::string("SMLD"); },
                          [](const scheme::Ddpm&) { return std::string("DDPM"); },
                      },
                      s);
}

SigmaScheme parse_scheme(const std::string& text) {
    std::vector<std::string> parts;
    std::string token;
    std::istringstream is(text);
    while (std::getline(is, token, ':')) parts.push_back(token);
    if (parts.empty()) throw InvalidArgument("empty scheme");
    const std::string& kind = parts[0];
    auto arg = [&](std::size_t i, double fallback) { return i < parts.size() ? parse_number(parts[i]) : fallback; };

    SigmaScheme out;
    if (kind == "ve") {
        out = scheme::VeDsbs{};
    } else if (kind == "vp") {
        out = scheme::VpDsbs{arg(1, 1.0)};
    } else if (kind == "subvp") {
        out = scheme::SubVpDsbs{arg(1, 1.0)};
    } else if (kind == "smld") {
        out = scheme::Smld{arg(1, 0.01), arg(2, 50.0)};
    } else if (kind == "ddpm") {
        out = scheme::Ddpm{arg(1, 0.1), arg(2, 20.0)};
    } else {
        throw InvalidArgument("unknown scheme '" + kind + "'");
    }
    sigma_profile(out, 0.0); // validates constants
    return out;
}

} // namespace dsbs
