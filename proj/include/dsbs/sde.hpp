#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace dsbs {

// ---------------------------------------------------------------------------
// Noise schedules
// ---------------------------------------------------------------------------

/// VE schedule alpha(t) = t (standard Brownian motion).
struct LinearAlpha {};

/// VE schedule alpha(t) = sigma_min^2 (sigma_max / sigma_min)^(2t), as in SMLD.
struct GeometricSmld {
    double sigma_min = 0.01;
    double sigma_max = 50.0;
};

/// VP schedule beta(t) = tau * exp(-tau t).
struct ExpDecayBeta {
    double tau = 1.0;
};

/// VP schedule beta(t) = beta_min + t (beta_max - beta_min), as in DDPM.
struct LinearDdpmBeta {
    double beta_min = 0.1;
    double beta_max = 20.0;
};

using Schedule = std::variant<LinearAlpha, GeometricSmld, ExpDecayBeta, LinearDdpmBeta>;

/// True for the alpha(t) schedules that drive the VE family.
bool is_alpha_schedule(const Schedule& schedule) noexcept;

/// Throws InvalidArgument when the schedule constants violate their invariants.
void validate_schedule(const Schedule& schedule);

// ---------------------------------------------------------------------------
// Reference SDE
// ---------------------------------------------------------------------------

enum class Family { VE, VP, SubVP };

std::string to_string(Family family);

/// One of the three linear reference diffusions dx = b(x,t) dt + sigma(t) dw on [0, 1].
///
/// VE pairs with an alpha schedule, VP and SubVP with a beta schedule. For SubVP the
/// closed-form kernel defaults to the variance (1 - e^{-B})^2; setting
/// `subvp_exact_variance` switches to the conditional variance of the linear SDE,
/// which is the one that composes over intermediate times.
class ReferenceSde {
public:
    ReferenceSde(Family family, Schedule schedule, std::size_t dim, bool subvp_exact_variance = false);

    static ReferenceSde ve(std::size_t dim, Schedule schedule = LinearAlpha{});
    static ReferenceSde vp(std::size_t dim, Schedule schedule = ExpDecayBeta{});
    static ReferenceSde subvp(std::size_t dim, Schedule schedule = ExpDecayBeta{}, bool exact_variance = false);

    Family family() const noexcept { return family_; }
    const Schedule& schedule() const noexcept { return schedule_; }
    std::size_t dim() const noexcept { return dim_; }
    bool subvp_exact_variance() const noexcept { return subvp_exact_variance_; }

    /// alpha(t) and alpha'(t); VE only.
    double alpha(double t) const;
    double alpha_rate(double t) const;
    /// beta(t); VP and SubVP only.
    double beta(double t) const;

private:
    Family family_;
    Schedule schedule_;
    std::size_t dim_;
    bool subvp_exact_variance_;
};

/// q(s, x_s, t, .) = Normal(mean_scale * x_s, variance * I_d).
struct KernelParams {
    double mean_scale = 1.0;
    double variance = 0.0;
};

/// Base drift b(x, t): zero for VE, -beta(t) x / 2 for VP and SubVP.
void base_drift(const ReferenceSde& sde, std::span<const double> x, double t, std::span<double> out);
std::vector<double> base_drift(const ReferenceSde& sde, std::span<const double> x, double t);

/// Diffusion coefficient sigma(t) >= 0.
double diffusion_coeff(const ReferenceSde& sde, double t);

/// Closed-form integral of beta over [s, t]; VP and SubVP only.
double beta_integral(const ReferenceSde& sde, double s, double t);

/// Gaussian transition kernel from time s to time t (s <= t).
KernelParams transition_params(const ReferenceSde& sde, double s, double t);

/// Smallest variance ever used as a divisor.
inline constexpr double kVarianceFloor = 1e-300;

// ---------------------------------------------------------------------------
// Time grid
// ---------------------------------------------------------------------------

/// Strictly increasing nodes 0 = t_0 < ... < t_N = 1.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> nodes);

    /// t_j = j / N.
    static TimeGrid uniform(std::size_t steps);

    std::size_t steps() const noexcept { return nodes_.size() - 1; }
    double node(std::size_t j) const { return nodes_.at(j); }
    double step(std::size_t j) const { return nodes_.at(j + 1) - nodes_.at(j); }
    std::span<const double> nodes() const noexcept { return nodes_; }

private:
    std::vector<double> nodes_;
};

// ---------------------------------------------------------------------------
// Diffusion-coefficient profiles for schedule comparison
// ---------------------------------------------------------------------------

namespace scheme {
struct VeDsbs {};
struct VpDsbs { double tau = 1.0; };
struct SubVpDsbs { double tau = 1.0; };
struct Smld { double sigma_min = 0.01; double sigma_max = 50.0; };
struct Ddpm { double beta_min = 0.1; double beta_max = 20.0; };
} // namespace scheme

using SigmaScheme = std::variant<scheme::VeDsbs, scheme::VpDsbs, scheme::SubVpDsbs, scheme::Smld, scheme::Ddpm>;

/// sigma(t) of a sampling scheme, for profile plots only.
double sigma_profile(const SigmaScheme& s, double t);

/// Short label used in CSV output, e.g. "VP-DSBS-10".
std::string scheme_name(const SigmaScheme& s);

/// Parses "ve", "vp:<tau>", "subvp:<tau>", "smld[:min:max]", "ddpm[:min:max]".
SigmaScheme parse_scheme(const std::string& text);

} // namespace dsbs
