#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsbs/dataset.hpp"
#include "dsbs/datasets.hpp"
#include "dsbs/report.hpp"
#include "dsbs/sde.hpp"

namespace dsbs {

/// Reference SDE selection as exposed on the command line: VE uses alpha(t) = t,
/// VP / SubVP use beta(t) = tau exp(-tau t).
struct SdeChoice {
    Family family = Family::VE;
    double tau = 1.0;
    bool subvp_exact_variance = false;

    ReferenceSde build(std::size_t dim) const;
    /// "VE-DSBS", "VP-DSBS-10", ...
    std::string label() const;
    nlohmann::json to_json() const;
};

/// Parses "ve", "vp" or "subvp".
Family parse_family(const std::string& text);

struct EvalProtocol {
    enum class Kind { Exact, Entropic, Subsampled };
    Kind kind = Kind::Subsampled;
    std::size_t subsample = 2000;
    std::size_t repetitions = 5;
    /// Entropic regularization; <= 0 means 0.01 x median squared distance.
    double epsilon = 0.0;
    std::size_t max_iter = 20000;
    double tol = 1e-6;
    std::uint64_t seed = 0;
    /// Cap on the number of points per cloud used for the energy distance.
    std::size_t energy_points = 2000;

    /// Human-readable form recorded in reports, e.g. "exact-subsample 2000x5".
    std::string describe() const;
};

/// Parses "<m>x<r>" (e.g. "2000x5") into subsample size and repetitions.
EvalProtocol parse_subsample_protocol(const std::string& text);

/// W2 under the protocol plus auxiliary energy distance and, when centres are
/// supplied, per-mode coverage of the generated cloud.
MetricReport evaluate(const Dataset& generated, const Dataset& test, const EvalProtocol& protocol,
                      const Dataset* centers = nullptr);

enum class Benchmark { Moons, EightGaussians };
Benchmark parse_benchmark(const std::string& text);
std::string to_string(Benchmark b);

struct ReplicateConfig {
    Benchmark benchmark = Benchmark::EightGaussians;
    SdeChoice sde;
    std::size_t reps = 10;
    std::size_t n_train = 10000;
    std::size_t n_test = 10000;
    std::size_t particles = 10000;
    std::size_t steps = 100;
    std::uint64_t seed = 0;
    std::size_t workers = 0;
    EvalProtocol protocol;
    dataset_kind::Moons moons;
    dataset_kind::EightGaussians eight;

    nlohmann::json to_json() const;
};

struct RepetitionResult {
    std::size_t index = 0;
    std::uint64_t train_seed = 0;
    std::uint64_t test_seed = 0;
    std::uint64_t sample_seed = 0;
    std::uint64_t eval_seed = 0;
    MetricReport report;
    double sample_seconds = 0.0;
};

struct ReplicateResult {
    ReplicateConfig config;
    std::vector<RepetitionResult> repetitions;
    double mean = 0.0;
    double sd = 0.0; // sample standard deviation; 0 for a single repetition
    std::vector<std::string> warnings;
    double wallclock = 0.0;

    nlohmann::json to_json() const;
    /// "benchmark,sde,mean,sd,reps" row matching the layout of the comparison table.
    std::string table_row() const;
};

/// Seeds of repetition `rep`, derived from the base seed.
RepetitionResult repetition_seeds(std::uint64_t base_seed, std::size_t rep);

/// For each repetition: fresh train/test sets, one sampling run, one evaluation.
ReplicateResult replicate(const ReplicateConfig& config,
                          const std::function<void(const RepetitionResult&)>& progress = {});

/// Library version string recorded in manifests.
std::string version();

} // namespace dsbs
