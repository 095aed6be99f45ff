#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dsbs/dataset.hpp"
#include "dsbs/drift.hpp"
#include "dsbs/sde.hpp"

namespace dsbs {

struct SamplerConfig {
    TimeGrid grid = TimeGrid::uniform(100);
    /// Start point a; empty means "use the evaluator's start point". If given it must
    /// equal the evaluator's start point.
    std::vector<double> start;
    std::size_t particles = 1;
    std::uint64_t seed = 0;
    bool record_trajectories = false;
    std::size_t record_stride = 1;
    /// Worker threads for sample_batch; 0 picks std::thread::hardware_concurrency().
    /// Results do not depend on this value.
    std::size_t workers = 0;

    void validate() const;
};

/// States of one particle at a subset of grid nodes. The first state is the start point.
struct Trajectory {
    std::size_t dim = 0;
    std::vector<double> times;
    std::vector<double> states; // times.size() x dim, row-major

    std::size_t size() const noexcept { return times.size(); }
    std::span<const double> state(std::size_t j) const noexcept { return {states.data() + j * dim, dim}; }
    std::span<const double> terminal() const noexcept { return state(size() - 1); }
};

struct SampleBatch {
    Dataset terminal;                     // particles x d
    SamplerConfig config_echo;
    double wallclock = 0.0;               // seconds
    std::vector<Trajectory> trajectories; // filled only when record_trajectories is set
};

/// One Euler-Maruyama step:
///     x + step * (b(x, t) + u(x, t)) + sigma(t) sqrt(step) noise.
/// Throws NumericFailure if the result is not finite.
void em_step(const DriftEvaluator& ev, std::span<const double> x, double t, double step,
             std::span<const double> noise, std::span<double> out);
std::vector<double> em_step(const DriftEvaluator& ev, std::span<const double> x, double t, double step,
                            std::span<const double> noise);

/// Integrates one particle over the whole grid with noise from the particle's own
/// stream (seed, particle_index). States are recorded every `record_stride` steps;
/// the start and terminal states are always recorded.
Trajectory sample_path(const DriftEvaluator& ev, const SamplerConfig& cfg, std::size_t particle_index);

/// All particles of `cfg`, spread over worker threads. Bitwise independent of the
/// worker count. Fails with NumericFailure if any particle fails.
SampleBatch sample_batch(const DriftEvaluator& ev, const SamplerConfig& cfg);

} // namespace dsbs
