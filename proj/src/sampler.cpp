#include "dsbs/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "dsbs/errors.hpp"
#include "dsbs/rng.hpp"

namespace dsbs {

void SamplerConfig::validate() const {
    if (particles == 0) throw InvalidArgument("SamplerConfig: particles must be at least 1");
    if (record_stride == 0) throw InvalidArgument("SamplerConfig: record_stride must be at least 1");
    for (double v : start)
        if (!std::isfinite(v)) throw InvalidArgument("SamplerConfig: start point must be finite");
}

namespace {

void check_start(const DriftEvaluator& ev, const SamplerConfig& cfg) {
    cfg.validate();
    if (cfg.start.empty()) return;
    const auto a = ev.start();
    if (!std::equal(cfg.start.begin(), cfg.start.end(), a.begin(), a.end()))
        throw InvalidArgument("SamplerConfig: start point differs from the drift evaluator's start point");
}

// Scratch buffers for integrating one particle.
struct ParticleState {
    explicit ParticleState(std::size_t d) : x(d), next(d), noise(d) {}
    std::vector<double> x, next, noise;
};

// Runs particle `p`; writes the terminal state into `terminal` and, if `path` is
// non-null, records strided states into it.
void integrate(const DriftEvaluator& ev, const SamplerConfig& cfg, std::size_t p, std::span<double> terminal,
               Trajectory* path) {
    const std::size_t d = ev.dim();
    const std::size_t steps = cfg.grid.steps();
    ParticleState s(d);
    const auto a = ev.start();
    std::copy(a.begin(), a.end(), s.x.begin());
    RandomStream rng(cfg.seed, p);

    if (path) {
        path->dim = d;
        path->times.assign(1, cfg.grid.node(0));
        path->states.assign(s.x.begin(), s.x.end());
    }

    for (std::size_t j = 0; j < steps; ++j) {
        rng.fill_normal(s.noise);
        try {
            em_step(ev, s.x, cfg.grid.node(j), cfg.grid.step(j), s.noise, s.next);
        } catch (const NumericFailure& e) {
            std::ostringstream os;
            os << "particle " << p << " diverged at step " << j << " (t = " << cfg.grid.node(j) << "): " << e.what();
            throw NumericFailure(os.str(), p, j);
        }
        std::swap(s.x, s.next);
        if (path && ((j + 1) % cfg.record_stride == 0 || j + 1 == steps)) {
            path->times.push_back(cfg.grid.node(j + 1));
            path->states.insert(path->states.end(), s.x.begin(), s.x.end());
        }
    }
    std::copy(s.x.begin(), s.x.end(), terminal.begin());
}

} // namespace

void em_step(const DriftEvaluator& ev, std::span<const double> x, double t, double step,
             std::span<const double> noise, std::span<double> out) {
    const std::size_t d = ev.dim();
    if (x.size() != d || noise.size() != d || out.size() != d)
        throw InvalidArgument("em_step: state, noise and output must match the SDE dimension");
    if (!(step > 0.0) || t + step > 1.0 + 1e-12)
        throw InvalidArgument("em_step: step must be positive and must not pass t = 1");

    std::vector<double> drift(d);
    ev.empirical_drift(x, t, drift);
    base_drift(ev.sde(), x, t, out);
    const double noise_scale = diffusion_coeff(ev.sde(), t) * std::sqrt(step);
    bool finite = true;
    for (std::size_t k = 0; k < d; ++k) {
        out[k] = x[k] + step * (out[k] + drift[k]) + noise_scale * noise[k];
        finite = finite && std::isfinite(out[k]);
    }
    if (!finite) throw NumericFailure("non-finite state after Euler-Maruyama step");
}

std::vector<double> em_step(const DriftEvaluator& ev, std::span<const double> x, double t, double step,
                            std::span<const double> noise) {
    std::vector<double> out(ev.dim());
    em_step(ev, x, t, step, noise, out);
    return out;
}

Trajectory sample_path(const DriftEvaluator& ev, const SamplerConfig& cfg, std::size_t particle_index) {
    check_start(ev, cfg);
    if (particle_index >= cfg.particles) throw InvalidArgument("sample_path: particle index out of range");
    Trajectory path;
    std::vector<double> terminal(ev.dim());
    integrate(ev, cfg, particle_index, terminal, &path);
    return path;
}

SampleBatch sample_batch(const DriftEvaluator& ev, const SamplerConfig& cfg) {
    check_start(ev, cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t d = ev.dim();
    const std::size_t count = cfg.particles;
    std::vector<double> terminal(count * d);
    std::vector<Trajectory> paths(cfg.record_trajectories ? count : 0);

    std::size_t workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, count);

    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::vector<NumericFailure> failures;
    std::exception_ptr other_error;

    auto work = [&] {
        for (std::size_t p = next.fetch_add(1); p < count; p = next.fetch_add(1)) {
            try {
                integrate(ev, cfg, p, std::span<double>(terminal.data() + p * d, d),
                          cfg.record_trajectories ? &paths[p] : nullptr);
            } catch (const NumericFailure& e) {
                std::lock_guard lock(failure_mutex);
                failures.push_back(e);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!other_error) other_error = std::current_exception();
                next.store(count);
            }
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    if (other_error) std::rethrow_exception(other_error);
    if (!failures.empty()) {
        const auto first = std::min_element(failures.begin(), failures.end(),
                                            [](const auto& a, const auto& b) { return a.particle() < b.particle(); });
        std::ostringstream os;
        os << failures.size() << " of " << count << " particles failed; first: " << first->what();
        throw NumericFailure(os.str(), first->particle(), first->step());
    }

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return SampleBatch{Dataset(count, d, std::move(terminal)), cfg, seconds, std::move(paths)};
}

} // namespace dsbs
