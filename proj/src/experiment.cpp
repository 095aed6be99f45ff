#include "dsbs/experiment.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dsbs/drift.hpp"
#include "dsbs/errors.hpp"
#include "dsbs/metrics.hpp"
#include "dsbs/rng.hpp"
#include "dsbs/sampler.hpp"

namespace dsbs {

namespace {

std::string format_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

Dataset first_rows(const Dataset& ds, std::size_t count, std::uint64_t seed, std::uint64_t stream) {
    if (count >= ds.size()) return ds;
    std::vector<std::size_t> idx(ds.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    RandomStream rng(seed, stream);
    for (std::size_t i = 0; i < count; ++i) std::swap(idx[i], idx[i + rng.below(ds.size() - i)]);
    idx.resize(count);
    return ds.select(idx);
}

} // namespace

std::string version() {
    return DSBS_VERSION;
}

ReferenceSde SdeChoice::build(std::size_t dim) const {
    switch (family) {
    case Family::VE: return ReferenceSde::ve(dim, LinearAlpha{});
    case Family::VP: return ReferenceSde::vp(dim, ExpDecayBeta{tau});
    case Family::SubVP: return ReferenceSde::subvp(dim, ExpDecayBeta{tau}, subvp_exact_variance);
    }
    throw InvalidArgument("unknown SDE family");
}

std::string SdeChoice::label() const {
    switch (family) {
    case Family::VE: return "VE-DSBS";
    case Family::VP: return "VP-DSBS-" + format_number(tau);
    case Family::SubVP: return "subVP-DSBS-" + format_number(tau) + (subvp_exact_variance ? "-exact" : "");
    }
    return "?";
}

nlohmann::json SdeChoice::to_json() const {
    nlohmann::json j{{"family", to_string(family)}, {"label", label()}};
    if (family == Family::VE) {
        j["schedule"] = {{"kind", "linear-alpha"}};
    } else {
        j["schedule"] = {{"kind", "exp-decay-beta"}, {"tau", tau}};
    }
    if (family == Family::SubVP) j["subvp_exact_variance"] = subvp_exact_variance;
    return j;
}

Family parse_family(const std::string& text) {
    if (text == "ve") return Family::VE;
    if (text == "vp") return Family::VP;
    if (text == "subvp") return Family::SubVP;
    throw InvalidArgument("unknown SDE family '" + text + "' (expected ve, vp or subvp)");
}

std::string EvalProtocol::describe() const {
    std::ostringstream os;
    switch (kind) {
    case Kind::Exact: os << "exact"; break;
    case Kind::Entropic: os << "entropic " << (epsilon > 0.0 ? format_number(epsilon) : "0.01*median"); break;
    case Kind::Subsampled: os << "exact-subsample " << subsample << "x" << repetitions; break;
    }
    return os.str();
}

EvalProtocol parse_subsample_protocol(const std::string& text) {
    const auto x = text.find('x');
    EvalProtocol p;
    p.kind = EvalProtocol::Kind::Subsampled;
    try {
        if (x == std::string::npos) throw InvalidArgument("");
        std::size_t used = 0;
        p.subsample = std::stoul(text.substr(0, x), &used);
        if (used != x) throw InvalidArgument("");
        const std::string rest = text.substr(x + 1);
        p.repetitions = std::stoul(rest, &used);
        if (used != rest.size()) throw InvalidArgument("");
    } catch (const std::exception&) {
        throw InvalidArgument("malformed subsample protocol '" + text + "' (expected <m>x<r>, e.g. 2000x5)");
    }
    if (p.subsample == 0 || p.repetitions == 0) throw InvalidArgument("subsample protocol needs m, r >= 1");
    return p;
}

MetricReport evaluate(const Dataset& generated, const Dataset& test, const EvalProtocol& protocol,
                      const Dataset* centers) {
    MetricReport report;
    switch (protocol.kind) {
    case EvalProtocol::Kind::Exact:
        report.w2 = w2_exact(generated, test);
        report.method = method::Exact{};
        break;
    case EvalProtocol::Kind::Entropic: {
        const double eps = protocol.epsilon > 0.0 ? protocol.epsilon : 0.01 * median_squared_distance(generated, test);
        const auto r = w2_entropic(generated, test, eps, protocol.max_iter, protocol.tol);
        report.w2 = r.w2;
        report.method = method::Entropic{r.epsilon, r.iterations, r.converged};
        report.auxiliary["sinkhorn_marginal_error"] = r.marginal_error;
        break;
    }
    case EvalProtocol::Kind::Subsampled: {
        const auto r = w2_subsampled(generated, test, protocol.subsample, protocol.repetitions, protocol.seed);
        report.w2 = r.mean;
        report.method = method::Subsampled{r.subsample, r.repetitions};
        report.meta["w2_repetitions"] = r.values;
        break;
    }
    }

    const Dataset ga = first_rows(generated, protocol.energy_points, protocol.seed, 2);
    const Dataset tb = first_rows(test, protocol.energy_points, protocol.seed, 3);
    report.auxiliary["energy_distance"] = energy_distance(ga, tb);

    if (centers) {
        const auto cov = mode_coverage(generated, *centers);
        double lowest = 1.0;
        for (std::size_t k = 0; k < cov.size(); ++k) {
            report.auxiliary["mode_coverage_" + std::to_string(k)] = cov[k];
            lowest = std::min(lowest, cov[k]);
        }
        report.auxiliary["mode_coverage"] = lowest;
    }

    report.meta["protocol"] = protocol.describe();
    report.meta["eval_seed"] = protocol.seed;
    report.meta["generated_size"] = generated.size();
    report.meta["test_size"] = test.size();
    report.meta["energy_points"] = std::min({protocol.energy_points, generated.size(), test.size()});
    return report;
}

Benchmark parse_benchmark(const std::string& text) {
    if (text == "moons") return Benchmark::Moons;
    if (text == "eight-gaussians" || text == "8gaussians") return Benchmark::EightGaussians;
    throw InvalidArgument("unknown benchmark '" + text + "' (expected moons or eight-gaussians)");
}

std::string to_string(Benchmark b) {
    return b == Benchmark::Moons ? "moons" : "eight-gaussians";
}

nlohmann::json ReplicateConfig::to_json() const {
    nlohmann::json dataset;
    if (benchmark == Benchmark::Moons) {
        dataset = {{"kind", "moons"}, {"noise_std", moons.noise_std}};
    } else {
        dataset = {{"kind", "eight-gaussians"},
                   {"radius", eight.radius},
                   {"component_std", eight.component_std},
                   {"global_scale", eight.global_scale}};
    }
    return {{"benchmark", to_string(benchmark)},
            {"sde", sde.to_json()},
            {"reps", reps},
            {"n_train", n_train},
            {"n_test", n_test},
            {"particles", particles},
            {"steps", steps},
            {"grid", "uniform"},
            {"start", "origin"},
            {"seed", seed},
            {"dataset", dataset},
            {"protocol",
             {{"description", protocol.describe()},
              {"subsample", protocol.subsample},
              {"repetitions", protocol.repetitions},
              {"energy_points", protocol.energy_points}}}};
}

RepetitionResult repetition_seeds(std::uint64_t base_seed, std::size_t rep) {
    RepetitionResult r;
    r.index = rep;
    r.train_seed = mix_seed(base_seed, 4 * rep + 0);
    r.test_seed = mix_seed(base_seed, 4 * rep + 1);
    r.sample_seed = mix_seed(base_seed, 4 * rep + 2);
    r.eval_seed = mix_seed(base_seed, 4 * rep + 3);
    return r;
}

ReplicateResult replicate(const ReplicateConfig& config,
                          const std::function<void(const RepetitionResult&)>& progress) {
    if (config.reps == 0) throw InvalidArgument("replicate: need at least one repetition");
    const auto t0 = std::chrono::steady_clock::now();
    ReplicateResult result;
    result.config = config;

    auto make = [&](std::size_t n, std::uint64_t seed) {
        if (config.benchmark == Benchmark::Moons) return make_moons(n, config.moons.noise_std, seed);
        return make_eight_gaussians(n, config.eight.radius, config.eight.component_std, config.eight.global_scale,
                                    seed);
    };
    std::optional<Dataset> centers;
    if (config.benchmark == Benchmark::EightGaussians)
        centers = eight_gaussian_centers(config.eight.radius, config.eight.global_scale);

    for (std::size_t rep = 0; rep < config.reps; ++rep) {
        RepetitionResult r = repetition_seeds(config.seed, rep);
        auto train = std::make_shared<const Dataset>(make(config.n_train, r.train_seed));
        const Dataset test = make(config.n_test, r.test_seed);

        const DriftEvaluator ev(config.sde.build(train->dim()), train);
        SamplerConfig cfg;
        cfg.grid = TimeGrid::uniform(config.steps);
        cfg.particles = config.particles;
        cfg.seed = r.sample_seed;
        cfg.workers = config.workers;
        const SampleBatch batch = sample_batch(ev, cfg);
        r.sample_seconds = batch.wallclock;

        EvalProtocol protocol = config.protocol;
        protocol.seed = r.eval_seed;
        r.report = evaluate(batch.terminal, test, protocol, centers ? &*centers : nullptr);
        r.report.meta["train_seed"] = r.train_seed;
        r.report.meta["test_seed"] = r.test_seed;
        r.report.meta["sample_seed"] = r.sample_seed;
        if (progress) progress(r);
        result.repetitions.push_back(std::move(r));
    }

    const double n = static_cast<double>(result.repetitions.size());
    double sum = 0.0;
    for (const auto& r : result.repetitions) sum += r.report.w2;
    result.mean = sum / n;
    if (result.repetitions.size() > 1) {
        double ss = 0.0;
        for (const auto& r : result.repetitions) ss += (r.report.w2 - result.mean) * (r.report.w2 - result.mean);
        result.sd = std::sqrt(ss / (n - 1.0));
    } else {
        result.sd = 0.0;
        result.warnings.push_back("single repetition: standard deviation reported as 0");
    }
    result.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

nlohmann::json ReplicateResult::to_json() const {
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& r : repetitions) {
        reps.push_back({{"index", r.index},
                        {"train_seed", r.train_seed},
                        {"test_seed", r.test_seed},
                        {"sample_seed", r.sample_seed},
                        {"eval_seed", r.eval_seed},
                        {"w2", r.report.w2},
                        {"sample_seconds", r.sample_seconds},
                        {"report", dsbs::to_json(r.report)}});
    }
    return {{"version", version()},
            {"config", config.to_json()},
            {"repetitions", reps},
            {"mean", mean},
            {"sd", sd},
            {"warnings", warnings},
            {"wallclock", wallclock}};
}

std::string ReplicateResult::table_row() const {
    std::ostringstream os;
    os.precision(3);
    os << std::fixed << to_string(config.benchmark) << ',' << config.sde.label() << ',' << mean << ',' << sd << ','
       << repetitions.size();
    return os.str();
}

} // namespace dsbs
