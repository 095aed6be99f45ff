// dsbs command-line driver: generate | sample | evaluate | replicate | schedule-profile

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dsbs/dsbs.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kOther = 1, kUsage = 2, kIo = 3, kNumeric = 4 };

std::string shortest(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

std::vector<double> parse_point(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
        if (r.ec != std::errc{} || r.ptr != item.data() + item.size())
            throw dsbs::InvalidArgument("malformed coordinate '" + item + "' in '" + text + "'");
        out.push_back(v);
    }
    if (out.empty()) throw dsbs::InvalidArgument("empty point '" + text + "'");
    return out;
}

dsbs::FileFormat resolve_format(const std::string& flag, const fs::path& path) {
    if (flag.empty()) return dsbs::format_for_path(path);
    if (flag == "csv") return dsbs::FileFormat::Csv;
    if (flag == "f64le") return dsbs::FileFormat::F64le;
    throw dsbs::InvalidArgument("unknown format '" + flag + "' (expected csv or f64le)");
}

// Every option of `sub` with its resolved value, so the command can be replayed.
json resolved_argv(const CLI::App& app, const CLI::App& sub) {
    json argv = json::array({app.get_name(), sub.get_name()});
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_name() == "--help" || opt->get_lnames().empty()) continue;
        const std::string flag = "--" + opt->get_lnames().front();
        if (opt->get_type_size() == 0) {
            if (opt->count() > 0) argv.push_back(flag);
            continue;
        }
        std::string value;
        if (opt->count() > 0) {
            const auto& res = opt->results();
            for (std::size_t i = 0; i < res.size(); ++i) value += (i ? "," : "") + res[i];
        } else {
            value = opt->get_default_str();
        }
        if (value.empty()) continue;
        argv.push_back(flag);
        argv.push_back(value);
    }
    return argv;
}

void write_json(const json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw dsbs::IoError("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw dsbs::IoError("write failed: " + path);
}

std::string manifest_path_for(const std::string& out, const std::string& flag) {
    return flag.empty() ? out + ".manifest.json" : flag;
}

// ---- generate ---------------------------------------------------------------

struct GenerateArgs {
    std::string kind;
    std::size_t n = 10000;
    std::uint64_t seed = 0;
    double noise = dsbs::benchmark_defaults::kMoonsNoise;
    double radius = dsbs::benchmark_defaults::kEightRadius;
    double component_std = dsbs::benchmark_defaults::kEightComponentStd;
    double global_scale = dsbs::benchmark_defaults::kEightGlobalScale;
    std::string out;
    std::string format;
    std::string manifest;
};

void add_generate(CLI::App& app, GenerateArgs& a) {
    auto* sub = app.add_subcommand("generate", "Generate a benchmark dataset");
    sub->add_option("--kind", a.kind, "moons or eight-gaussians")->required()->check(
        CLI::IsMember({"moons", "eight-gaussians"}));
    sub->add_option("--n", a.n, "Number of points")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--seed", a.seed, "Random seed")->capture_default_str();
    sub->add_option("--noise", a.noise, "Moons jitter std")->default_str(shortest(a.noise));
    sub->add_option("--radius", a.radius, "8-Gaussians centre radius")->default_str(shortest(a.radius));
    sub->add_option("--component-std", a.component_std, "8-Gaussians component std")->default_str(shortest(a.component_std));
    sub->add_option("--global-scale", a.global_scale, "8-Gaussians global scale")->default_str(shortest(a.global_scale));
    sub->add_option("--out", a.out, "Output file (.csv for CSV, otherwise f64le)")->required();
    sub->add_option("--format", a.format, "csv or f64le (default: from extension)");
    sub->add_option("--manifest", a.manifest, "Manifest path (default: <out>.manifest.json)");
}

int run_generate(const CLI::App& app, const GenerateArgs& a) {
    dsbs::DatasetSpec spec;
    spec.n = a.n;
    spec.seed = a.seed;
    json dataset;
    if (a.kind == "moons") {
        spec.kind = dsbs::dataset_kind::Moons{a.noise};
        dataset = {{"kind", "moons"}, {"noise_std", a.noise}};
    } else {
        spec.kind = dsbs::dataset_kind::EightGaussians{a.radius, a.component_std, a.global_scale};
        dataset = {{"kind", "eight-gaussians"},
                   {"radius", a.radius},
                   {"component_std", a.component_std},
                   {"global_scale", a.global_scale}};
    }
    dataset["n"] = a.n;
    dataset["seed"] = a.seed;
    const auto format = resolve_format(a.format, a.out);
    const auto ds = dsbs::generate(spec);
    dsbs::save_dataset(ds, a.out, format);

    const json manifest{{"command", "generate"},
                        {"version", dsbs::version()},
                        {"argv", resolved_argv(app, *app.get_subcommand("generate"))},
                        {"dataset", dataset},
                        {"output", {{"path", a.out}, {"format", dsbs::to_string(format)}, {"rows", ds.size()},
                                    {"dim", ds.dim()}}}};
    write_json(manifest, manifest_path_for(a.out, a.manifest));
    std::cout << dataset.dump() << '\n';
    return kOk;
}

// ---- sample -----------------------------------------------------------------

struct SdeArgs {
    std::string sde = "ve";
    double tau = 1.0;
    bool subvp_exact_variance = false;

    dsbs::SdeChoice choice() const {
        dsbs::SdeChoice c;
        c.family = dsbs::parse_family(sde);
        c.tau = tau;
        c.subvp_exact_variance = subvp_exact_variance;
        return c;
    }
};

void add_sde_flags(CLI::App* sub, SdeArgs& s) {
    sub->add_option("--sde", s.sde, "Reference SDE: ve, vp or subvp")->capture_default_str()->check(
        CLI::IsMember({"ve", "vp", "subvp"}));
    sub->add_option("--tau", s.tau, "tau in beta(t) = tau exp(-tau t) for vp/subvp")->default_str(shortest(s.tau))->check(
        CLI::PositiveNumber);
    sub->add_flag("--subvp-exact-variance", s.subvp_exact_variance,
                  "Use the composable sub-VP kernel variance instead of the printed one");
}

struct SampleArgs {
    std::string data;
    std::string data_format;
    SdeArgs sde;
    std::size_t steps = 100;
    std::size_t particles = 10000;
    std::uint64_t seed = 0;
    std::string start;
    std::size_t workers = 0;
    std::size_t subsample = 0;
    std::uint64_t subsample_seed = 0;
    std::string out;
    std::string format;
    std::string trajectories;
    std::size_t record_stride = 1;
    std::string manifest;
};

void add_sample(CLI::App& app, SampleArgs& a) {
    auto* sub = app.add_subcommand("sample", "Run the bridge sampler on a dataset");
    sub->add_option("--data", a.data, "Target samples (CSV or f64le)")->required();
    sub->add_option("--data-format", a.data_format, "csv or f64le (default: from extension)");
    add_sde_flags(sub, a.sde);
    sub->add_option("--N", a.steps, "Euler-Maruyama steps on a uniform grid")->capture_default_str()->check(
        CLI::PositiveNumber);
    sub->add_option("--particles", a.particles, "Number of generated samples")->capture_default_str()->check(
        CLI::PositiveNumber);
    sub->add_option("--seed", a.seed, "Noise seed")->capture_default_str();
    sub->add_option("--start", a.start, "Start point as comma-separated coordinates (default: origin)");
    sub->add_option("--workers", a.workers, "Worker threads, 0 = all cores (output does not depend on it)")
        ->capture_default_str();
    sub->add_option("--subsample", a.subsample, "Use a random subset of this many data points (0 = all)")
        ->capture_default_str();
    sub->add_option("--subsample-seed", a.subsample_seed, "Seed of the data subset")->capture_default_str();
    sub->add_option("--out", a.out, "Terminal samples file")->required();
    sub->add_option("--format", a.format, "csv or f64le (default: from extension)");
    sub->add_option("--trajectories", a.trajectories, "Also write strided trajectories as CSV");
    sub->add_option("--record-stride", a.record_stride, "Record every k-th grid node")->capture_default_str()->check(
        CLI::PositiveNumber);
    sub->add_option("--manifest", a.manifest, "Manifest path (default: <out>.manifest.json)");
}

void write_trajectories(const std::vector<dsbs::Trajectory>& paths, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw dsbs::IoError("cannot write " + path);
    out << "particle,t";
    const std::size_t d = paths.empty() ? 0 : paths.front().dim;
    for (std::size_t k = 0; k < d; ++k) out << ",x" << k;
    out << '\n';
    for (std::size_t p = 0; p < paths.size(); ++p) {
        for (std::size_t j = 0; j < paths[p].size(); ++j) {
            out << p << ',' << shortest(paths[p].times[j]);
            for (double v : paths[p].state(j)) out << ',' << shortest(v);
            out << '\n';
        }
    }
    if (!out) throw dsbs::IoError("write failed: " + path);
}

int run_sample(const CLI::App& app, const SampleArgs& a) {
    const auto data_format = resolve_format(a.data_format, a.data);
    auto data = std::make_shared<const dsbs::Dataset>(dsbs::load_dataset(a.data, data_format));
    const auto choice = a.sde.choice();
    std::vector<double> start = a.start.empty() ? std::vector<double>(data->dim(), 0.0) : parse_point(a.start);

    dsbs::DriftOptions options;
    options.subsample = a.subsample;
    options.subsample_seed = a.subsample_seed;
    const dsbs::DriftEvaluator ev(choice.build(data->dim()), data, start, options);

    dsbs::SamplerConfig cfg;
    cfg.grid = dsbs::TimeGrid::uniform(a.steps);
    cfg.particles = a.particles;
    cfg.seed = a.seed;
    cfg.workers = a.workers;
    cfg.record_trajectories = !a.trajectories.empty();
    cfg.record_stride = a.record_stride;
    const auto batch = dsbs::sample_batch(ev, cfg);

    const auto format = resolve_format(a.format, a.out);
    dsbs::save_dataset(batch.terminal, a.out, format);
    if (!a.trajectories.empty()) write_trajectories(batch.trajectories, a.trajectories);

    const json manifest{
        {"command", "sample"},
        {"version", dsbs::version()},
        {"argv", resolved_argv(app, *app.get_subcommand("sample"))},
        {"sde", choice.to_json()},
        {"grid", {{"kind", "uniform"}, {"N", a.steps}}},
        {"start", start},
        {"particles", a.particles},
        {"seed", a.seed},
        {"dataset",
         {{"path", a.data},
          {"format", dsbs::to_string(data_format)},
          {"rows", data->size()},
          {"used_rows", ev.dataset().size()},
          {"subsample", a.subsample},
          {"subsample_seed", a.subsample_seed}}},
        {"output", {{"path", a.out}, {"format", dsbs::to_string(format)}, {"trajectories", a.trajectories},
                    {"record_stride", a.record_stride}}},
        {"floored_variance_queries", ev.floored_variance_count()},
        {"wallclock", batch.wallclock}};
    write_json(manifest, manifest_path_for(a.out, a.manifest));
    std::cerr << "sampled " << a.particles << " particles in " << batch.wallclock << " s\n";
    return kOk;
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
    std::string samples;
    std::string test;
    std::string exact_subsample;
    bool exact = false;
    bool entropic = false;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    std::string centers;
    std::string out;
};

void add_evaluate(CLI::App& app, EvaluateArgs& a) {
    auto* sub = app.add_subcommand("evaluate", "W2 and auxiliary distances between two point clouds");
    sub->add_option("--samples", a.samples, "Generated samples")->required();
    sub->add_option("--test", a.test, "Reference (test) samples")->required();
    auto* sub_opt = sub->add_option("--exact-subsample", a.exact_subsample,
                                    "Mean exact W2 over r disjoint m-point subsamples, as <m>x<r>");
    auto* exact_opt = sub->add_flag("--exact", a.exact, "Exact W2 on the full clouds");
    auto* ent_opt = sub->add_flag("--entropic", a.entropic, "Entropic (Sinkhorn) W2 on the full clouds");
    sub_opt->excludes(exact_opt)->excludes(ent_opt);
    exact_opt->excludes(ent_opt);
    sub->add_option("--epsilon", a.epsilon, "Entropic regularization (default 0.01 x median squared distance)");
    sub->add_option("--seed", a.seed, "Subsampling seed")->capture_default_str();
    sub->add_option("--centers", a.centers, "Mode centres for the coverage diagnostic");
    sub->add_option("--out", a.out, "Report path (default: stdout)");
}

int run_evaluate(const EvaluateArgs& a) {
    const auto gen = dsbs::load_dataset(a.samples, dsbs::format_for_path(a.samples));
    const auto test = dsbs::load_dataset(a.test, dsbs::format_for_path(a.test));
    dsbs::EvalProtocol protocol;
    if (!a.exact_subsample.empty()) {
        protocol = dsbs::parse_subsample_protocol(a.exact_subsample);
    } else if (a.exact) {
        protocol.kind = dsbs::EvalProtocol::Kind::Exact;
    } else if (a.entropic) {
        protocol.kind = dsbs::EvalProtocol::Kind::Entropic;
    } else if (gen.size() == test.size() && gen.size() <= dsbs::kExactSizeCap) {
        protocol.kind = dsbs::EvalProtocol::Kind::Exact;
    } else if (protocol.subsample * protocol.repetitions > std::min(gen.size(), test.size())) {
        protocol.kind = dsbs::EvalProtocol::Kind::Entropic;
    }
    protocol.epsilon = a.epsilon;
    protocol.seed = a.seed;
    std::optional<dsbs::Dataset> centers;
    if (!a.centers.empty()) centers = dsbs::load_dataset(a.centers, dsbs::format_for_path(a.centers));
    auto report = dsbs::evaluate(gen, test, protocol, centers ? &*centers : nullptr);
    report.meta["samples"] = a.samples;
    report.meta["test"] = a.test;
    report.meta["version"] = dsbs::version();
    write_json(dsbs::to_json(report), a.out);
    return kOk;
}

// ---- replicate --------------------------------------------------------------

struct ReplicateArgs {
    std::string benchmark;
    SdeArgs sde;
    std::size_t reps = 10;
    std::size_t n_train = 10000;
    std::size_t n_test = 10000;
    std::size_t particles = 10000;
    std::size_t steps = 100;
    std::uint64_t seed = 0;
    std::size_t workers = 0;
    std::string exact_subsample = "2000x5";
    double noise = dsbs::benchmark_defaults::kMoonsNoise;
    double radius = dsbs::benchmark_defaults::kEightRadius;
    double component_std = dsbs::benchmark_defaults::kEightComponentStd;
    double global_scale = dsbs::benchmark_defaults::kEightGlobalScale;
    std::string out;
    std::string csv;
};

void add_replicate(CLI::App& app, ReplicateArgs& a) {
    auto* sub = app.add_subcommand("replicate", "Repeat train/sample/evaluate and report mean and sd of W2");
    sub->add_option("--benchmark", a.benchmark, "moons or eight-gaussians")->required()->check(
        CLI::IsMember({"moons", "eight-gaussians"}));
    add_sde_flags(sub, a.sde);
    sub->add_option("--reps", a.reps, "Repetitions")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--n-train", a.n_train, "Training points per repetition")->capture_default_str()->check(
        CLI::PositiveNumber);
    sub->add_option("--n-test", a.n_test, "Test points per repetition")->capture_default_str()->check(
        CLI::PositiveNumber);
    sub->add_option("--particles", a.particles, "Generated points per repetition")->capture_default_str()->check(
        CLI::PositiveNumber);
    sub->add_option("--N", a.steps, "Euler-Maruyama steps")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--seed", a.seed, "Base seed; per-repetition seeds are derived from it")->capture_default_str();
    sub->add_option("--workers", a.workers, "Worker threads, 0 = all cores")->capture_default_str();
    sub->add_option("--exact-subsample", a.exact_subsample, "Evaluation protocol <m>x<r>")->capture_default_str();
    sub->add_option("--noise", a.noise, "Moons jitter std")->default_str(shortest(a.noise));
    sub->add_option("--radius", a.radius, "8-Gaussians centre radius")->default_str(shortest(a.radius));
    sub->add_option("--component-std", a.component_std, "8-Gaussians component std")->default_str(shortest(a.component_std));
    sub->add_option("--global-scale", a.global_scale, "8-Gaussians global scale")->default_str(shortest(a.global_scale));
    sub->add_option("--out", a.out, "Manifest with per-repetition results (default: stdout)");
    sub->add_option("--csv", a.csv, "Append a benchmark,sde,mean,sd,reps row to this CSV");
}

int run_replicate(const CLI::App& app, const ReplicateArgs& a) {
    dsbs::ReplicateConfig cfg;
    cfg.benchmark = dsbs::parse_benchmark(a.benchmark);
    cfg.sde = a.sde.choice();
    cfg.reps = a.reps;
    cfg.n_train = a.n_train;
    cfg.n_test = a.n_test;
    cfg.particles = a.particles;
    cfg.steps = a.steps;
    cfg.seed = a.seed;
    cfg.workers = a.workers;
    cfg.protocol = dsbs::parse_subsample_protocol(a.exact_subsample);
    cfg.moons.noise_std = a.noise;
    cfg.eight = {a.radius, a.component_std, a.global_scale};

    const auto result = dsbs::replicate(cfg, [&](const dsbs::RepetitionResult& r) {
        std::cerr << "rep " << r.index + 1 << "/" << a.reps << ": w2 = " << r.report.w2 << " (" << r.sample_seconds
                  << " s sampling)\n";
    });
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';

    json manifest = result.to_json();
    manifest["command"] = "replicate";
    manifest["argv"] = resolved_argv(app, *app.get_subcommand("replicate"));
    if (!a.out.empty()) write_json(manifest, a.out);

    if (!a.csv.empty()) {
        const bool fresh = !fs::exists(a.csv) || fs::file_size(a.csv) == 0;
        std::ofstream out(a.csv, std::ios::app);
        if (!out) throw dsbs::IoError("cannot write " + a.csv);
        if (fresh) out << "benchmark,sde,mean,sd,reps\n";
        out << result.table_row() << '\n';
    }
    std::cout << result.table_row() << '\n';
    if (a.out.empty()) std::cout << manifest.dump(2) << '\n';
    return kOk;
}

// ---- schedule-profile -------------------------------------------------------

struct ProfileArgs {
    std::vector<std::string> schemes{"ve", "vp:1", "vp:10", "subvp:1", "subvp:10", "smld", "ddpm"};
    std::size_t points = 101;
    std::string out;
};

void add_profile(CLI::App& app, ProfileArgs& a) {
    auto* sub = app.add_subcommand("schedule-profile", "Tabulate sigma(t) for diffusion schemes as CSV");
    sub->add_option("--schemes", a.schemes, "ve, vp:<tau>, subvp:<tau>, smld[:min:max], ddpm[:min:max]")
        ->delimiter(',')
        ->capture_default_str();
    sub->add_option("--points", a.points, "Samples per curve on [0, 1]")->capture_default_str()->check(
        CLI::Range(std::size_t{2}, std::size_t{1} << 24));
    sub->add_option("--out", a.out, "CSV path (default: stdout)");
}

int run_profile(const ProfileArgs& a) {
    std::vector<dsbs::SigmaScheme> schemes;
    for (const auto& s : a.schemes) schemes.push_back(dsbs::parse_scheme(s));
    std::ofstream file;
    if (!a.out.empty()) {
        file.open(a.out);
        if (!file) throw dsbs::IoError("cannot write " + a.out);
    }
    std::ostream& out = a.out.empty() ? std::cout : file;
    out << "scheme,t,sigma\n";
    for (const auto& s : schemes) {
        const std::string name = dsbs::scheme_name(s);
        for (std::size_t i = 0; i < a.points; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(a.points - 1);
            out << name << ',' << shortest(t) << ',' << shortest(dsbs::sigma_profile(s, t)) << '\n';
        }
    }
    if (!out) throw dsbs::IoError("write failed: " + (a.out.empty() ? std::string("stdout") : a.out));
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Data-driven Schrodinger bridge sampler", "dsbs"};
    app.set_version_flag("--version", dsbs::version());
    app.set_config("--config", "", "TOML file with default option values; command-line flags take precedence");
    app.require_subcommand(1);

    GenerateArgs gen;
    SampleArgs sample;
    EvaluateArgs eval;
    ReplicateArgs rep;
    ProfileArgs profile;
    add_generate(app, gen);
    add_sample(app, sample);
    add_evaluate(app, eval);
    add_replicate(app, rep);
    add_profile(app, profile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (app.got_subcommand("generate")) return run_generate(app, gen);
        if (app.got_subcommand("sample")) return run_sample(app, sample);
        if (app.got_subcommand("evaluate")) return run_evaluate(eval);
        if (app.got_subcommand("replicate")) return run_replicate(app, rep);
        if (app.got_subcommand("schedule-profile")) return run_profile(profile);
    } catch (const dsbs::NumericFailure& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kNumeric;
    } catch (const dsbs::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const dsbs::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const dsbs::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kOther;
    }
    return kUsage;
}
