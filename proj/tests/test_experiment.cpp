#include <doctest.h>

#include <cmath>
#include <set>

#include "dsbs/datasets.hpp"
#include "dsbs/errors.hpp"
#include "dsbs/experiment.hpp"
#include "dsbs/metrics.hpp"
#include "dsbs/report.hpp"

using namespace dsbs;

TEST_CASE("subsample protocol parsing") {
    const auto p = parse_subsample_protocol("2000x5");
    CHECK(p.kind == EvalProtocol::Kind::Subsampled);
    CHECK(p.subsample == 2000);
    CHECK(p.repetitions == 5);
    CHECK(p.describe() == "exact-subsample 2000x5");
    for (const char* bad : {"2000", "x5", "2000x", "20a0x5", "0x5", "10x0", "10x5x2", ""})
        CHECK_THROWS_AS(parse_subsample_protocol(bad), InvalidArgument);
    EvalProtocol e;
    e.kind = EvalProtocol::Kind::Exact;
    CHECK(e.describe() == "exact");
    e.kind = EvalProtocol::Kind::Entropic;
    CHECK(e.describe() == "entropic 0.01*median");
}

TEST_CASE("SDE choice labels and parsing") {
    CHECK(parse_family("ve") == Family::VE);
    CHECK(parse_family("vp") == Family::VP);
    CHECK(parse_family("subvp") == Family::SubVP);
    CHECK_THROWS_AS(parse_family("VE-DSBS"), InvalidArgument);
    SdeChoice c;
    CHECK(c.label() == "VE-DSBS");
    c.family = Family::VP;
    c.tau = 10.0;
    CHECK(c.label() == "VP-DSBS-10");
    CHECK(c.build(2).family() == Family::VP);
    CHECK(c.to_json()["schedule"]["tau"] == 10.0);
    CHECK(parse_benchmark("moons") == Benchmark::Moons);
    CHECK(parse_benchmark("eight-gaussians") == Benchmark::EightGaussians);
    CHECK_THROWS_AS(parse_benchmark("swissroll"), InvalidArgument);
}

TEST_CASE("evaluate fills the report") {
    const auto gen = make_eight_gaussians(400, 4.0, 0.5, benchmark_defaults::kEightGlobalScale, 1);
    const auto test = make_eight_gaussians(400, 4.0, 0.5, benchmark_defaults::kEightGlobalScale, 2);
    const auto centers = eight_gaussian_centers(4.0, benchmark_defaults::kEightGlobalScale);

    EvalProtocol exact;
    exact.kind = EvalProtocol::Kind::Exact;
    const auto r = evaluate(gen, test, exact, &centers);
    CHECK(r.w2 == w2_exact(gen, test));
    CHECK(std::holds_alternative<method::Exact>(r.method));
    CHECK(r.auxiliary.count("energy_distance") == 1);
    CHECK(r.auxiliary.count("mode_coverage_7") == 1);
    CHECK(r.auxiliary.at("mode_coverage") > 0.05);
    CHECK(r.meta["protocol"] == "exact");

    const auto sub = evaluate(gen, test, parse_subsample_protocol("100x4"));
    CHECK(std::holds_alternative<method::Subsampled>(sub.method));
    CHECK(sub.meta["w2_repetitions"].size() == 4);
    CHECK(sub.auxiliary.count("mode_coverage") == 0);

    EvalProtocol ent;
    ent.kind = EvalProtocol::Kind::Entropic;
    ent.epsilon = 0.5;
    const auto e = evaluate(gen, test, ent);
    CHECK(std::get<method::Entropic>(e.method).epsilon == 0.5);
    CHECK(e.w2 >= r.w2 - 1e-9);

    const auto j = to_json(r);
    for (const char* key : {"w2", "method", "auxiliary", "meta"}) CHECK(j.contains(key));
    CHECK(j["method"]["kind"] == "exact");
    CHECK(to_json(sub)["method"]["kind"] == "subsampled");
}

TEST_CASE("repetition seeds are distinct") {
    std::set<std::uint64_t> seen;
    for (std::size_t r = 0; r < 10; ++r) {
        const auto s = repetition_seeds(123, r);
        seen.insert({s.train_seed, s.test_seed, s.sample_seed, s.eval_seed});
    }
    CHECK(seen.size() == 40);
    CHECK(repetition_seeds(123, 3).train_seed == repetition_seeds(123, 3).train_seed);
}

TEST_CASE("small replicate run") {
    ReplicateConfig cfg;
    cfg.benchmark = Benchmark::Moons;
    cfg.reps = 1;
    cfg.n_train = 300;
    cfg.n_test = 200;
    cfg.particles = 200;
    cfg.steps = 20;
    cfg.seed = 5;
    cfg.protocol = parse_subsample_protocol("100x2");
    int calls = 0;
    const auto one = replicate(cfg, [&](const RepetitionResult&) { ++calls; });
    CHECK(calls == 1);
    CHECK(one.sd == 0.0);
    CHECK(one.warnings.size() == 1);
    CHECK(one.mean == one.repetitions[0].report.w2);
    CHECK(one.mean > 0.0);
    CHECK(one.mean < 1.0);

    cfg.reps = 3;
    const auto three = replicate(cfg);
    CHECK(three.warnings.empty());
    CHECK(three.repetitions[0].report.w2 == one.mean);
    double m = 0.0;
    for (const auto& r : three.repetitions) m += r.report.w2;
    m /= 3;
    double ss = 0.0;
    for (const auto& r : three.repetitions) ss += (r.report.w2 - m) * (r.report.w2 - m);
    CHECK(three.mean == doctest::Approx(m));
    CHECK(three.sd == doctest::Approx(std::sqrt(ss / 2)));

    const auto j = three.to_json();
    CHECK(j["config"]["dataset"]["noise_std"] == 0.1);
    CHECK(j["config"]["protocol"]["description"] == "exact-subsample 100x2");
    CHECK(j["repetitions"].size() == 3);
    CHECK(j["version"] == version());
    CHECK(three.table_row().rfind("moons,VE-DSBS,", 0) == 0);

    cfg.reps = 0;
    CHECK_THROWS_AS(replicate(cfg), InvalidArgument);
}
