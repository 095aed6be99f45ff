#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsbs/datasets.hpp"
#include "test_util.hpp"

using namespace dsbs;
using dsbs::testing::TempDir;
using nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(DSBS_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json load_json(const std::filesystem::path& p) {
    return json::parse(slurp(p));
}

std::string quote_args(const json& argv) {
    std::string s;
    for (std::size_t i = 1; i < argv.size(); ++i) s += " '" + argv[i].get<std::string>() + "'";
    return s;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST_CASE("generate writes CSV and f64le datasets") {
    TempDir dir;
    const auto csv = dir.path / "moons.csv";
    auto r = run("generate --kind moons --n 10000 --noise 0.1 --seed 1 --out " + csv.string());
    CHECK(r.code == 0);
    const auto moons = load_dataset(csv, FileFormat::Csv);
    CHECK(moons.size() == 10000);
    CHECK(moons.dim() == 2);
    CHECK(moons == make_moons(10000, 0.1, 1));

    const auto bin = dir.path / "8g.f64le";
    r = run("generate --kind eight-gaussians --n 10000 --seed 2 --out " + bin.string());
    CHECK(r.code == 0);
    const std::string raw = slurp(bin);
    REQUIRE(raw.size() == 16 + 10000 * 2 * 8);
    std::uint64_t n = 0, d = 0;
    std::memcpy(&n, raw.data(), 8);
    std::memcpy(&d, raw.data() + 8, 8);
    CHECK(n == 10000);
    CHECK(d == 2);
    const auto manifest = load_json(bin.string() + ".manifest.json");
    CHECK(manifest["dataset"]["kind"] == "eight-gaussians");

    CHECK(run("generate --kind swissroll --out " + (dir.path / "x.csv").string()).code == 2);
    CHECK(run("generate --kind moons").code == 2);
    CHECK(run("").code == 2);
}

TEST_CASE("sample writes samples and a manifest that replays bitwise") {
    TempDir dir;
    const auto data = dir.path / "8g.f64le";
    REQUIRE(run("generate --kind eight-gaussians --n 1000 --seed 2 --out " + data.string()).code == 0);
    const auto out = dir.path / "gen.f64le";
    const auto r = run("sample --data " + data.string() +
                       " --sde vp --tau 10 --N 50 --particles 300 --seed 7 --record-stride 10 --out " + out.string() +
                       " --trajectories " + (dir.path / "traj.csv").string());
    REQUIRE(r.code == 0);
    const auto gen = load_dataset(out, FileFormat::F64le);
    CHECK(gen.size() == 300);
    const auto manifest = load_json(out.string() + ".manifest.json");
    CHECK(manifest["sde"]["label"] == "VP-DSBS-10");
    CHECK(manifest["grid"]["N"] == 50);
    CHECK(manifest["particles"] == 300);
    CHECK(manifest["start"] == json::array({0.0, 0.0}));

    const auto traj = csv_rows(slurp(dir.path / "traj.csv"));
    CHECK(traj.front() == std::vector<std::string>{"particle", "t", "x0", "x1"});
    CHECK(traj.size() == 1 + 300 * 6);

    // Replay from the manifest alone, with a different worker count.
    const std::string first = slurp(out);
    std::filesystem::remove(out);
    auto argv = manifest["argv"];
    for (std::size_t i = 0; i + 1 < argv.size(); ++i)
        if (argv[i] == "--workers") argv[i + 1] = "3";
    REQUIRE(run(quote_args(argv)).code == 0);
    CHECK(slurp(out) == first);

    const auto sub = run("sample --data " + data.string() + " --sde subvp --subvp-exact-variance --N 10 --particles 5 " +
                         "--out " + (dir.path / "s.csv").string());
    CHECK(sub.code == 0);
    CHECK(load_json((dir.path / "s.csv.manifest.json"))["sde"]["subvp_exact_variance"] == true);
}

TEST_CASE("sample reports numeric failure with its own exit code") {
    TempDir dir;
    const auto data = dir.path / "huge.csv";
    save_dataset(Dataset(2, 1, {1e200, -1e200}), data, FileFormat::Csv);
    CHECK(run("sample --data " + data.string() + " --N 10 --particles 4 --out " + (dir.path / "o.csv").string())
              .code == 4);
    CHECK(run("sample --data " + (dir.path / "missing.csv").string() + " --out " + (dir.path / "o.csv").string())
              .code == 3);
    CHECK(run("sample --data " + data.string() + " --start 1,2 --out " + (dir.path / "o.csv").string()).code == 2);
}

TEST_CASE("evaluate") {
    TempDir dir;
    const auto a = dir.path / "a.csv";
    const auto b = dir.path / "b.csv";
    save_dataset(make_moons(300, 0.1, 1), a, FileFormat::Csv);
    auto r = run("evaluate --samples " + a.string() + " --test " + a.string());
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["w2"] == 0.0);

    save_dataset(testing::points({{0, 0}}), a, FileFormat::Csv);
    save_dataset(testing::points({{3, 4}}), b, FileFormat::Csv);
    r = run("evaluate --samples " + a.string() + " --test " + b.string());
    CHECK(json::parse(r.out)["w2"] == 5.0);

    save_dataset(make_moons(2000, 0.1, 1), a, FileFormat::Csv);
    save_dataset(make_moons(2000, 0.1, 2), b, FileFormat::Csv);
    const auto report = dir.path / "report.json";
    r = run("evaluate --samples " + a.string() + " --test " + b.string() + " --exact-subsample 400x5 --seed 3 --out " +
            report.string());
    CHECK(r.code == 0);
    const auto j = load_json(report);
    CHECK(j["meta"]["protocol"] == "exact-subsample 400x5");
    CHECK(j["method"]["kind"] == "subsampled");
    CHECK(j["method"]["subsample"] == 400);
    CHECK(j["meta"]["w2_repetitions"].size() == 5);

    CHECK(run("evaluate --samples " + a.string() + " --test " + b.string() + " --exact-subsample 400").code == 2);
    CHECK(run("evaluate --samples " + a.string() + " --test " + b.string() + " --exact --entropic").code == 2);
}

TEST_CASE("replicate with a single repetition") {
    TempDir dir;
    const auto out = dir.path / "rep.json";
    const auto csv = dir.path / "table.csv";
    const auto r = run("replicate --benchmark moons --sde vp --tau 10 --reps 1 --n-train 200 --n-test 200 "
                       "--particles 200 --N 10 --exact-subsample 100x2 --out " +
                       out.string() + " --csv " + csv.string());
    REQUIRE(r.code == 0);
    const auto j = load_json(out);
    CHECK(j["sd"] == 0.0);
    CHECK(j["warnings"].size() == 1);
    CHECK(j["repetitions"].size() == 1);
    CHECK(j["config"]["sde"]["label"] == "VP-DSBS-10");
    const auto rows = csv_rows(slurp(csv));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"benchmark", "sde", "mean", "sd", "reps"});
    CHECK(rows[1][1] == "VP-DSBS-10");
    CHECK(r.out.rfind("moons,VP-DSBS-10,", 0) == 0);
}

TEST_CASE("schedule-profile") {
    const auto r = run("schedule-profile --schemes ve,ddpm,vp:10 --points 51");
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    CHECK(rows.front() == std::vector<std::string>{"scheme", "t", "sigma"});
    CHECK(rows.size() == 1 + 3 * 51);
    std::map<std::string, std::vector<double>> curves;
    for (std::size_t i = 1; i < rows.size(); ++i) curves[rows[i][0]].push_back(std::stod(rows[i][2]));
    for (double s : curves["VE-DSBS"]) CHECK(s == 1.0);
    for (std::size_t i = 1; i < 51; ++i) {
        CHECK(curves["DDPM"][i] > curves["DDPM"][i - 1]);
        CHECK(curves["VP-DSBS-10"][i] < curves["VP-DSBS-10"][i - 1]);
    }
    CHECK(run("schedule-profile --schemes bogus").code == 2);
}

TEST_CASE("TOML config supplies defaults and flags override it") {
    TempDir dir;
    const auto cfg = dir.path / "c.toml";
    std::ofstream(cfg) << "[schedule-profile]\npoints = 2\nschemes = [\"smld\"]\n";
    auto rows = csv_rows(run("--config " + cfg.string() + " schedule-profile").out);
    CHECK(rows.size() == 3);
    CHECK(rows[1][0] == "SMLD");
    rows = csv_rows(run("--config " + cfg.string() + " schedule-profile --points 5").out);
    CHECK(rows.size() == 6);
}
