#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hiercc/cli/commands.hpp"
#include "hiercc/json_export.hpp"

using namespace hiercc;
using cli::ExperimentConfig;

namespace {

ExperimentConfig small_sim_config() {
    ExperimentConfig c;
    c.dims = {1000, 1000, 1000};
    c.workers = 20;
    c.grid = {4, 1, 1};
    c.trials = 2000;
    c.seed = 5;
    c.threads = 2;
    return c;
}

std::vector<std::string> csv_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("config round trip is the identity") {
    for (const auto* name :
         {"fig6a.json", "fig6b.json", "fig7.json", "fig10.json", "fig11.json"}) {
        const auto path = std::string(HIERCC_CONFIG_DIR) + "/" + name;
        INFO(path);
        const auto config = cli::load_config(path);
        const auto once = cli::config_to_json(config);
        const auto twice = cli::config_to_json(cli::parse_config(once));
        REQUIRE(once.dump() == twice.dump());
    }
}

TEST_CASE("simulate: empty sweep emits a header-only CSV") {
    ExperimentConfig c = small_sim_config();
    std::stringstream out;
    cli::cmd_simulate(c, out);
    const auto lines = csv_lines(out.str());
    REQUIRE(lines.size() == 2);
    REQUIRE(lines[0] == "# schema=1");
    REQUIRE(lines[1] == "scheme,L,P,N,R,profile,mean,stddev,p50,p95,p99,trials,seed");
}

TEST_CASE("simulate is deterministic under the seed") {
    ExperimentConfig c = small_sim_config();
    cli::SchemeEntry nonh;
    nonh.mode = HierarchyMode::NonH;
    cli::SchemeEntry mlcc;
    mlcc.mode = HierarchyMode::MLCC;
    mlcc.lValues = {4};
    c.simulate = {nonh, mlcc};
    std::stringstream out1, out2;
    cli::cmd_simulate(c, out1);
    cli::cmd_simulate(c, out2);
    REQUIRE(out1.str() == out2.str());
    REQUIRE(csv_lines(out1.str()).size() == 4);
}

TEST_CASE("profile sweep rows: fast network diverse, slow network constant") {
    auto c = cli::load_config(std::string(HIERCC_CONFIG_DIR) + "/fig7.json");
    std::stringstream out;
    cli::cmd_simulate(c, out);
    const auto lines = csv_lines(out.str());
    REQUIRE(lines.size() == 5);  // schema + header + three regimes
    REQUIRE(lines[2].find("fast_network,8,1,20,4,") == 0);
    // both communication-bound rows pin every level at the base threshold
    REQUIRE(lines[3].find("4|4|4|4|4|4|4|4") != std::string::npos);
    REQUIRE(lines[4].find("4|4|4|4|4|4|4|4") != std::string::npos);
    // the fast-network profile is diverse: strictly larger first level
    REQUIRE(lines[2].find(",13|") != std::string::npos);
}

TEST_CASE("optimize-profile: L=1 collapses to [R]; fast worker is constant") {
    ExperimentConfig c = small_sim_config();
    c.optimizeLevels = 1;
    auto out = cli::cmd_optimize_profile(c);
    REQUIRE(out["profile"] == std::vector<std::size_t>{4});

    c.optimizeLevels = 6;
    c.optimizeRegime = Regime::FastWorker;
    out = cli::cmd_optimize_profile(c);
    REQUIRE(out["profile"] == std::vector<std::size_t>(6, 4));
}

TEST_CASE("run: seeded random job with log and schedule export") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "hiercc_cli_test";
    fs::create_directories(dir);

    ExperimentConfig c;
    c.dims = {64, 64, 64};
    c.workers = 6;
    c.grid = {2, 1, 2};
    c.seed = 9;
    cli::SchemeEntry entry;
    entry.mode = HierarchyMode::NonH;
    c.runScheme = entry;

    const auto logPath = (dir / "log.csv").string();
    const auto schedulePath = (dir / "schedule.json").string();
    const auto report = cli::cmd_run(c, nullptr, nullptr, logPath, schedulePath);
    REQUIRE(report["relError"].get<double>() <= 1e-8);
    REQUIRE(report["scheme"] == "nonh");

    std::ifstream log(logPath);
    std::string first;
    std::getline(log, first);
    REQUIRE(first == "# schema=1");

    std::ifstream sched(schedulePath);
    json sj;
    sched >> sj;
    REQUIRE(sj["schedules"].size() == 6);
    REQUIRE(sj["partition"].size() == 1);
    for (const auto& rec : sj["schedules"]) {
        REQUIRE(rec.contains("worker"));
        REQUIRE(rec.contains("point"));
        REQUIRE(rec.contains("aDims"));
    }

    // the seed pins the straggler draw and the scheme structure
    const auto again = cli::cmd_run(c, nullptr, nullptr);
    REQUIRE(again["stragglers"] == report["stragglers"]);
    REQUIRE(again["scheme"] == report["scheme"]);
    fs::remove_all(dir);
}

TEST_CASE("run honours explicit matrices") {
    ExperimentConfig c;
    c.dims = {8, 8, 8};
    c.workers = 6;
    c.grid = {2, 1, 2};
    cli::SchemeEntry entry;
    entry.mode = HierarchyMode::NonH;
    c.runScheme = entry;
    const Matrix a = Matrix::identity(8);
    const Matrix b = Matrix::identity(8);
    const auto report = cli::cmd_run(c, &a, &b);
    REQUIRE(report["relError"].get<double>() <= 1e-10);
}

TEST_CASE("sweep emits one row per scheme") {
    ExperimentConfig c;
    c.dims = {96, 96, 96};
    c.workers = 6;
    c.grid = {2, 1, 2};
    c.repeats = 2;
    c.stragglerProb = 0.33;
    c.seed = 3;
    cli::SchemeEntry poly;
    poly.mode = HierarchyMode::NonH;
    poly.label = "poly";
    cli::SchemeEntry bicc;
    bicc.mode = HierarchyMode::BICC;
    bicc.pValues = {2};
    bicc.label = "bicc";
    c.sweepSchemes = {poly, bicc};
    std::stringstream out;
    const auto rows = cli::cmd_sweep(c, out);
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0].meanRelError <= 1e-8);
    REQUIRE(rows[1].meanRelError <= 1e-8);
    const auto lines = csv_lines(out.str());
    REQUIRE(lines.size() == 4);
    REQUIRE(lines[2].find("poly,nonh,6,") == 0);
}

TEST_CASE("tradeoff: decode time falls and counted compute rises with L_H") {
    ExperimentConfig c;
    c.dims = {256, 256, 256};
    c.workers = 12;
    c.grid = {1, 1, 4};
    c.repeats = 4;
    c.stragglerProb = 0.33;
    c.seed = 7;
    c.tradeoffP = 4;
    c.tradeoffLh = {1, 2, 4};
    c.tradeoffBaselines = true;
    std::stringstream out;
    const auto rows = cli::cmd_tradeoff(c, out);
    REQUIRE(rows.size() == 5);  // uncoded, poly, and three hybrid points

    // uncoded has (essentially) no decoding work
    const double uncodedDecode = rows[0].meanPhases.decode;
    const double polyDecode = rows[1].meanPhases.decode;
    REQUIRE(uncodedDecode < polyDecode);

    // larger L_H: smaller decode, more counted computation
    const auto& lh1 = rows[2];
    const auto& lh2 = rows[3];
    const auto& lh4 = rows[4];
    REQUIRE(lh1.meanPhases.decode > lh2.meanPhases.decode);
    REQUIRE(lh2.meanPhases.decode > lh4.meanPhases.decode);
    REQUIRE(lh1.meanWorkerCompute <= lh4.meanWorkerCompute * 1.10);
    for (const auto& r : rows) REQUIRE(r.meanRelError <= 1e-6);
}

TEST_CASE("fit command parses a sample CSV") {
    RngStream rng(11, 0, 0);
    std::stringstream samples;
    samples << "# one sample per line\n";
    for (int i = 0; i < 50000; ++i) samples << rng.next_shifted_exponential(0.22, 0.99) << '\n';
    const auto out = cli::cmd_fit(samples);
    REQUIRE(out["mu"].get<double>() == Catch::Approx(0.22).epsilon(0.02));
    REQUIRE(out["alpha"].get<double>() == Catch::Approx(0.99).epsilon(0.02));
}

TEST_CASE("task manifest round trip") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "hiercc_manifest_test";
    RngStream rng(13, 0, 0);
    Matrix a(6, 4), b(4, 6);
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = rng.next_double();
    for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] = rng.next_double();
    const auto batch = encode_polynomial(a, b, {2, 1, 2},
                                         evaluation_points(5, PointKind::Chebyshev));
    write_task_manifest(batch, dir);

    std::ifstream is(dir / "manifest.json");
    json manifest;
    is >> manifest;
    REQUIRE(manifest.size() == 5);
    const auto& first = manifest[0];
    const Matrix backA = load_matrix((dir / first["a"].get<std::string>()).string());
    REQUIRE(backA == *batch.tasks[first["taskId"].get<std::size_t>()].aHat);
    fs::remove_all(dir);
}
