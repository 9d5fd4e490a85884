#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "nle/errors.hpp"
#include "nle/io.hpp"
#include "nle/scenario.hpp"

using namespace nle;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "nle_scenario_test" / name;
    fs::remove_all(d);
    fs::create_directories(d.parent_path());
    return d;
}

std::string with_dir(const std::string& base, const fs::path& dir) {
    return R"({"scenario":")" + base + R"(","outputs":{"directory":")" + dir.string() + R"("}})";
}

std::vector<std::vector<double>> read_csv(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(cell.empty() ? NAN : std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

std::string file_text(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config errors name the field") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"grid":{"dim":1,"n":11,"half_width":1}})"), doctest::Contains("engine"),
                         ConfigError);
    const std::string base = builtin_json("shrinking_interval");
    auto patched = [&](const std::string& patch) {
        return R"({"scenario":"shrinking_interval",)" + patch + "}";
    };
    CHECK_THROWS_WITH_AS(parse_config(patched(R"("engine":"magic")")), doctest::Contains("engine"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(patched(R"("horizon":-1)")), doctest::Contains("horizon"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(patched(R"("kernel":{"type":"weird"},"engine":"weak")")),
                         doctest::Contains("kernel.type"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(patched(R"("kernel":{"type":"file","path":"nope.dls"},"engine":"weak")")),
                         doctest::Contains("kernel.path"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(patched(R"("solver":{"cfl":2})")), doctest::Contains("solver.cfl"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(patched(R"("c1":{"type":"sine"})")), doctest::Contains("c1.amplitude"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("{not json"), doctest::Contains("JSON"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"scenario":"nope"})"), doctest::Contains("scenario"), ConfigError);
    CHECK_NOTHROW(parse_config(base));
}

TEST_CASE("every built-in parses") {
    for (const auto& name : builtin_scenarios()) {
        INFO(name);
        const ScenarioConfig c = parse_config(builtin_json(name));
        CHECK(c.name == name);
        CHECK(c.horizon > 0.0);
        CHECK_FALSE(builtin_description(name).empty());
    }
}

TEST_CASE("a scenario override is merged into the built-in") {
    const ScenarioConfig c = parse_config(R"({"scenario":"example_3_2","solver":{"gamma":0}})");
    CHECK(c.gamma == 0.0);
    CHECK(c.cfl == 0.5);
    CHECK(c.engine == Engine::counterexample);
}

TEST_CASE("kernel read from a snapshot") {
    const fs::path dir = scratch_dir("kernel_file");
    fs::create_directories(dir);
    const KernelSpec box = KernelSpec::box(1, 0.02, 0.2);
    write_snapshot(dir / "k.dls", box.as_field(0.0));
    std::ofstream(dir / "cfg.json") << R"({"scenario":"expanding_interval","kernel":{"type":"file","path":"k.dls"},
        "grid":{"dim":1,"n":401,"half_width":4.0}})";
    const ScenarioConfig c = load_config(dir / "cfg.json");
    CHECK(c.kernel.M0() == doctest::Approx(box.M0()));
}

TEST_CASE("run writes a self-describing directory") {
    const fs::path dir = scratch_dir("shrinking");
    const RunOutcome out = run_scenario(parse_config(with_dir("shrinking_interval", dir)));
    REQUIRE(out.exit_code == 0);
    const Manifest m = read_manifest(dir / "manifest.txt");
    for (const char* key : {"config", "M0", "L0", "M1", "L1", "h", "steps", "dt", "exit_code"}) CHECK(m.count(key));
    CHECK(m.at("M1") == "1");
    CHECK(fs::exists(dir / "report.csv"));
    CHECK(fs::exists(dir / "u_00000.dls"));

    // Re-running from the manifest reproduces the snapshots bit for bit.
    const fs::path again = scratch_dir("shrinking_again");
    ScenarioConfig c = load_config(dir / "manifest.txt");
    c.directory = again;
    REQUIRE(run_scenario(c).exit_code == 0);
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".dls") CHECK(file_text(e.path()) == file_text(again / e.path().filename()));

    std::ostringstream csv;
    std::string error;
    REQUIRE(compare_runs(dir, again, csv, error) == 0);
    for (const auto& row : read_csv(csv.str()))
        for (std::size_t c2 = 1; c2 < row.size(); ++c2)
            if (c2 != 4 && c2 != 5) CHECK(row[c2] == 0.0);
}

TEST_CASE("counterexample scenario fattens and the two extreme gammas differ by 2/3") {
    const fs::path one = scratch_dir("gamma_one"), zero = scratch_dir("gamma_zero");
    REQUIRE(run_scenario(parse_config(with_dir("example_3_2", one))).exit_code == 0);
    const std::string z = R"({"scenario":"example_3_2","solver":{"gamma":0},"outputs":{"directory":")" +
                          zero.string() + R"("}})";
    REQUIRE(run_scenario(parse_config(z)).exit_code == 0);
    const double h = 0.01;
    const auto report = read_csv(file_text(one / "report.csv"));
    CHECK(report.back()[0] == doctest::Approx(2.0));
    CHECK(report.back()[1] >= 2.0 - 10 * h);

    std::ostringstream csv;
    std::string error;
    REQUIRE(compare_runs(zero, one, csv, error) == 0);
    const auto rows = read_csv(csv.str());
    CHECK(rows.back()[0] == doctest::Approx(2.0));
    CHECK(std::abs(rows.back()[6] - 2.0 / 3.0) <= 4 * h);
}

TEST_CASE("weak and level-set-invariant runs agree when the speed is positive") {
    // alpha compares whole level-set functions. Away from the zero level the two
    // formulations move levels with speeds that differ by up to M0 / 2, so the
    // sup bound needs M0 T / 2 <= 5h; the zero sets agree for any mass.
    for (const double height : {0.2, 0.1}) {
        const std::string kernel = R"("kernel":{"type":"box","radius":0.5,"height":)" + std::to_string(height) + "}";
        const fs::path s = scratch_dir("expanding_slepcev"), w = scratch_dir("expanding_weak");
        const std::string sj = R"({"scenario":"expanding_interval",)" + kernel + R"(,"outputs":{"directory":")" +
                               s.string() + R"("}})";
        const std::string wj = R"({"scenario":"expanding_interval","engine":"weak",)" + kernel +
                               R"(,"outputs":{"directory":")" + w.string() + R"("}})";
        REQUIRE(run_scenario(parse_config(sj)).exit_code == 0);
        REQUIRE(run_scenario(parse_config(wj)).exit_code == 0);
        std::ostringstream csv;
        std::string error;
        REQUIRE(compare_runs(w, s, csv, error) == 0);
        const auto rows = read_csv(csv.str());
        MESSAGE("kernel mass " << height << ": alpha_T = " << rows.back()[1] << ", radius gap " << rows.back()[6]);
        for (const auto& row : rows) CHECK(row[6] <= 0.02 + 1e-12);
        if (height <= 0.1) CHECK(rows.back()[1] <= 5 * 0.02);
    }
}

TEST_CASE("compare refuses mismatched grids") {
    const fs::path a = scratch_dir("cmp_a"), b = scratch_dir("cmp_b");
    REQUIRE(run_scenario(parse_config(with_dir("shrinking_interval", a))).exit_code == 0);
    const std::string bj = R"({"scenario":"shrinking_interval","grid":{"n":201},"outputs":{"directory":")" +
                           b.string() + R"("}})";
    REQUIRE(run_scenario(parse_config(bj)).exit_code == 0);
    std::ostringstream csv;
    std::string error;
    CHECK(compare_runs(a, b, csv, error) == 1);
    CHECK_FALSE(error.empty());
}

TEST_CASE("numerical failures and non-convergence map to exit codes") {
    const fs::path d2 = scratch_dir("too_small");
    const std::string small = R"({"scenario":"expanding_interval","grid":{"half_width":2.0,"n":201},"horizon":8,
        "solver":{"collar_check_level":0},"outputs":{"directory":")" + d2.string() + R"("}})";
    const RunOutcome o2 = run_scenario(parse_config(small));
    CHECK(o2.exit_code == 2);
    CHECK(o2.message.find("half_width") != std::string::npos);
    CHECK(fs::exists(d2 / "manifest.txt"));

    const fs::path d3 = scratch_dir("no_converge");
    const std::string stall = R"({"scenario":"example_3_2_weak","horizon":0.25,"grid":{"n":201},
        "solver":{"max_picard":1,"tol":1e-300},"outputs":{"directory":")" + d3.string() + R"("}})";
    const RunOutcome o3 = run_scenario(parse_config(stall));
    CHECK(o3.exit_code == 3);
    CHECK(fs::exists(d3 / "report.csv"));
    CHECK(read_manifest(d3 / "manifest.txt").at("converged") == "0");
}

#ifdef NLE_CLI_PATH
TEST_CASE("command line exit codes") {
    const fs::path dir = scratch_dir("cli");
    fs::create_directories(dir);
    std::ofstream(dir / "missing_engine.json") << R"({"grid":{"dim":1,"n":101,"half_width":2}})";
    const std::string cli = NLE_CLI_PATH;
    auto run = [&](const std::string& args) {
        const int status = std::system((cli + " " + args + " > " + (dir / "out.txt").string() + " 2>&1").c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    CHECK(run("run " + (dir / "missing_engine.json").string()) == 1);
    CHECK(file_text(dir / "out.txt").find("engine") != std::string::npos);
    CHECK(run("run " + (dir / "absent.json").string()) == 1);
    CHECK(run("list-scenarios") == 0);
    CHECK(file_text(dir / "out.txt").find("example_3_2") != std::string::npos);
    CHECK(run("compare " + dir.string() + " " + dir.string()) == 1);
    CHECK(run("bogus") != 0);
    std::ofstream(dir / "ok.json") << with_dir("shrinking_interval", dir / "ok_run");
    CHECK(run("run " + (dir / "ok.json").string()) == 0);
    CHECK(run("compare " + (dir / "ok_run").string() + " " + (dir / "ok_run").string()) == 0);
}
#endif
