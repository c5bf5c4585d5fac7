#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>

#include "polisim/harness.hpp"

#ifndef POLISIM_BIN
#define POLISIM_BIN "polisim"
#endif

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + POLISIM_BIN + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("polisim_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), {});
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("scripted runs from the command line are reproducible") {
    const fs::path dir = temp_dir("run");
    const std::string a = (dir / "a").string();
    const std::string b = (dir / "b").string();
    CHECK(run_cli("run --agent scripted --world 1 --seed 42 --out " + a) == 0);
    CHECK(run_cli("run --agent scripted --world 1 --seed 42 --out " + b) == 0);
    const std::string bytes_a = slurp(dir / "a/runlog.json");
    CHECK_FALSE(bytes_a.empty());
    CHECK(bytes_a == slurp(dir / "b/runlog.json"));
    fs::remove_all(dir);
}

TEST_CASE("LLM agents without credentials exit with a usage error") {
    ::unsetenv("OPENAI_API_KEY");
    const fs::path dir = temp_dir("nokey");
    CHECK(run_cli("run --agent base --out " + (dir / "x").string()) == 2);
    fs::remove_all(dir);
}

TEST_CASE("desk-scale scripted run exits cleanly") {
    const fs::path dir = temp_dir("short");
    CHECK(run_cli("run --days 70 --agent scripted --out " + (dir / "x").string()) == 0);
    fs::remove_all(dir);
}

TEST_CASE("bad flags and unknown agents are usage errors") {
    CHECK(run_cli("run --agent nosuch") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("experiment --agent-kinds nosuch") == 2);
}

TEST_CASE("experiment, analyze, and plot pipeline on the smoke matrix") {
    const fs::path dir = temp_dir("pipeline");
    const std::string out = dir.string();
    CHECK(run_cli("experiment --runs 2 --days 365 --agent-kinds scripted-variants --workers 2 "
                  "--out " + out) == 0);

    int runlogs = 0;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.path().filename() == "runlog.json") ++runlogs;
    CHECK(runlogs == 16);
    CHECK(fs::exists(dir / "manifest.json"));

    CHECK(run_cli("analyze --in " + out) == 0);
    CHECK(fs::exists(dir / "analysis/metrics_summary.csv"));
    const std::string first = slurp(dir / "analysis/metrics_summary.csv");
    CHECK(run_cli("analyze --in " + out) == 0);  // idempotent
    CHECK(slurp(dir / "analysis/metrics_summary.csv") == first);

    CHECK(run_cli("plot --in " + out) == 0);
    CHECK(fs::exists(dir / "plots/timeseries_world1.svg"));
    CHECK(fs::exists(dir / "plots/bars_world2_prediction_error.svg"));

    fs::remove_all(dir);
}

TEST_CASE("analyze on a missing directory fails with a runtime error") {
    CHECK(run_cli("analyze --in /nonexistent/nowhere") == 1);
}

TEST_CASE("replay subcommand verifies a recorded run") {
    using namespace polisim;
    const fs::path dir = temp_dir("replay");

    // prepare a mock-recorded LLM run directory the way `run --record-transcript` would
    RunConfig cfg;
    cfg.agent = AgentKind::Base;
    cfg.source = DecisionSource::Llm;
    cfg.days = 70;
    MockGateway inner([](const std::string&, const CallMeta& meta) {
        return std::string("{\"prediction_without_policy\": 5, \"reasoning\": \"r\", "
                           "\"shutdown_percentage\": ") +
               std::to_string(meta.week % 40) + ", \"prediction_with_new_policy\": 4}";
    });
    {
        TranscriptRecorder recorder(inner, dir / "transcript.jsonl");
        LlmAgent agent(recorder, 1);
        const RunLog log = run_simulation(cfg, agent);
        REQUIRE_FALSE(log.failed);
        save_runlog(log, dir / "runlog.json");
    }

    CHECK(run_cli("replay --run-dir " + dir.string()) == 0);

    // a tampered runlog no longer matches its transcript
    RunLog tampered = load_runlog(dir / "runlog.json");
    tampered.daily[0].noise += 1e-9;
    save_runlog(tampered, dir / "runlog.json");
    CHECK(run_cli("replay --run-dir " + dir.string()) == 1);

    fs::remove_all(dir);
}

TEST_SUITE_END();
