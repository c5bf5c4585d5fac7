#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>

#include "polisim/errors.hpp"
#include "polisim/experiment.hpp"
#include "polisim/harness.hpp"

using namespace polisim;
namespace fs = std::filesystem;

namespace {

RunConfig scripted_config() {
    RunConfig cfg;
    cfg.agent = AgentKind::Scripted;
    cfg.source = DecisionSource::Scripted;
    return cfg;
}

RunLog run_scripted(const RunConfig& cfg) {
    ScriptedThresholdAgent agent;
    return run_simulation(cfg, agent);
}

fs::path temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("polisim_hn_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* kParseableBody =
    "{\"prediction_without_policy\": 3, \"reasoning\": \"steady\", "
    "\"shutdown_percentage\": 0, \"prediction_with_new_policy\": 3}";

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("scripted runs are bit-identical across executions") {
    const RunConfig cfg = scripted_config();
    const RunLog a = run_scripted(cfg);
    const RunLog b = run_scripted(cfg);
    CHECK(a == b);
    CHECK(runlog_bytes(a) == runlog_bytes(b));
    CHECK_FALSE(a.failed);
}

TEST_CASE("decision cadence, week count, and warm-up entries") {
    const RunLog log = run_scripted(scripted_config());
    CHECK(log.daily.size() == 365);
    CHECK(log.weekly.size() == 53);  // ceil(365/7)

    for (std::size_t i = 0; i < log.weekly.size(); ++i) {
        const WeeklyEntry& entry = log.weekly[i];
        CHECK(entry.week == static_cast<int>(i) + 1);
        if (entry.week < 6) {
            CHECK(entry.restriction == 0.0);
            CHECK_FALSE(entry.agent_decided);
            CHECK(entry.prompt_hash.empty());
            CHECK(entry.sampled_memory_indices.empty());
        } else {
            CHECK(entry.agent_decided);
            // store held week-1 records when week w was decided
            const std::size_t store_size = static_cast<std::size_t>(entry.week) - 1;
            CHECK(entry.sampled_memory_indices.size() == std::min<std::size_t>(5, store_size));
            for (std::size_t idx : entry.sampled_memory_indices) CHECK(idx < store_size);
        }
    }
}

TEST_CASE("logged transmission rate is exactly the factor product") {
    const RunLog log = run_scripted(scripted_config());
    for (const DailyEntry& d : log.daily) {
        CHECK(d.beta_eff ==
              log.config.world.base_transmission * d.behavior * d.policy_factor * d.noise);
    }
}

TEST_CASE("warm-up weekly means are zero through the first interval") {
    const RunLog log = run_scripted(scripted_config());
    CHECK(log.weekly[0].prev_week_mean_cases == 0.0);
    // week 2's decision at day 8 sees days 1..7
    double mean = 0.0;
    for (int d = 1; d <= 7; ++d) mean += log.daily[static_cast<size_t>(d - 1)].cases;
    mean /= 7.0;
    CHECK(log.weekly[1].prev_week_mean_cases == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("changing the memory seed never moves the epidemic under a scripted agent") {
    RunConfig cfg = scripted_config();
    const RunLog a = run_scripted(cfg);
    cfg.memory_seed = 4242;
    const RunLog b = run_scripted(cfg);
    REQUIRE(a.daily.size() == b.daily.size());
    for (std::size_t i = 0; i < a.daily.size(); ++i) CHECK(a.daily[i] == b.daily[i]);
    // the sampled memories themselves may differ
    CHECK(a.weekly.size() == b.weekly.size());
}

TEST_CASE("noise sequences are paired across worlds and conditions at equal seeds") {
    RunConfig w1 = scripted_config();
    RunConfig w2 = scripted_config();
    w2.world.mode = WorldMode::World2;
    w2.agent = AgentKind::Knowledge;  // label only; decisions stay scripted
    const RunLog a = run_scripted(w1);
    const RunLog b = run_scripted(w2);
    REQUIRE(a.daily.size() == b.daily.size());
    for (std::size_t i = 0; i < a.daily.size(); ++i) CHECK(a.daily[i].noise == b.daily[i].noise);
}

TEST_CASE("always-open run with unit noise reproduces the final-size oracle") {
    RunConfig cfg = scripted_config();
    cfg.world.noise_lo = 1.0;
    cfg.world.noise_hi = 1.0;
    CallbackAgent open_agent([](const DecisionContext& ctx) {
        AgentDecision d;
        d.prediction_without_policy = round_half_up(ctx.last_week_mean_cases);
        d.prediction_with_new_policy = d.prediction_without_policy;
        d.shutdown_percentage = 0.0;
        return d;
    });
    const RunLog log = run_simulation(cfg, open_agent);
    CHECK(log.summary.cumulative_cases == doctest::Approx(796812.0).epsilon(0.02));
}

TEST_CASE("memory records carry the post-step decision-day outcome into prompts") {
    // capture the week-6 prompt: its memory block must quote, for each of
    // weeks 1..5, the daily cases recorded on that week's decision day
    RunConfig cfg;
    cfg.agent = AgentKind::Base;
    cfg.source = DecisionSource::Llm;
    std::string week6_prompt;
    MockGateway gateway([&week6_prompt](const std::string& prompt, const CallMeta& meta) {
        if (meta.week == 6 && week6_prompt.empty()) week6_prompt = prompt;
        return std::string(kParseableBody);
    });
    LlmAgent agent(gateway, 1);
    const RunLog log = run_simulation(cfg, agent);
    REQUIRE_FALSE(log.failed);
    REQUIRE_FALSE(week6_prompt.empty());
    for (int week = 1; week <= 5; ++week) {
        const double decision_day_cases = log.daily[static_cast<size_t>((week - 1) * 7)].cases;
        const std::string line = "- On Week " + std::to_string(week) +
                                 ", the number of cases was " +
                                 std::to_string(round_half_up(decision_day_cases)) +
                                 " and your shutdown level was 0%.";
        INFO("missing memory line: ", line);
        CHECK(week6_prompt.find(line) != std::string::npos);
    }
}

TEST_CASE("mock-backed LLM run fills decisions, prompt hashes, and transcripts replay") {
    const fs::path dir = temp_dir("mockrun");

    RunConfig cfg;
    cfg.agent = AgentKind::Base;
    cfg.source = DecisionSource::Llm;

    MockGateway inner([](const std::string&, const CallMeta&) {
        return std::string(kParseableBody);
    });
    RunLog recorded;
    {
        TranscriptRecorder recorder(inner, dir / "transcript.jsonl");
        LlmAgent agent(recorder, 1);
        recorded = run_simulation(cfg, agent);
    }
    REQUIRE_FALSE(recorded.failed);
    for (const WeeklyEntry& entry : recorded.weekly) {
        if (entry.week >= 6) {
            CHECK(entry.agent_decided);
            CHECK_FALSE(entry.prompt_hash.empty());
            CHECK(entry.decision.prediction_without_policy == 3);
        }
    }

    TranscriptReplayer replayer(dir / "transcript.jsonl");
    LlmAgent replay_agent(replayer, 1);
    const RunLog replayed = run_simulation(cfg, replay_agent);
    CHECK(runlog_bytes(replayed) == runlog_bytes(recorded));

    fs::remove_all(dir);
}

TEST_CASE("a run that cannot parse any response fails with a partial log") {
    RunConfig cfg;
    cfg.agent = AgentKind::Base;
    cfg.source = DecisionSource::Llm;
    MockGateway gateway([](const std::string&, const CallMeta&) { return std::string("?!"); });
    LlmAgent agent(gateway, 1);
    const RunLog log = run_simulation(cfg, agent);
    CHECK(log.failed);
    CHECK(log.failure_reason.find("parse failure") == 0);
    CHECK(log.daily.size() == 35);  // five warm-up weeks simulated, week 6 aborted
}

TEST_CASE("runlogs survive a save/load round trip and reject truncation") {
    const fs::path dir = temp_dir("persist");
    const RunLog log = run_scripted(scripted_config());
    const fs::path path = dir / "runlog.json";
    save_runlog(log, path);

    const RunLog loaded = load_runlog(path);
    CHECK(loaded == log);
    CHECK(runlog_bytes(loaded) == runlog_bytes(log));

    CHECK(fs::file_size(path) < 5 * 1024 * 1024);

    // truncated file fails to load
    std::string bytes = runlog_bytes(log);
    bytes.resize(bytes.size() / 2);
    std::ofstream(dir / "broken.json", std::ios::binary) << bytes;
    CHECK_THROWS_AS(load_runlog(dir / "broken.json"), std::runtime_error);
    CHECK_THROWS_AS(load_runlog(dir / "missing.json"), std::runtime_error);

    fs::remove_all(dir);
}

TEST_CASE("schema version mismatches are load errors") {
    const fs::path dir = temp_dir("schema");
    RunLog log = run_scripted(scripted_config());
    nlohmann::json doc = to_json(log);
    doc["schema_version"] = 999;
    std::ofstream(dir / "runlog.json") << doc.dump();
    CHECK_THROWS_AS(load_runlog(dir / "runlog.json"), std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("scripted-variants experiment: accounting, pairing, and worker independence") {
    const fs::path dir_a = temp_dir("exp_a");
    ExperimentPlan plan;
    plan.base = scripted_config();
    plan.base.days = 70;
    plan.matrix.runs_per_cell = 2;
    plan.source = DecisionSource::Scripted;
    plan.out_dir = dir_a;
    plan.workers = 1;

    const ExperimentManifest manifest = run_experiment(plan);
    CHECK(manifest.runs.size() == 16);  // 2 worlds x 4 conditions x 2 runs
    CHECK(manifest.successful() == 16);
    CHECK(manifest.fully_failed_cells().empty());

    // paired seeds: same run index shares the noise sequence across cells
    const RunLog base0 = load_runlog(dir_a / "world1/base/run_00/runlog.json");
    const RunLog know0 = load_runlog(dir_a / "world2/knowledge/run_00/runlog.json");
    REQUIRE(base0.daily.size() == know0.daily.size());
    for (std::size_t i = 0; i < base0.daily.size(); ++i)
        CHECK(base0.daily[i].noise == know0.daily[i].noise);
    const RunLog base1 = load_runlog(dir_a / "world1/base/run_01/runlog.json");
    CHECK(base0.daily[0].noise != base1.daily[0].noise);

    // identical bytes when run with more workers
    const fs::path dir_b = temp_dir("exp_b");
    ExperimentPlan parallel = plan;
    parallel.out_dir = dir_b;
    parallel.workers = 4;
    run_experiment(parallel);
    for (const RunOutcome& r : manifest.runs) {
        std::ifstream f1(dir_a / r.relative_path, std::ios::binary);
        std::ifstream f2(dir_b / r.relative_path, std::ios::binary);
        const std::string b1((std::istreambuf_iterator<char>(f1)), {});
        const std::string b2((std::istreambuf_iterator<char>(f2)), {});
        CHECK(b1 == b2);
        CHECK_FALSE(b1.empty());
    }

    // loading groups successful runs into 8 cells of 2 logs
    const std::vector<LoadedCell> cells = load_experiment(dir_a);
    CHECK(cells.size() == 8);
    for (const LoadedCell& cell : cells) CHECK(cell.logs.size() == 2);

    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("recorded LLM experiments replay to identical bytes without a gateway") {
    const fs::path recorded_dir = temp_dir("exp_rec");
    ExperimentPlan plan;
    plan.base.days = 70;
    plan.base.ensemble_size = 3;
    plan.matrix.runs_per_cell = 1;
    plan.source = DecisionSource::Llm;
    plan.out_dir = recorded_dir;
    plan.record_transcripts = true;
    plan.gateway_factory = [](WorldMode world, AgentKind agent, int run) {
        // deterministic distinct bodies so every cell takes its own path
        return std::make_unique<MockGateway>(
            [world, agent, run](const std::string&, const CallMeta& meta) {
                const int pct =
                    (static_cast<int>(world) * 7 + static_cast<int>(agent) * 13 + run * 3 +
                     meta.week + meta.member) % 101;
                return std::string("{\"prediction_without_policy\": 10, \"reasoning\": \"r\", "
                                   "\"shutdown_percentage\": ") +
                       std::to_string(pct) + ", \"prediction_with_new_policy\": 8}";
            });
    };
    const ExperimentManifest recorded = run_experiment(plan);
    REQUIRE(recorded.successful() == 8);
    CHECK(fs::exists(recorded_dir / "world1/ensemble/run_00/transcript.jsonl"));

    const fs::path replayed_dir = temp_dir("exp_rep");
    ExperimentPlan replay = plan;
    replay.gateway_factory = nullptr;
    replay.record_transcripts = false;
    replay.replay_dir = recorded_dir;
    replay.out_dir = replayed_dir;
    const ExperimentManifest replayed = run_experiment(replay);
    REQUIRE(replayed.successful() == 8);

    for (const RunOutcome& r : recorded.runs) {
        std::ifstream f1(recorded_dir / r.relative_path, std::ios::binary);
        std::ifstream f2(replayed_dir / r.relative_path, std::ios::binary);
        const std::string b1((std::istreambuf_iterator<char>(f1)), {});
        const std::string b2((std::istreambuf_iterator<char>(f2)), {});
        CHECK(b1 == b2);
    }
    // ensemble cells consumed ensemble_size calls per decision week
    const RunLog ens = load_runlog(recorded_dir / "world1/ensemble/run_00/runlog.json");
    int decided = 0;
    for (const WeeklyEntry& w : ens.weekly) decided += w.agent_decided ? 1 : 0;
    std::ifstream transcript(recorded_dir / "world1/ensemble/run_00/transcript.jsonl");
    int lines = 0;
    for (std::string line; std::getline(transcript, line);) lines += line.empty() ? 0 : 1;
    CHECK(lines == decided * 3);

    fs::remove_all(recorded_dir);
    fs::remove_all(replayed_dir);
}

TEST_CASE("experiment records per-run failures without aborting the matrix") {
    const fs::path dir = temp_dir("exp_fail");
    ExperimentPlan plan;
    plan.base.days = 70;
    plan.matrix.runs_per_cell = 1;
    plan.matrix.worlds = {WorldMode::World1};
    plan.matrix.agents = {AgentKind::Base};
    plan.source = DecisionSource::Llm;
    plan.out_dir = dir;
    plan.gateway_factory = [](WorldMode, AgentKind, int) {
        return std::make_unique<MockGateway>(std::vector<std::string>{"junk", "junk", "junk"});
    };
    const ExperimentManifest manifest = run_experiment(plan);
    CHECK(manifest.runs.size() == 1);
    CHECK(manifest.successful() == 0);
    CHECK(manifest.fully_failed_cells() == std::vector<std::string>{"world1/base"});
    // the partial log was still persisted
    const RunLog partial = load_runlog(dir / "world1/base/run_00/runlog.json");
    CHECK(partial.failed);
    fs::remove_all(dir);
}

TEST_CASE("make_agent wires ensembles and requires a gateway for LLM kinds") {
    RunConfig cfg;
    cfg.agent = AgentKind::Ensemble;
    cfg.source = DecisionSource::Llm;
    cfg.ensemble_size = 10;
    CHECK_THROWS_AS(make_agent(cfg, nullptr), std::invalid_argument);

    int calls = 0;
    MockGateway gateway([&calls](const std::string&, const CallMeta&) {
        ++calls;
        return std::string(kParseableBody);
    });
    auto agent = make_agent(cfg, &gateway);
    DecisionContext ctx;
    ctx.week = 6;
    agent->decide(ctx);
    CHECK(calls == 10);  // ten independent requests for one ensemble decision

    cfg.source = DecisionSource::Scripted;
    auto scripted = make_agent(cfg, nullptr);
    CHECK(scripted->last_prompt() == nullptr);
}

TEST_CASE("knowledge selection follows condition and world") {
    RunConfig cfg;
    cfg.agent = AgentKind::Knowledge;
    cfg.world.mode = WorldMode::World1;
    CHECK(knowledge_for(cfg) == KnowledgeMode::World1);
    cfg.world.mode = WorldMode::World2;
    CHECK(knowledge_for(cfg) == KnowledgeMode::World2);
    cfg.agent = AgentKind::EnsembleKnowledge;
    CHECK(knowledge_for(cfg) == KnowledgeMode::World2);
    cfg.agent = AgentKind::Base;
    CHECK(knowledge_for(cfg) == KnowledgeMode::None);
    cfg.agent = AgentKind::Ensemble;
    CHECK(knowledge_for(cfg) == KnowledgeMode::None);
}

TEST_SUITE_END();
