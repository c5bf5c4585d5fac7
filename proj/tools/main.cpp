#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "polisim/analysis.hpp"
#include "polisim/errors.hpp"
#include "polisim/experiment.hpp"
#include "polisim/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polisim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw std::invalid_argument("config file is not valid JSON: " + path);
    return doc;
}

GatewayConfig gateway_from_config(const json& doc) {
    GatewayConfig cfg = GatewayConfig::from_env();
    if (!doc.contains("gateway")) return cfg;
    const json& g = doc["gateway"];
    cfg.endpoint_url = g.value("endpoint_url", cfg.endpoint_url);
    cfg.model = g.value("model", cfg.model);
    cfg.timeout_seconds = g.value("timeout_seconds", cfg.timeout_seconds);
    cfg.retry_budget = g.value("retry_budget", cfg.retry_budget);
    cfg.temperature = g.value("temperature", cfg.temperature);
    cfg.requests_per_second = g.value("requests_per_second", cfg.requests_per_second);
    return cfg;
}

void print_summary(const RunLog& log) {
    std::printf("days simulated:              %zu\n", log.daily.size());
    std::printf("cumulative cases:            %.1f\n", log.summary.cumulative_cases);
    std::printf("mean transmission reduction: %.4f\n", log.summary.mean_transmission_reduction);
    std::printf("cumulative prediction error: %.1f\n", log.summary.cumulative_prediction_error);
}

struct RunArgs {
    std::string config_path;
    std::string out_dir = "out/single";
    std::string agent;
    std::string world;
    std::optional<int> days;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> world_seed;
    std::optional<std::uint64_t> memory_seed;
    std::optional<int> ensemble_size;
    std::optional<double> noise_lo;
    std::optional<double> noise_hi;
    bool record_transcript = false;
    std::string replay_transcript;
};

int cmd_run(const RunArgs& args) {
    const json doc = load_config_file(args.config_path);
    RunConfig cfg = doc.contains("run") ? run_config_from_json(doc["run"]) : RunConfig{};

    if (!args.agent.empty()) cfg.agent = agent_kind_from_string(args.agent);
    if (!args.world.empty()) cfg.world.mode = world_mode_from_string(args.world);
    if (args.days) cfg.days = *args.days;
    if (args.seed) { cfg.world_seed = *args.seed; cfg.memory_seed = *args.seed; }
    if (args.world_seed) cfg.world_seed = *args.world_seed;
    if (args.memory_seed) cfg.memory_seed = *args.memory_seed;
    if (args.ensemble_size) cfg.ensemble_size = *args.ensemble_size;
    if (args.noise_lo) cfg.world.noise_lo = *args.noise_lo;
    if (args.noise_hi) cfg.world.noise_hi = *args.noise_hi;
    cfg.source = cfg.agent == AgentKind::Scripted ? DecisionSource::Scripted
                                                  : DecisionSource::Llm;
    cfg.validate();

    std::unique_ptr<ChatGateway> gateway;
    std::unique_ptr<TranscriptRecorder> recorder;
    ChatGateway* active = nullptr;
    if (cfg.source == DecisionSource::Llm) {
        if (!args.replay_transcript.empty()) {
            gateway = std::make_unique<TranscriptReplayer>(args.replay_transcript);
        } else {
            GatewayConfig gw = gateway_from_config(doc);
            if (gw.api_key.empty())
                throw std::invalid_argument(
                    "agent '" + to_string(cfg.agent) +
                    "' needs credentials: set OPENAI_API_KEY or use --replay-transcript");
            gateway = std::make_unique<HttpGateway>(gw);
        }
        active = gateway.get();
        if (args.record_transcript) {
            fs::create_directories(args.out_dir);
            recorder = std::make_unique<TranscriptRecorder>(
                *active, fs::path(args.out_dir) / "transcript.jsonl");
            active = recorder.get();
        }
    }

    std::unique_ptr<PolicyAgent> agent = make_agent(cfg, active);
    RunLog log = run_simulation(cfg, *agent);
    save_runlog(log, fs::path(args.out_dir) / "runlog.json");
    std::printf("runlog: %s\n", (fs::path(args.out_dir) / "runlog.json").c_str());

    if (log.failed) {
        std::fprintf(stderr, "run failed: %s\n", log.failure_reason.c_str());
        return kExitRuntime;
    }
    print_summary(log);
    return kExitOk;
}

struct ExperimentArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<int> runs;
    std::string agent_kinds = "llm";  // llm | scripted-variants
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
    std::optional<int> days;
    bool record_transcripts = false;
    std::string replay_dir;
};

int cmd_experiment(const ExperimentArgs& args) {
    const json doc = load_config_file(args.config_path);

    ExperimentPlan plan;
    plan.base = doc.contains("run") ? run_config_from_json(doc["run"]) : RunConfig{};
    plan.gateway = gateway_from_config(doc);
    if (doc.contains("experiment")) {
        const json& e = doc["experiment"];
        plan.matrix.runs_per_cell = e.value("runs_per_cell", plan.matrix.runs_per_cell);
        plan.base_seed = e.value("base_seed", plan.base_seed);
        plan.workers = e.value("workers", plan.workers);
    }
    if (args.runs) plan.matrix.runs_per_cell = *args.runs;
    if (args.workers) plan.workers = *args.workers;
    if (args.seed) plan.base_seed = *args.seed;
    if (args.days) plan.base.days = *args.days;
    plan.out_dir = args.out_dir;
    plan.record_transcripts = args.record_transcripts;
    plan.replay_dir = args.replay_dir;

    if (args.agent_kinds == "scripted-variants") {
        plan.source = DecisionSource::Scripted;
    } else if (args.agent_kinds == "llm") {
        plan.source = DecisionSource::Llm;
        if (plan.replay_dir.empty() && plan.gateway.api_key.empty())
            throw std::invalid_argument(
                "LLM experiment needs credentials: set OPENAI_API_KEY, or use --replay, or "
                "--agent-kinds scripted-variants");
    } else {
        throw std::invalid_argument("--agent-kinds must be 'llm' or 'scripted-variants'");
    }

    const ExperimentManifest manifest = run_experiment(plan);
    std::printf("runs: %zu total, %zu succeeded\n", manifest.runs.size(),
                manifest.successful());
    std::printf("manifest: %s\n", (plan.out_dir / "manifest.json").c_str());

    bool any_failure = manifest.successful() != manifest.runs.size();
    if (any_failure) {
        for (const RunOutcome& r : manifest.runs)
            if (!r.ok)
                std::fprintf(stderr, "failed: %s/%s run %d: %s\n", to_string(r.world).c_str(),
                             to_string(r.agent).c_str(), r.run_index, r.error.c_str());
    }
    const auto dead_cells = manifest.fully_failed_cells();
    if (!dead_cells.empty()) {
        for (const std::string& cell : dead_cells)
            std::fprintf(stderr, "cell fully failed: %s\n", cell.c_str());
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_analyze(const std::string& in_dir) {
    const std::vector<LoadedCell> cells = load_experiment(in_dir);

    // Every cell named in the manifest must have at least one usable log.
    std::ifstream in(fs::path(in_dir) / "manifest.json");
    json doc = json::parse(in);
    std::vector<std::string> absent;
    for (const json& row : doc.at("runs")) {
        const std::string cell =
            row.at("world").get<std::string>() + "/" + row.at("agent").get<std::string>();
        const WorldMode world = world_mode_from_string(row.at("world").get<std::string>());
        const AgentKind agent = agent_kind_from_string(row.at("agent").get<std::string>());
        bool found = false;
        for (const LoadedCell& c : cells)
            if (c.world == world && c.agent == agent && !c.logs.empty()) found = true;
        if (!found && std::find(absent.begin(), absent.end(), cell) == absent.end())
            absent.push_back(cell);
    }
    if (!absent.empty()) {
        for (const std::string& cell : absent)
            std::fprintf(stderr, "no usable logs for cell: %s\n", cell.c_str());
        return kExitRuntime;
    }

    const fs::path out = fs::path(in_dir) / "analysis";
    write_metrics_csv(out / "metrics_summary.csv", summarize_cells(cells));
    write_timeseries_csvs(out, cells);
    write_regression_csvs(out, cells);
    std::printf("analysis tables written to %s\n", out.c_str());
    return kExitOk;
}

int cmd_plot(const std::string& in_dir) {
    const std::vector<LoadedCell> cells = load_experiment(in_dir);
    if (cells.empty()) {
        std::fprintf(stderr, "no successful runs under %s\n", in_dir.c_str());
        return kExitRuntime;
    }
    const fs::path out = fs::path(in_dir) / "plots";
    emit_plots(out, cells);
    std::printf("plots written to %s\n", out.c_str());
    return kExitOk;
}

int cmd_replay(const std::string& run_dir_path, const std::string& out_dir) {
    const fs::path dir = run_dir_path;
    const RunLog original = load_runlog(dir / "runlog.json");
    if (original.config.source != DecisionSource::Llm) {
        std::fprintf(stderr, "run %s was not LLM-backed; nothing to replay\n",
                     dir.c_str());
        return kExitUsage;
    }

    TranscriptReplayer replayer(dir / "transcript.jsonl");
    std::unique_ptr<PolicyAgent> agent = make_agent(original.config, &replayer);
    RunLog replayed = run_simulation(original.config, *agent);

    if (!out_dir.empty()) save_runlog(replayed, fs::path(out_dir) / "runlog.json");

    if (runlog_bytes(replayed) == runlog_bytes(original)) {
        std::printf("replay is bit-identical to the recorded run\n");
        return kExitOk;
    }
    std::fprintf(stderr, "replay DIVERGED from the recorded run\n");
    return kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SEIR policy-agent simulation and experiment harness"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "Execute one simulation run");
    run->add_option("--config", run_args.config_path, "JSON config file");
    run->add_option("--out", run_args.out_dir, "output directory");
    run->add_option("--agent", run_args.agent,
                    "base|knowledge|ensemble|ensemble-knowledge|scripted");
    run->add_option("--world", run_args.world, "1|2");
    run->add_option("--days", run_args.days, "simulation length in days");
    run->add_option("--seed", run_args.seed, "sets both world and memory seeds");
    run->add_option("--world-seed", run_args.world_seed, "world noise seed");
    run->add_option("--memory-seed", run_args.memory_seed, "memory sampling seed");
    run->add_option("--ensemble-k", run_args.ensemble_size, "ensemble size");
    run->add_option("--noise-lo", run_args.noise_lo, "noise lower bound");
    run->add_option("--noise-hi", run_args.noise_hi, "noise upper bound");
    run->add_flag("--record-transcript", run_args.record_transcript,
                  "capture request/response transcript");
    run->add_option("--replay-transcript", run_args.replay_transcript,
                    "replay a recorded transcript instead of calling the API");

    ExperimentArgs exp_args;
    CLI::App* experiment = app.add_subcommand("experiment", "Run the 2x4 experiment matrix");
    experiment->add_option("--config", exp_args.config_path, "JSON config file");
    experiment->add_option("--out", exp_args.out_dir, "output directory");
    experiment->add_option("--runs", exp_args.runs, "runs per cell");
    experiment->add_option("--agent-kinds", exp_args.agent_kinds,
                           "llm | scripted-variants (deterministic smoke matrix)");
    experiment->add_option("--workers", exp_args.workers, "parallel runs");
    experiment->add_option("--seed", exp_args.seed, "base seed (run r uses seed+r)");
    experiment->add_option("--days", exp_args.days, "override simulation length");
    experiment->add_flag("--record-transcripts", exp_args.record_transcripts,
                         "capture per-run transcripts");
    experiment->add_option("--replay", exp_args.replay_dir,
                           "reproduce a recorded experiment from its output directory");

    std::string analyze_in = "out";
    CLI::App* analyze = app.add_subcommand("analyze", "Emit metric and regression tables");
    analyze->add_option("--in", analyze_in, "experiment output directory");

    std::string plot_in = "out";
    CLI::App* plot = app.add_subcommand("plot", "Emit SVG figures");
    plot->add_option("--in", plot_in, "experiment output directory");

    std::string replay_run_dir;
    std::string replay_out;
    CLI::App* replay = app.add_subcommand("replay", "Re-run one run from its transcript");
    replay->add_option("--run-dir", replay_run_dir, "directory holding runlog.json + transcript")
        ->required();
    replay->add_option("--out", replay_out, "where to write the replayed runlog");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed()) return cmd_run(run_args);
        if (experiment->parsed()) return cmd_experiment(exp_args);
        if (analyze->parsed()) return cmd_analyze(analyze_in);
        if (plot->parsed()) return cmd_plot(plot_in);
        if (replay->parsed()) return cmd_replay(replay_run_dir, replay_out);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}
