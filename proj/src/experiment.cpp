#include "polisim/experiment.hpp"

#include <atomic>
#include <fstream>
#include <map>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "polisim/harness.hpp"

namespace polisim {

using nlohmann::json;

std::size_t ExperimentManifest::successful() const {
    std::size_t n = 0;
    for (const RunOutcome& r : runs) n += r.ok ? 1 : 0;
    return n;
}

std::vector<std::string> ExperimentManifest::fully_failed_cells() const {
    std::map<std::string, std::pair<int, int>> counts;  // cell -> (failed, total)
    for (const RunOutcome& r : runs) {
        auto& c = counts[to_string(r.world) + "/" + to_string(r.agent)];
        c.second += 1;
        if (!r.ok) c.first += 1;
    }
    std::vector<std::string> failed;
    for (const auto& [cell, c] : counts)
        if (c.first == c.second) failed.push_back(cell);
    return failed;
}

std::filesystem::path run_dir(const std::filesystem::path& root, WorldMode world,
                              AgentKind agent, int run_index) {
    char run_name[16];
    std::snprintf(run_name, sizeof(run_name), "run_%02d", run_index);
    return root / to_string(world) / to_string(agent) / run_name;
}

namespace {

struct Task {
    WorldMode world;
    AgentKind agent;
    int run_index;
};

RunOutcome execute_task(const ExperimentPlan& plan, const Task& task,
                        ChatGateway* shared_gateway) {
    RunOutcome outcome;
    outcome.world = task.world;
    outcome.agent = task.agent;
    outcome.run_index = task.run_index;

    const std::filesystem::path dir =
        run_dir(plan.out_dir, task.world, task.agent, task.run_index);
    const std::filesystem::path log_path = dir / "runlog.json";

    try {
        RunConfig cfg = plan.base;
        cfg.world.mode = task.world;
        cfg.agent = task.agent;
        cfg.source = plan.source;
        cfg.world_seed = plan.base_seed + static_cast<std::uint64_t>(task.run_index);
        cfg.memory_seed = plan.base_seed + static_cast<std::uint64_t>(task.run_index);

        std::filesystem::create_directories(dir);

        std::unique_ptr<ChatGateway> owned;
        ChatGateway* gateway = shared_gateway;
        if (plan.gateway_factory) {
            owned = plan.gateway_factory(task.world, task.agent, task.run_index);
            gateway = owned.get();
        } else if (!plan.replay_dir.empty()) {
            owned = std::make_unique<TranscriptReplayer>(
                run_dir(plan.replay_dir, task.world, task.agent, task.run_index) /
                "transcript.jsonl");
            gateway = owned.get();
        }

        std::unique_ptr<TranscriptRecorder> recorder;
        if (plan.record_transcripts && cfg.source == DecisionSource::Llm) {
            if (gateway == nullptr) throw std::invalid_argument("no gateway to record");
            recorder = std::make_unique<TranscriptRecorder>(*gateway, dir / "transcript.jsonl");
            gateway = recorder.get();
        }

        std::unique_ptr<PolicyAgent> agent = make_agent(cfg, gateway);
        RunLog log = run_simulation(cfg, *agent);
        save_runlog(log, log_path);

        outcome.relative_path =
            std::filesystem::relative(log_path, plan.out_dir).generic_string();
        outcome.ok = !log.failed;
        outcome.error = log.failure_reason;
    } catch (const std::exception& e) {
        outcome.ok = false;
        outcome.error = e.what();
    }
    return outcome;
}

}  // namespace

ExperimentManifest run_experiment(const ExperimentPlan& plan) {
    plan.base.validate();
    std::filesystem::create_directories(plan.out_dir);

    std::vector<Task> tasks;
    for (WorldMode world : plan.matrix.worlds)
        for (AgentKind agent : plan.matrix.agents)
            for (int r = 0; r < plan.matrix.runs_per_cell; ++r)
                tasks.push_back(Task{world, agent, r});

    std::unique_ptr<HttpGateway> http;
    if (plan.source == DecisionSource::Llm && !plan.gateway_factory &&
        plan.replay_dir.empty()) {
        http = std::make_unique<HttpGateway>(plan.gateway);
    }

    std::vector<RunOutcome> outcomes(tasks.size());
    std::atomic<std::size_t> next{0};
    const int workers = std::max(1, plan.workers);
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1))
            outcomes[i] = execute_task(plan, tasks[i], http.get());
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    ExperimentManifest manifest;
    manifest.runs = std::move(outcomes);

    json doc;
    doc["schema_version"] = 1;
    doc["base_seed"] = plan.base_seed;
    doc["runs_per_cell"] = plan.matrix.runs_per_cell;
    doc["source"] = to_string(plan.source);
    doc["base_config"] = to_json(plan.base);
    json runs = json::array();
    for (const RunOutcome& r : manifest.runs) {
        json row;
        row["world"] = to_string(r.world);
        row["agent"] = to_string(r.agent);
        row["run"] = r.run_index;
        row["path"] = r.relative_path;
        row["ok"] = r.ok;
        row["error"] = r.error;
        runs.push_back(std::move(row));
    }
    doc["runs"] = std::move(runs);

    const std::filesystem::path manifest_path = plan.out_dir / "manifest.json";
    const std::filesystem::path tmp = manifest_path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << doc.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, manifest_path);
    return manifest;
}

std::vector<LoadedCell> load_experiment(const std::filesystem::path& out_dir) {
    std::ifstream in(out_dir / "manifest.json");
    if (!in) throw std::runtime_error("no manifest.json under " + out_dir.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw std::runtime_error("corrupt manifest.json");

    std::vector<LoadedCell> cells;
    auto cell_for = [&](WorldMode world, AgentKind agent) -> LoadedCell& {
        for (LoadedCell& c : cells)
            if (c.world == world && c.agent == agent) return c;
        cells.push_back(LoadedCell{world, agent, {}});
        return cells.back();
    };
    for (const json& row : doc.at("runs")) {
        if (!row.at("ok").get<bool>()) continue;
        const WorldMode world = world_mode_from_string(row.at("world").get<std::string>());
        const AgentKind agent = agent_kind_from_string(row.at("agent").get<std::string>());
        cell_for(world, agent)
            .logs.push_back(load_runlog(out_dir / row.at("path").get<std::string>()));
    }
    return cells;
}

}  // namespace polisim
