#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "polisim/analysis.hpp"
#include "polisim/config.hpp"
#include "polisim/gateway.hpp"
#include "polisim/runlog.hpp"

namespace polisim {

struct ExperimentMatrix {
    std::vector<WorldMode> worlds{WorldMode::World1, WorldMode::World2};
    std::vector<AgentKind> agents{AgentKind::Base, AgentKind::Knowledge, AgentKind::Ensemble,
                                  AgentKind::EnsembleKnowledge};
    int runs_per_cell = 10;
};

struct ExperimentPlan {
    RunConfig base;  // per-cell runs override world.mode, agent, and seeds
    ExperimentMatrix matrix;
    std::uint64_t base_seed = 42;  // run r uses base_seed + r in every cell
    std::filesystem::path out_dir = "out";
    int workers = 1;
    DecisionSource source = DecisionSource::Llm;
    bool record_transcripts = false;
    std::filesystem::path replay_dir;  // non-empty: replay recorded transcripts
    GatewayConfig gateway;

    // Test hook: overrides the gateway for each run (e.g. a mock). Recording
    // still wraps whatever this returns.
    std::function<std::unique_ptr<ChatGateway>(WorldMode, AgentKind, int run_index)>
        gateway_factory;
};

struct RunOutcome {
    WorldMode world = WorldMode::World1;
    AgentKind agent = AgentKind::Base;
    int run_index = 0;
    std::string relative_path;  // runlog location under out_dir, empty if not written
    bool ok = false;
    std::string error;
};

struct ExperimentManifest {
    std::vector<RunOutcome> runs;

    std::size_t successful() const;
    // Cells in which every run failed.
    std::vector<std::string> fully_failed_cells() const;
};

std::filesystem::path run_dir(const std::filesystem::path& root, WorldMode world,
                              AgentKind agent, int run_index);

// Executes the whole matrix with the same per-run seed list in every cell so
// noise sequences are paired across conditions. Runs execute in parallel up
// to `workers`; outputs and the manifest are deterministic regardless of
// scheduling. The manifest is written to <out_dir>/manifest.json.
ExperimentManifest run_experiment(const ExperimentPlan& plan);

// Reads a manifest directory back into per-cell logs (successful runs only).
std::vector<LoadedCell> load_experiment(const std::filesystem::path& out_dir);

}  // namespace polisim
