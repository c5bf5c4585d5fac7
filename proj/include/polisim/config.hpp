#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "polisim/epidemic.hpp"

namespace polisim {

// The four experimental conditions plus the deterministic test policy.
enum class AgentKind { Base, Knowledge, Ensemble, EnsembleKnowledge, Scripted };

// Whether decisions come from the chat gateway or the threshold rule. The
// scripted-variants smoke matrix keeps condition labels while driving every
// cell with the rule, so this is recorded separately from AgentKind.
enum class DecisionSource { Llm, Scripted };

struct RunConfig {
    int days = 365;
    int decision_interval = 7;  // days between decisions
    int start_week = 6;         // first week the agent is consulted
    int memory_sample = 5;      // memories retrieved per decision
    double memory_decay = 0.1;
    WorldConfig world;
    AgentKind agent = AgentKind::Scripted;
    DecisionSource source = DecisionSource::Scripted;
    int ensemble_size = 10;  // gateway calls per decision in ensemble conditions
    std::uint64_t world_seed = 42;
    std::uint64_t memory_seed = 42;

    void validate() const;  // throws std::invalid_argument

    bool operator==(const RunConfig&) const = default;
};

std::string to_string(WorldMode mode);
std::string to_string(AgentKind kind);
std::string to_string(DecisionSource source);
WorldMode world_mode_from_string(const std::string& name);
AgentKind agent_kind_from_string(const std::string& name);
DecisionSource decision_source_from_string(const std::string& name);

nlohmann::json to_json(const WorldConfig& config);
WorldConfig world_config_from_json(const nlohmann::json& obj);
nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& obj);

}  // namespace polisim
