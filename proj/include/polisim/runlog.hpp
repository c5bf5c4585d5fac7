#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polisim/agents.hpp"
#include "polisim/config.hpp"
#include "polisim/epidemic.hpp"

namespace polisim {

struct DailyEntry {
    EpidemicState state;  // post-step; state.day is the 1-based day index
    double beta_eff = 0.0;
    double behavior = 0.0;       // b
    double policy_factor = 0.0;  // g
    double noise = 0.0;          // epsilon
    double cases = 0.0;          // daily reported cases E/L

    bool operator==(const DailyEntry&) const = default;
};

struct WeeklyEntry {
    int week = 0;
    double prev_week_mean_cases = 0.0;  // input to this week's decision
    double restriction = 0.0;           // fraction in force this week
    bool agent_decided = false;
    AgentDecision decision;  // meaningful only when agent_decided
    std::vector<std::size_t> sampled_memory_indices;
    std::string prompt_hash;  // empty when no prompt was built

    bool operator==(const WeeklyEntry&) const = default;
};

struct RunSummary {
    double cumulative_cases = 0.0;
    double mean_transmission_reduction = 0.0;
    double cumulative_prediction_error = 0.0;

    bool operator==(const RunSummary&) const = default;
};

// Complete trace of one run: every metric, plot, and regression row is
// recomputable from this.
struct RunLog {
    int schema_version = 1;
    RunConfig config;
    std::vector<DailyEntry> daily;
    std::vector<WeeklyEntry> weekly;
    RunSummary summary;
    bool failed = false;
    std::string failure_reason;

    bool operator==(const RunLog&) const = default;
};

nlohmann::json to_json(const RunLog& log);
RunLog runlog_from_json(const nlohmann::json& obj);

// Exact serialized bytes (also what save_runlog writes); useful for
// bit-identity checks.
std::string runlog_bytes(const RunLog& log);

// Atomic write (temp file + rename).
void save_runlog(const RunLog& log, const std::filesystem::path& path);
RunLog load_runlog(const std::filesystem::path& path);  // throws std::runtime_error

// FNV-1a 64-bit, hex encoded; the prompt-hash convention for weekly entries.
std::string fnv1a_hex(const std::string& text);

}  // namespace polisim
