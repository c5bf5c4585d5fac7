#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "polisim/memory.hpp"

namespace polisim {

class ChatGateway;

enum class KnowledgeMode { None, World1, World2 };

// Everything the policymaker sees at one decision point.
struct DecisionContext {
    int week = 0;
    double last_week_mean_cases = 0.0;  // previous week's mean daily cases
    double last_restriction_pct = 0.0;  // prior shutdown level, 0..100
    std::vector<MemoryRecord> memories;  // chronological
    KnowledgeMode knowledge = KnowledgeMode::None;
};

// The four-field structured decision. Key names of the wire format:
// prediction_without_policy, shutdown_percentage, prediction_with_new_policy,
// reasoning.
struct AgentDecision {
    std::int64_t prediction_without_policy = 0;
    double shutdown_percentage = 0.0;  // 0..100
    std::int64_t prediction_with_new_policy = 0;
    std::string reasoning;

    bool operator==(const AgentDecision&) const = default;
};

// Half-up rounding used everywhere a case count or averaged prediction is
// rendered as an integer.
std::int64_t round_half_up(double value);

// Percentage rendering for prompts: integral values print bare ("30"),
// fractional ones with one decimal ("32.5").
std::string format_pct(double pct);

// Scenario-specific educational paragraph; empty string for None.
std::string knowledge_text(KnowledgeMode mode);

// Assembles the weekly prompt: role preamble, guiding principle, context
// block, flu-season anchor, reported cases, memory block, optional knowledge
// paragraph, output specification. Pure function of the context.
std::string build_prompt(const DecisionContext& ctx);

// Extracts the first JSON object from the response body, validates the four
// keys, clamps shutdown to [0,100] and predictions to >= 0 (rounding
// non-integers half-up). Throws ParseFailure otherwise.
AgentDecision parse_decision(const std::string& raw);

// Wire-format serialization (inverse of parse_decision).
std::string decision_to_json(const AgentDecision& decision);

// Arithmetic mean of the numeric fields; predictions are rounded half-up
// after averaging; the first decision's reasoning is retained.
AgentDecision ensemble_decide(const std::vector<AgentDecision>& decisions);

// Deterministic test policy: 0% below 700 mean weekly cases, 30% below 3000,
// 70% otherwise; both predictions echo the rounded mean.
AgentDecision scripted_threshold_decide(const DecisionContext& ctx);

class PolicyAgent {
public:
    virtual ~PolicyAgent() = default;
    virtual AgentDecision decide(const DecisionContext& ctx) = 0;
    // Prompt sent for the most recent decision, if the agent builds one.
    virtual const std::string* last_prompt() const { return nullptr; }
};

class ScriptedThresholdAgent final : public PolicyAgent {
public:
    AgentDecision decide(const DecisionContext& ctx) override {
        return scripted_threshold_decide(ctx);
    }
};

// Test helper: wraps an arbitrary decision rule.
class CallbackAgent final : public PolicyAgent {
public:
    explicit CallbackAgent(std::function<AgentDecision(const DecisionContext&)> fn)
        : fn_(std::move(fn)) {}
    AgentDecision decide(const DecisionContext& ctx) override { return fn_(ctx); }

private:
    std::function<AgentDecision(const DecisionContext&)> fn_;
};

// LLM-backed policymaker. Builds one prompt per decision, queries the
// gateway once per ensemble member, and aggregates. A response that fails to
// parse is retried with the identical prompt up to parse_retry_budget total
// attempts before the decision (and hence the run) fails.
class LlmAgent final : public PolicyAgent {
public:
    LlmAgent(ChatGateway& gateway, int ensemble_size = 1, int parse_retry_budget = 3);

    AgentDecision decide(const DecisionContext& ctx) override;

    const std::string* last_prompt() const override { return &last_prompt_; }

private:
    ChatGateway& gateway_;
    int ensemble_size_;
    int parse_retry_budget_;
    std::string last_prompt_;
};

}  // namespace polisim
