#include "polisim/agents.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "polisim/errors.hpp"
#include "polisim/gateway.hpp"

namespace polisim {

using nlohmann::json;

std::int64_t round_half_up(double value) {
    return static_cast<std::int64_t>(std::floor(value + 0.5));
}

std::string format_pct(double pct) {
    const double nearest = std::round(pct);
    if (std::abs(pct - nearest) < 1e-9) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", nearest);
        return buf;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", pct);
    return buf;
}

namespace {

const char* kSharedKnowledgeOpening =
    "Here I provide some information to help you better understand epidemic dynamics. "
    "Epidemics are primarily governed by interacting feedback loops. First, there is the "
    "reinforcing (positive) feedback loop: infection breeds more infection. Without "
    "intervention, cases grow exponentially as each infected person spreads the disease to "
    "susceptible individuals. The second is the balancing feedback loop of depletion. As more "
    "people become infected and then immune after recovery, the pool of susceptible "
    "individuals shrinks, which naturally slows transmission over time.\n";

const char* kWorld1Knowledge =
    "Government restrictions can also affect the spread of the disease by influencing "
    "people's behavior. As you impose stricter measures on business and social activities, "
    "the probability of disease spread decreases. In simple terms, stronger shutdowns mean "
    "lower future infection rates-though naturally at an economic cost. In your town people "
    "ignore the disease unless the government imposes restrictions which they will comply "
    "with.\n"
    "When forecasting and making decisions, it is crucial to recognize that implementing or "
    "relaxing restrictive policies influences the spread of the disease.";

const char* kWorld2Knowledge =
    "In addition to these biological feedback loops, there are behavioral feedback loops "
    "that shape transmission. As cases rise, people tend to grow more cautious and "
    "voluntarily adopt protective behaviors such as masking, distancing, and avoiding "
    "crowds. These reactions reduce the transmission rate. Conversely, when cases decline, "
    "individuals often relax their guard, which can lead to increased transmission and a "
    "resurgence of cases. Most importantly for your role, government restrictions are also "
    "part of a behavioral feedback loop. As you impose stricter measures on business and "
    "social activities, the probability of disease spread decreases. In simple terms, "
    "stronger shutdowns mean lower future infection rates-though naturally at an economic "
    "cost. Your shutdown decisions do not operate in isolation; they interact with voluntary "
    "citizen behavior driven by perceived risk.\n"
    "When forecasting and making decisions, it is crucial to recognize that implementing or "
    "relaxing restrictive policies influences the spread of the disease and people's "
    "responses to those changes.";

}  // namespace

std::string knowledge_text(KnowledgeMode mode) {
    switch (mode) {
        case KnowledgeMode::None:
            return "";
        case KnowledgeMode::World1:
            return std::string(kSharedKnowledgeOpening) + kWorld1Knowledge;
        case KnowledgeMode::World2:
            return std::string(kSharedKnowledgeOpening) + kWorld2Knowledge;
    }
    return "";
}

std::string build_prompt(const DecisionContext& ctx) {
    std::ostringstream out;

    out << "You are Jennifer, the mayor of a city of one million people, facing an epidemic. "
           "Each week, you must decide the shutdown level for the city (0-100%).\n"
           "A pragmatic, democratically elected leader in your late forties with a background "
           "in public policy, you focus on results over politics. You rely on expert advice, "
           "accurate data, and trustable models. You balance economic growth, public safety, "
           "transportation, and housing, and you explain your decisions clearly so people "
           "understand your reasoning. You insist on transparency and evidence-based "
           "policies, and you track clear metrics of success. You are ambitious yet cautious, "
           "knowing your choices affect real people.\n\n";

    out << "Your guiding principle:\n"
           "The default stance should be to keep the city open (low shutdown levels). "
           "Restrictions should only be implemented when case numbers clearly justify them.\n\n";

    out << "It is early in the morning of Week " << ctx.week
        << ". You must decide the shutdown level for Week " << ctx.week << ".\n\n";

    out << "During flu season, there are seven hundred flu cases every week on average.\n\n";

    out << "Here are the officially reported cases:\n"
        << "- On Week " << ctx.week - 1 << ", the number of cases was "
        << round_half_up(ctx.last_week_mean_cases) << ". The shutdown level was "
        << format_pct(ctx.last_restriction_pct) << "%.\n\n";

    out << "You particularly remember the following incidents:\n";
    for (const MemoryRecord& m : ctx.memories) {
        out << "- On Week " << m.week << ", the number of cases was "
            << round_half_up(m.decision_day_cases) << " and your shutdown level was "
            << format_pct(m.restriction * 100.0) << "%.\n";
    }
    out << "\n";

    if (ctx.knowledge != KnowledgeMode::None) {
        out << knowledge_text(ctx.knowledge) << "\n\n";
    }

    out << "Based on the officially reported cases and your memories, you must:\n"
           "Predict cases without policy: How many cases do you expect for Week "
        << ctx.week << " if no shutdown is implemented (0%)?\n"
        << "Choose your new shutdown level: What shutdown level (0-100%) will you implement "
           "for Week "
        << ctx.week << "?\n"
        << "Predict cases with your new policy: How many cases do you expect for Week "
        << ctx.week << " after implementing your chosen shutdown level?\n\n";

    out << "Output only a single JSON object with these keys:\n"
           "- \"prediction_without_policy\": a non-negative integer representing your "
           "predicted cases if no shutdown is implemented.\n"
           "- \"reasoning\": a string with 1-2 sentences explaining your shutdown decision "
           "and how changing (or maintaining) the policy affects your case prediction.\n"
           "- \"shutdown_percentage\": a number from 0 to 100 representing the new shutdown "
           "level you choose. 0 is fully open. 100 is fully shut down.\n"
           "- \"prediction_with_new_policy\": a non-negative integer representing your "
           "predicted cases after implementing your new shutdown level.\n\n";

    out << "Respond with JSON only:\n"
           "{\"prediction_without_policy\": <integer>, \"reasoning\": \"<1-2 sentences "
           "explaining your logic>\", \"shutdown_percentage\": <0-100>, "
           "\"prediction_with_new_policy\": <integer>}";

    return out.str();
}

namespace {

// First balanced {...} span, honoring string literals and escapes.
std::string first_json_object(const std::string& text) {
    for (std::size_t start = text.find('{'); start != std::string::npos;
         start = text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            const char c = text[i];
            if (in_string) {
                if (c == '\\')
                    ++i;
                else if (c == '"')
                    in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            if (c == '{') ++depth;
            if (c == '}' && --depth == 0) return text.substr(start, i - start + 1);
        }
    }
    throw ParseFailure("no JSON object found in response body");
}

std::int64_t clamped_prediction(const json& value, const char* key) {
    if (!value.is_number()) throw ParseFailure(std::string(key) + " is not a number");
    const std::int64_t rounded = round_half_up(value.get<double>());
    return std::max<std::int64_t>(rounded, 0);
}

}  // namespace

AgentDecision parse_decision(const std::string& raw) {
    const std::string body = first_json_object(raw);
    json obj = json::parse(body, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) throw ParseFailure("response is not valid JSON");

    for (const char* key : {"prediction_without_policy", "shutdown_percentage",
                            "prediction_with_new_policy", "reasoning"}) {
        if (!obj.contains(key)) throw ParseFailure(std::string("missing key: ") + key);
    }
    if (!obj["reasoning"].is_string()) throw ParseFailure("reasoning is not a string");
    if (!obj["shutdown_percentage"].is_number())
        throw ParseFailure("shutdown_percentage is not a number");

    AgentDecision d;
    d.prediction_without_policy = clamped_prediction(obj["prediction_without_policy"],
                                                     "prediction_without_policy");
    d.prediction_with_new_policy = clamped_prediction(obj["prediction_with_new_policy"],
                                                      "prediction_with_new_policy");
    d.shutdown_percentage = std::clamp(obj["shutdown_percentage"].get<double>(), 0.0, 100.0);
    d.reasoning = obj["reasoning"].get<std::string>();
    return d;
}

std::string decision_to_json(const AgentDecision& decision) {
    json obj;
    obj["prediction_without_policy"] = decision.prediction_without_policy;
    obj["reasoning"] = decision.reasoning;
    obj["shutdown_percentage"] = decision.shutdown_percentage;
    obj["prediction_with_new_policy"] = decision.prediction_with_new_policy;
    return obj.dump();
}

AgentDecision ensemble_decide(const std::vector<AgentDecision>& decisions) {
    if (decisions.empty()) throw std::logic_error("ensemble requires at least one decision");
    double pct = 0.0, without = 0.0, with = 0.0;
    for (const AgentDecision& d : decisions) {
        pct += d.shutdown_percentage;
        without += static_cast<double>(d.prediction_without_policy);
        with += static_cast<double>(d.prediction_with_new_policy);
    }
    const double k = static_cast<double>(decisions.size());
    AgentDecision out;
    out.shutdown_percentage = pct / k;
    out.prediction_without_policy = round_half_up(without / k);
    out.prediction_with_new_policy = round_half_up(with / k);
    out.reasoning = decisions.front().reasoning;
    return out;
}

AgentDecision scripted_threshold_decide(const DecisionContext& ctx) {
    const double mean = ctx.last_week_mean_cases;
    AgentDecision d;
    if (mean < 700.0)
        d.shutdown_percentage = 0.0;
    else if (mean < 3000.0)
        d.shutdown_percentage = 30.0;
    else
        d.shutdown_percentage = 70.0;
    d.prediction_without_policy = round_half_up(mean);
    d.prediction_with_new_policy = round_half_up(mean);
    d.reasoning = "threshold rule on last week's mean cases";
    return d;
}

LlmAgent::LlmAgent(ChatGateway& gateway, int ensemble_size, int parse_retry_budget)
    : gateway_(gateway), ensemble_size_(ensemble_size), parse_retry_budget_(parse_retry_budget) {
    if (ensemble_size_ < 1) throw std::invalid_argument("ensemble_size must be >= 1");
    if (parse_retry_budget_ < 1) throw std::invalid_argument("parse_retry_budget must be >= 1");
}

AgentDecision LlmAgent::decide(const DecisionContext& ctx) {
    last_prompt_ = build_prompt(ctx);
    std::vector<AgentDecision> members;
    members.reserve(static_cast<std::size_t>(ensemble_size_));
    for (int member = 0; member < ensemble_size_; ++member) {
        std::string parse_error;
        bool ok = false;
        for (int attempt = 0; attempt < parse_retry_budget_ && !ok; ++attempt) {
            const std::string body =
                gateway_.complete(last_prompt_, CallMeta{ctx.week, member});
            try {
                members.push_back(parse_decision(body));
                ok = true;
            } catch (const ParseFailure& e) {
                parse_error = e.what();
            }
        }
        if (!ok) {
            throw ParseFailure("week " + std::to_string(ctx.week) + " member " +
                               std::to_string(member) + ": no parseable decision in " +
                               std::to_string(parse_retry_budget_) + " attempts (" +
                               parse_error + ")");
        }
    }
    return ensemble_decide(members);
}

}  // namespace polisim
