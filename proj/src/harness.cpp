#include "polisim/harness.hpp"

#include <algorithm>
#include <stdexcept>

#include "polisim/analysis.hpp"
#include "polisim/errors.hpp"
#include "polisim/memory.hpp"
#include "polisim/rng.hpp"

namespace polisim {

KnowledgeMode knowledge_for(const RunConfig& config) {
    if (config.agent == AgentKind::Knowledge || config.agent == AgentKind::EnsembleKnowledge) {
        return config.world.mode == WorldMode::World1 ? KnowledgeMode::World1
                                                      : KnowledgeMode::World2;
    }
    return KnowledgeMode::None;
}

std::unique_ptr<PolicyAgent> make_agent(const RunConfig& config, ChatGateway* gateway) {
    if (config.source == DecisionSource::Scripted || config.agent == AgentKind::Scripted)
        return std::make_unique<ScriptedThresholdAgent>();
    if (gateway == nullptr)
        throw std::invalid_argument("LLM-backed agent requires a gateway");
    const bool ensemble = config.agent == AgentKind::Ensemble ||
                          config.agent == AgentKind::EnsembleKnowledge;
    return std::make_unique<LlmAgent>(*gateway, ensemble ? config.ensemble_size : 1);
}

RunLog run_simulation(const RunConfig& config, PolicyAgent& agent) {
    config.validate();

    RunLog log;
    log.config = config;

    Rng world_rng(config.world_seed, kWorldStream);
    Rng memory_rng(config.memory_seed, kMemoryStream);
    MemoryStore memory(config.memory_decay);
    EpidemicState state = config.world.initial_state();
    std::vector<double> case_buffer;
    case_buffer.reserve(static_cast<std::size_t>(config.days));

    const KnowledgeMode knowledge = knowledge_for(config);
    double restriction = 0.0;     // G in force
    double prev_week_mean = 0.0;  // updated on decision days, constant within a week

    try {
        for (int t = 1; t <= config.days; ++t) {
            const int week = (t + config.decision_interval - 1) / config.decision_interval;
            const bool decision_day = (t == 1) || ((t - 1) % config.decision_interval == 0);

            if (decision_day) {
                prev_week_mean = weekly_mean_cases(case_buffer, t, config.decision_interval);

                WeeklyEntry entry;
                entry.week = week;
                entry.prev_week_mean_cases = prev_week_mean;
                if (week >= config.start_week) {
                    entry.sampled_memory_indices = memory.sample_indices(
                        static_cast<std::size_t>(config.memory_sample), memory_rng);

                    DecisionContext ctx;
                    ctx.week = week;
                    ctx.last_week_mean_cases = prev_week_mean;
                    ctx.last_restriction_pct = restriction * 100.0;
                    for (std::size_t idx : entry.sampled_memory_indices)
                        ctx.memories.push_back(memory.records()[idx]);
                    ctx.knowledge = knowledge;

                    entry.decision = agent.decide(ctx);
                    entry.agent_decided = true;
                    if (const std::string* prompt = agent.last_prompt())
                        entry.prompt_hash = fnv1a_hex(*prompt);

                    // Percentage-to-fraction conversion happens here, at the
                    // harness boundary.
                    restriction =
                        std::clamp(entry.decision.shutdown_percentage, 0.0, 100.0) / 100.0;
                } else {
                    restriction = 0.0;
                }
                entry.restriction = restriction;
                log.weekly.push_back(std::move(entry));
            }

            const double policy_factor =
                government_effect(restriction, config.world.policy_effect);
            const double behavior = behavior_modifier(
                config.world.mode, config.world.behavior_sensitivity, prev_week_mean);
            const double noise = draw_noise(world_rng, config.world);
            const double beta_eff = effective_beta(config.world.base_transmission, behavior,
                                                   policy_factor, noise);

            state = seir_step(state, beta_eff, config.world);
            const double cases = reported_cases(state, config.world.latent_period);
            case_buffer.push_back(cases);

            DailyEntry daily;
            daily.state = state;
            daily.beta_eff = beta_eff;
            daily.behavior = behavior;
            daily.policy_factor = policy_factor;
            daily.noise = noise;
            daily.cases = cases;
            log.daily.push_back(daily);

            if (decision_day) {
                // Realized outcome stored alongside the decision that produced it.
                memory.append(MemoryRecord{week, restriction, cases});
            }
        }
    } catch (const ParseFailure& e) {
        log.failed = true;
        log.failure_reason = std::string("parse failure: ") + e.what();
    } catch (const TransportError& e) {
        log.failed = true;
        log.failure_reason = std::string("transport error: ") + e.what();
    } catch (const SimulationError& e) {
        log.failed = true;
        log.failure_reason = std::string("simulation error: ") + e.what();
    }

    if (!log.failed) {
        log.summary.cumulative_cases = cumulative_cases(log);
        log.summary.mean_transmission_reduction = mean_transmission_reduction(log);
        log.summary.cumulative_prediction_error = cumulative_prediction_error(log);
    }
    return log;
}

}  // namespace polisim
