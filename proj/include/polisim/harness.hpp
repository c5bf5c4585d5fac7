#pragma once

#include <memory>

#include "polisim/agents.hpp"
#include "polisim/config.hpp"
#include "polisim/gateway.hpp"
#include "polisim/runlog.hpp"

namespace polisim {

// Knowledge paragraph the configuration implies: the scenario-matched text
// for Knowledge conditions, otherwise none.
KnowledgeMode knowledge_for(const RunConfig& config);

// Builds the policymaker for a config. The gateway may be null for scripted
// decisions; LLM configs require one.
std::unique_ptr<PolicyAgent> make_agent(const RunConfig& config, ChatGateway* gateway);

// Executes the daily loop: week index from the day, decisions on days
// {1, 1+interval, ...}, warm-up mean of 0 through the first interval, agent
// consulted only from start_week on, one noise draw per day (taken from the
// world stream immediately before the step), and the decision-day record
// (week, restriction, post-step daily cases) appended to memory after the
// step. Agent, transport, and simulation failures end the run early and are
// captured in a partial log marked failed.
RunLog run_simulation(const RunConfig& config, PolicyAgent& agent);

}  // namespace polisim
