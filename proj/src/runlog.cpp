#include "polisim/runlog.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace polisim {

using nlohmann::json;

void RunConfig::validate() const {
    if (days < 1) throw std::invalid_argument("days must be >= 1");
    if (decision_interval < 1) throw std::invalid_argument("decision_interval must be >= 1");
    if (days < decision_interval)
        throw std::invalid_argument("days must be >= decision_interval");
    if (start_week < 1) throw std::invalid_argument("start_week must be >= 1");
    if (memory_sample < 0) throw std::invalid_argument("memory_sample must be >= 0");
    if (ensemble_size < 1) throw std::invalid_argument("ensemble_size must be >= 1");
    world.validate();
}

std::string to_string(WorldMode mode) {
    return mode == WorldMode::World1 ? "world1" : "world2";
}

std::string to_string(AgentKind kind) {
    switch (kind) {
        case AgentKind::Base: return "base";
        case AgentKind::Knowledge: return "knowledge";
        case AgentKind::Ensemble: return "ensemble";
        case AgentKind::EnsembleKnowledge: return "ensemble_knowledge";
        case AgentKind::Scripted: return "scripted";
    }
    return "base";
}

std::string to_string(DecisionSource source) {
    return source == DecisionSource::Llm ? "llm" : "scripted";
}

WorldMode world_mode_from_string(const std::string& name) {
    if (name == "world1" || name == "1") return WorldMode::World1;
    if (name == "world2" || name == "2") return WorldMode::World2;
    throw std::invalid_argument("unknown world mode: " + name);
}

AgentKind agent_kind_from_string(const std::string& name) {
    if (name == "base") return AgentKind::Base;
    if (name == "knowledge") return AgentKind::Knowledge;
    if (name == "ensemble") return AgentKind::Ensemble;
    if (name == "ensemble_knowledge" || name == "ensemble-knowledge")
        return AgentKind::EnsembleKnowledge;
    if (name == "scripted") return AgentKind::Scripted;
    throw std::invalid_argument("unknown agent kind: " + name);
}

DecisionSource decision_source_from_string(const std::string& name) {
    if (name == "llm") return DecisionSource::Llm;
    if (name == "scripted") return DecisionSource::Scripted;
    throw std::invalid_argument("unknown decision source: " + name);
}

json to_json(const WorldConfig& c) {
    json obj;
    obj["population"] = c.population;
    obj["initial_susceptible"] = c.initial_susceptible;
    obj["initial_exposed"] = c.initial_exposed;
    obj["initial_infectious"] = c.initial_infectious;
    obj["base_transmission"] = c.base_transmission;
    obj["latent_period"] = c.latent_period;
    obj["infectious_period"] = c.infectious_period;
    obj["policy_effect"] = c.policy_effect;
    obj["behavior_sensitivity"] = c.behavior_sensitivity;
    obj["mode"] = to_string(c.mode);
    obj["noise_lo"] = c.noise_lo;
    obj["noise_hi"] = c.noise_hi;
    obj["step_size"] = c.step_size;
    return obj;
}

WorldConfig world_config_from_json(const json& obj) {
    WorldConfig c;
    c.population = obj.value("population", c.population);
    c.initial_susceptible = obj.value("initial_susceptible", c.initial_susceptible);
    c.initial_exposed = obj.value("initial_exposed", c.initial_exposed);
    c.initial_infectious = obj.value("initial_infectious", c.initial_infectious);
    c.base_transmission = obj.value("base_transmission", c.base_transmission);
    c.latent_period = obj.value("latent_period", c.latent_period);
    c.infectious_period = obj.value("infectious_period", c.infectious_period);
    c.policy_effect = obj.value("policy_effect", c.policy_effect);
    c.behavior_sensitivity = obj.value("behavior_sensitivity", c.behavior_sensitivity);
    if (obj.contains("mode")) c.mode = world_mode_from_string(obj["mode"].get<std::string>());
    c.noise_lo = obj.value("noise_lo", c.noise_lo);
    c.noise_hi = obj.value("noise_hi", c.noise_hi);
    c.step_size = obj.value("step_size", c.step_size);
    return c;
}

json to_json(const RunConfig& c) {
    json obj;
    obj["days"] = c.days;
    obj["decision_interval"] = c.decision_interval;
    obj["start_week"] = c.start_week;
    obj["memory_sample"] = c.memory_sample;
    obj["memory_decay"] = c.memory_decay;
    obj["world"] = to_json(c.world);
    obj["agent"] = to_string(c.agent);
    obj["source"] = to_string(c.source);
    obj["ensemble_size"] = c.ensemble_size;
    obj["world_seed"] = c.world_seed;
    obj["memory_seed"] = c.memory_seed;
    return obj;
}

RunConfig run_config_from_json(const json& obj) {
    RunConfig c;
    c.days = obj.value("days", c.days);
    c.decision_interval = obj.value("decision_interval", c.decision_interval);
    c.start_week = obj.value("start_week", c.start_week);
    c.memory_sample = obj.value("memory_sample", c.memory_sample);
    c.memory_decay = obj.value("memory_decay", c.memory_decay);
    if (obj.contains("world")) c.world = world_config_from_json(obj["world"]);
    if (obj.contains("agent")) c.agent = agent_kind_from_string(obj["agent"].get<std::string>());
    if (obj.contains("source"))
        c.source = decision_source_from_string(obj["source"].get<std::string>());
    c.ensemble_size = obj.value("ensemble_size", c.ensemble_size);
    c.world_seed = obj.value("world_seed", c.world_seed);
    c.memory_seed = obj.value("memory_seed", c.memory_seed);
    return c;
}

namespace {

json to_json(const AgentDecision& d) {
    json obj;
    obj["prediction_without_policy"] = d.prediction_without_policy;
    obj["shutdown_percentage"] = d.shutdown_percentage;
    obj["prediction_with_new_policy"] = d.prediction_with_new_policy;
    obj["reasoning"] = d.reasoning;
    return obj;
}

AgentDecision decision_from_json(const json& obj) {
    AgentDecision d;
    d.prediction_without_policy = obj.at("prediction_without_policy").get<std::int64_t>();
    d.shutdown_percentage = obj.at("shutdown_percentage").get<double>();
    d.prediction_with_new_policy = obj.at("prediction_with_new_policy").get<std::int64_t>();
    d.reasoning = obj.at("reasoning").get<std::string>();
    return d;
}

}  // namespace

json to_json(const RunLog& log) {
    json obj;
    obj["schema_version"] = log.schema_version;
    obj["config"] = to_json(log.config);
    obj["failed"] = log.failed;
    obj["failure_reason"] = log.failure_reason;

    json daily = json::array();
    for (const DailyEntry& d : log.daily) {
        json row;
        row["day"] = d.state.day;
        row["susceptible"] = d.state.susceptible;
        row["exposed"] = d.state.exposed;
        row["infectious"] = d.state.infectious;
        row["recovered"] = d.state.recovered;
        row["beta_eff"] = d.beta_eff;
        row["behavior"] = d.behavior;
        row["policy_factor"] = d.policy_factor;
        row["noise"] = d.noise;
        row["cases"] = d.cases;
        daily.push_back(std::move(row));
    }
    obj["daily"] = std::move(daily);

    json weekly = json::array();
    for (const WeeklyEntry& w : log.weekly) {
        json row;
        row["week"] = w.week;
        row["prev_week_mean_cases"] = w.prev_week_mean_cases;
        row["restriction"] = w.restriction;
        row["agent_decided"] = w.agent_decided;
        if (w.agent_decided) row["decision"] = to_json(w.decision);
        row["sampled_memory_indices"] = w.sampled_memory_indices;
        if (!w.prompt_hash.empty()) row["prompt_hash"] = w.prompt_hash;
        weekly.push_back(std::move(row));
    }
    obj["weekly"] = std::move(weekly);

    json summary;
    summary["cumulative_cases"] = log.summary.cumulative_cases;
    summary["mean_transmission_reduction"] = log.summary.mean_transmission_reduction;
    summary["cumulative_prediction_error"] = log.summary.cumulative_prediction_error;
    obj["summary"] = std::move(summary);
    return obj;
}

RunLog runlog_from_json(const json& obj) {
    RunLog log;
    const int version = obj.at("schema_version").get<int>();
    if (version != log.schema_version)
        throw std::runtime_error("unsupported runlog schema version " + std::to_string(version));
    log.config = run_config_from_json(obj.at("config"));
    log.failed = obj.at("failed").get<bool>();
    log.failure_reason = obj.value("failure_reason", "");

    for (const json& row : obj.at("daily")) {
        DailyEntry d;
        d.state.day = row.at("day").get<int>();
        d.state.susceptible = row.at("susceptible").get<double>();
        d.state.exposed = row.at("exposed").get<double>();
        d.state.infectious = row.at("infectious").get<double>();
        d.state.recovered = row.at("recovered").get<double>();
        d.beta_eff = row.at("beta_eff").get<double>();
        d.behavior = row.at("behavior").get<double>();
        d.policy_factor = row.at("policy_factor").get<double>();
        d.noise = row.at("noise").get<double>();
        d.cases = row.at("cases").get<double>();
        log.daily.push_back(d);
    }
    for (const json& row : obj.at("weekly")) {
        WeeklyEntry w;
        w.week = row.at("week").get<int>();
        w.prev_week_mean_cases = row.at("prev_week_mean_cases").get<double>();
        w.restriction = row.at("restriction").get<double>();
        w.agent_decided = row.at("agent_decided").get<bool>();
        if (w.agent_decided) w.decision = decision_from_json(row.at("decision"));
        w.sampled_memory_indices =
            row.at("sampled_memory_indices").get<std::vector<std::size_t>>();
        w.prompt_hash = row.value("prompt_hash", "");
        log.weekly.push_back(std::move(w));
    }
    const json& summary = obj.at("summary");
    log.summary.cumulative_cases = summary.at("cumulative_cases").get<double>();
    log.summary.mean_transmission_reduction =
        summary.at("mean_transmission_reduction").get<double>();
    log.summary.cumulative_prediction_error =
        summary.at("cumulative_prediction_error").get<double>();
    return log;
}

std::string runlog_bytes(const RunLog& log) { return to_json(log).dump(2) + "\n"; }

void save_runlog(const RunLog& log, const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << runlog_bytes(log);
    }
    std::filesystem::rename(tmp, path);
}

RunLog load_runlog(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open runlog: " + path.string());
    json obj = json::parse(in, nullptr, false);
    if (obj.is_discarded())
        throw std::runtime_error("runlog is not valid JSON: " + path.string());
    try {
        return runlog_from_json(obj);
    } catch (const json::exception& e) {
        throw std::runtime_error("runlog schema error in " + path.string() + ": " + e.what());
    }
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace polisim
