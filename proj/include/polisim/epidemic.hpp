#pragma once

#include <vector>

#include "polisim/rng.hpp"

namespace polisim {

enum class WorldMode { World1, World2 };

// Compartment occupancies are continuous; a single index case among 10^6
// people and daily Euler flows imply fractional persons.
struct EpidemicState {
    int day = 0;  // 0 = initial condition, steps produce days 1..T
    double susceptible = 0.0;
    double exposed = 0.0;
    double infectious = 0.0;
    double recovered = 0.0;

    double population() const { return susceptible + exposed + infectious + recovered; }

    bool operator==(const EpidemicState&) const = default;
};

struct WorldConfig {
    double population = 1e6;
    double initial_susceptible = 999999.0;
    double initial_exposed = 0.0;
    double initial_infectious = 1.0;
    double base_transmission = 0.2;    // per day, before modifiers
    double latent_period = 4.0;        // days
    double infectious_period = 10.0;   // days
    double policy_effect = 0.8;        // strength of a full shutdown
    double behavior_sensitivity = 5e-4;  // per case of weekly mean incidence
    WorldMode mode = WorldMode::World1;
    double noise_lo = 0.5;
    double noise_hi = 1.5;
    double step_size = 1.0;  // Euler step in days; must divide one day evenly

    void validate() const;  // throws std::invalid_argument
    EpidemicState initial_state() const;
    int substeps_per_day() const;

    bool operator==(const WorldConfig&) const = default;
};

// Policy factor g = 1 - effect * restriction, restriction in [0,1].
double government_effect(double restriction, double policy_effect);

// Voluntary-caution factor b: 1 in World1, 1/(1 + sensitivity * weekly_cases)
// in World2. weekly_cases is the previous week's mean, held constant between
// decision days.
double behavior_modifier(WorldMode mode, double sensitivity, double weekly_cases);

// Transmission rate after all modifiers.
double effective_beta(double base, double behavior, double policy_factor, double noise);

// One daily multiplicative noise factor from the world stream.
double draw_noise(Rng& rng, const WorldConfig& config);

// Advances the state by one day of forward Euler (config.step_size sized
// substeps). Outflows are capped at their source compartment so occupancies
// stay nonnegative and the population total is conserved.
EpidemicState seir_step(const EpidemicState& state, double beta_eff, const WorldConfig& config);

// Daily reported cases: the exposed-to-infectious flow E/L.
double reported_cases(const EpidemicState& state, double latent_period);

// Mean of the daily cases over days [day - interval, day - 1]; 0 during the
// warm-up window day <= interval. case_buffer[i] holds day i+1.
double weekly_mean_cases(const std::vector<double>& case_buffer, int day, int interval);

}  // namespace polisim
