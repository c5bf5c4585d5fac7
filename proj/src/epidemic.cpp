#include "polisim/epidemic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "polisim/errors.hpp"

namespace polisim {

void WorldConfig::validate() const {
    if (population <= 0) throw std::invalid_argument("population must be positive");
    if (initial_susceptible < 0 || initial_exposed < 0 || initial_infectious < 0)
        throw std::invalid_argument("initial occupancies must be nonnegative");
    if (initial_susceptible + initial_exposed + initial_infectious > population)
        throw std::invalid_argument("initial occupancies exceed population");
    if (latent_period <= 0) throw std::invalid_argument("latent_period must be positive");
    if (infectious_period <= 0) throw std::invalid_argument("infectious_period must be positive");
    if (policy_effect < 0 || policy_effect > 1)
        throw std::invalid_argument("policy_effect must lie in [0,1]");
    if (behavior_sensitivity < 0) throw std::invalid_argument("behavior_sensitivity must be >= 0");
    if (noise_lo > noise_hi) throw std::invalid_argument("noise_lo must not exceed noise_hi");
    if (noise_lo < 0) throw std::invalid_argument("noise bounds must be nonnegative");
    substeps_per_day();  // throws if step_size does not divide one day
}

EpidemicState WorldConfig::initial_state() const {
    EpidemicState s;
    s.day = 0;
    s.susceptible = initial_susceptible;
    s.exposed = initial_exposed;
    s.infectious = initial_infectious;
    s.recovered = population - initial_susceptible - initial_exposed - initial_infectious;
    return s;
}

int WorldConfig::substeps_per_day() const {
    if (step_size <= 0 || step_size > 1)
        throw std::invalid_argument("step_size must lie in (0,1]");
    const double n = 1.0 / step_size;
    const double rounded = std::round(n);
    if (std::abs(n - rounded) > 1e-9)
        throw std::invalid_argument("step_size must divide one day evenly");
    return static_cast<int>(rounded);
}

double government_effect(double restriction, double policy_effect) {
    if (!(restriction >= 0.0 && restriction <= 1.0))
        throw std::domain_error("restriction must lie in [0,1], got " + std::to_string(restriction));
    return 1.0 - policy_effect * restriction;
}

double behavior_modifier(WorldMode mode, double sensitivity, double weekly_cases) {
    if (!(weekly_cases >= 0.0))
        throw std::domain_error("weekly_cases must be nonnegative, got " + std::to_string(weekly_cases));
    if (mode == WorldMode::World1) return 1.0;
    return 1.0 / (1.0 + sensitivity * weekly_cases);
}

double effective_beta(double base, double behavior, double policy_factor, double noise) {
    return base * behavior * policy_factor * noise;
}

double draw_noise(Rng& rng, const WorldConfig& config) {
    return rng.uniform(config.noise_lo, config.noise_hi);
}

EpidemicState seir_step(const EpidemicState& state, double beta_eff, const WorldConfig& config) {
    if (!std::isfinite(state.susceptible) || !std::isfinite(state.exposed) ||
        !std::isfinite(state.infectious) || !std::isfinite(state.recovered) ||
        !std::isfinite(beta_eff)) {
        throw SimulationError("non-finite state or transmission rate at day " +
                              std::to_string(state.day));
    }

    const int substeps = config.substeps_per_day();
    const double dt = 1.0 / substeps;
    const double n = config.population;

    double s = state.susceptible;
    double e = state.exposed;
    double i = state.infectious;
    double r = state.recovered;

    for (int k = 0; k < substeps; ++k) {
        // Outflows capped at the source occupancy; each flow leaves one
        // compartment and enters the next, so the total is conserved.
        const double new_exposures = std::min(beta_eff * s * i / n * dt, s);
        const double new_infections = std::min(e / config.latent_period * dt, e);
        const double new_recoveries = std::min(i / config.infectious_period * dt, i);
        s -= new_exposures;
        e += new_exposures - new_infections;
        i += new_infections - new_recoveries;
        r += new_recoveries;
    }

    EpidemicState next;
    next.day = state.day + 1;
    next.susceptible = s;
    next.exposed = e;
    next.infectious = i;
    next.recovered = r;
    return next;
}

double reported_cases(const EpidemicState& state, double latent_period) {
    return state.exposed / latent_period;
}

double weekly_mean_cases(const std::vector<double>& case_buffer, int day, int interval) {
    if (day <= interval) return 0.0;
    double sum = 0.0;
    for (int d = day - interval; d <= day - 1; ++d) sum += case_buffer[static_cast<size_t>(d - 1)];
    return sum / interval;
}

}  // namespace polisim
