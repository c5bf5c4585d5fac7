#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace polisim {

// Stream labels keep the epidemic-noise and memory-sampling draws on
// independent generators even when both are seeded with the same value.
inline constexpr std::uint32_t kWorldStream = 0x5eed0001;
inline constexpr std::uint32_t kMemoryStream = 0x5eed0002;

// Seeded generator with platform-independent uniform draws (the standard
// distributions are implementation-defined, so doubles are built from raw
// 64-bit output directly).
class Rng {
public:
    Rng(std::uint64_t seed, std::uint32_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                          static_cast<std::uint32_t>(seed >> 32), stream};
        engine_.seed(seq);
    }

    // Uniform draw from [lo, hi).
    double uniform(double lo, double hi) {
        const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * unit;
    }

    // Index drawn proportionally to the given nonnegative weights.
    std::size_t weighted_index(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform(0.0, total);
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            u -= weights[i];
            if (u < 0.0) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace polisim
