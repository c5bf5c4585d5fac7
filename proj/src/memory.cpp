#include "polisim/memory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace polisim {

std::vector<double> retrieval_weights(std::size_t count, double decay) {
    std::vector<double> weights(count);
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        weights[i] = std::exp(decay * (static_cast<double>(i) - static_cast<double>(count)));
        sum += weights[i];
    }
    for (double& w : weights) w /= sum;
    return weights;
}

void MemoryStore::append(const MemoryRecord& record) {
    if (!records_.empty() && record.week <= records_.back().week) {
        throw std::logic_error("memory weeks must be strictly increasing: got week " +
                               std::to_string(record.week) + " after week " +
                               std::to_string(records_.back().week));
    }
    records_.push_back(record);
}

std::vector<std::size_t> MemoryStore::sample_indices(std::size_t count, Rng& rng) const {
    const std::size_t n = records_.size();
    std::vector<std::size_t> picked;
    if (n <= count) {
        picked.resize(n);
        std::iota(picked.begin(), picked.end(), std::size_t{0});
        return picked;
    }

    // Fixed per-record base weights; removal renormalizes implicitly because
    // each draw is proportional over the remaining weights.
    std::vector<double> weights = retrieval_weights(n, decay_);
    std::vector<std::size_t> remaining(n);
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});

    picked.reserve(count);
    for (std::size_t draw = 0; draw < count; ++draw) {
        std::vector<double> current(remaining.size());
        for (std::size_t j = 0; j < remaining.size(); ++j) current[j] = weights[remaining[j]];
        const std::size_t j = rng.weighted_index(current);
        picked.push_back(remaining[j]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(j));
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

std::vector<MemoryRecord> MemoryStore::sample(std::size_t count, Rng& rng) const {
    std::vector<MemoryRecord> out;
    for (std::size_t idx : sample_indices(count, rng)) out.push_back(records_[idx]);
    return out;
}

}  // namespace polisim
