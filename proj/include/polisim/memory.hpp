#pragma once

#include <cstddef>
#include <vector>

#include "polisim/rng.hpp"

namespace polisim {

// One remembered decision week: the restriction actually in force (as a
// fraction of full shutdown) and the daily reported cases observed on the
// decision day itself, recorded after that day's step.
struct MemoryRecord {
    int week = 0;
    double restriction = 0.0;
    double decision_day_cases = 0.0;

    bool operator==(const MemoryRecord&) const = default;
};

// Normalized recency weights over `count` records, oldest first: weight of
// record i is exp(decay * (i - count)) / sum. Strictly increasing, sums to 1.
std::vector<double> retrieval_weights(std::size_t count, double decay);

// Append-only episodic store with recency-weighted stochastic retrieval.
class MemoryStore {
public:
    explicit MemoryStore(double decay = 0.1) : decay_(decay) {}

    // Weeks must be strictly increasing.
    void append(const MemoryRecord& record);

    // Up to `count` distinct records drawn without replacement, each draw
    // proportional to the remaining records' recency weights. If the store
    // holds `count` or fewer records they are all returned and no draws are
    // consumed. Results come back in chronological order.
    std::vector<std::size_t> sample_indices(std::size_t count, Rng& rng) const;
    std::vector<MemoryRecord> sample(std::size_t count, Rng& rng) const;

    const std::vector<MemoryRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    double decay() const { return decay_; }

private:
    double decay_;
    std::vector<MemoryRecord> records_;
};

}  // namespace polisim
