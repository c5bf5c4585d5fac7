#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "polisim/memory.hpp"

using namespace polisim;

TEST_SUITE_BEGIN("memory");

TEST_CASE("append keeps chronological order and rejects regressions") {
    MemoryStore store;
    store.append({1, 0.0, 0.0});
    CHECK(store.size() == 1);
    store.append({2, 0.1, 5.0});
    CHECK(store.size() == 2);
    CHECK(store.records()[0].week == 1);
    CHECK(store.records()[1].week == 2);
    CHECK_THROWS_AS(store.append({2, 0.0, 0.0}), std::logic_error);
    CHECK_THROWS_AS(store.append({1, 0.0, 0.0}), std::logic_error);
}

TEST_CASE("retrieval weights match the hand evaluations") {
    CHECK(retrieval_weights(0, 0.1).empty());

    const auto one = retrieval_weights(1, 0.1);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == doctest::Approx(1.0).epsilon(1e-12));

    const auto two = retrieval_weights(2, 0.1);
    CHECK(two[0] == doctest::Approx(0.47502).epsilon(1e-4));
    CHECK(two[1] == doctest::Approx(0.52498).epsilon(1e-4));
    CHECK(std::abs(two[0] - 0.47502) < 1e-5);
    CHECK(std::abs(two[1] - 0.52498) < 1e-5);

    const auto three = retrieval_weights(3, 0.1);
    CHECK(std::abs(three[0] - 0.30061) < 1e-5);
    CHECK(std::abs(three[1] - 0.33222) < 1e-5);
    CHECK(std::abs(three[2] - 0.36717) < 1e-5);
}

TEST_CASE("weights are strictly increasing, positive, and sum to one") {
    for (std::size_t n : {2u, 3u, 5u, 10u, 26u, 52u}) {
        const auto w = retrieval_weights(n, 0.1);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(w[i] > 0.0);
            if (i > 0) CHECK(w[i] > w[i - 1]);
            sum += w[i];
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
}

namespace {

MemoryStore store_of(int weeks) {
    MemoryStore store;
    for (int w = 1; w <= weeks; ++w)
        store.append({w, 0.01 * w, 10.0 * w});
    return store;
}

}  // namespace

TEST_CASE("undersized stores return everything chronologically without consuming draws") {
    Rng rng(7, kMemoryStream);
    const MemoryStore store = store_of(5);
    const auto sampled = store.sample(5, rng);
    REQUIRE(sampled.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(sampled[static_cast<size_t>(i)].week == i + 1);

    const auto fewer = store_of(3).sample(5, rng);
    CHECK(fewer.size() == 3);

    // No draws were consumed above: a fresh generator produces the same next value.
    Rng fresh(7, kMemoryStream);
    CHECK(rng.uniform(0, 1) == fresh.uniform(0, 1));
}

TEST_CASE("sampling is deterministic under a fixed seed and sorted by week") {
    const MemoryStore store = store_of(20);
    Rng a(42, kMemoryStream);
    Rng b(42, kMemoryStream);
    const auto first = store.sample_indices(5, a);
    const auto second = store.sample_indices(5, b);
    CHECK(first == second);
    CHECK(std::is_sorted(first.begin(), first.end()));
    CHECK(first.size() == 5);
    // distinct indices
    for (std::size_t i = 1; i < first.size(); ++i) CHECK(first[i] != first[i - 1]);
}

TEST_CASE("first-draw frequencies track the weight vector") {
    const MemoryStore store = store_of(10);
    const auto weights = retrieval_weights(10, 0.1);
    Rng rng(42, kMemoryStream);
    std::vector<int> hits(10, 0);
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        ++hits[static_cast<size_t>(rng.weighted_index(weights))];
    }
    for (std::size_t i = 0; i < 10; ++i) {
        const double freq = static_cast<double>(hits[i]) / trials;
        CHECK(std::abs(freq - weights[i]) < 0.01);
    }
}

TEST_CASE("newest records are recalled more often than the oldest") {
    const MemoryStore store = store_of(20);
    Rng rng(1234, kMemoryStream);
    int newest = 0, oldest = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const auto idx = store.sample_indices(5, rng);
        if (std::find(idx.begin(), idx.end(), 19u) != idx.end()) ++newest;
        if (std::find(idx.begin(), idx.end(), 0u) != idx.end()) ++oldest;
    }
    CHECK(newest > oldest);
    CHECK(oldest > 0);  // nonzero recall of the earliest event
}

TEST_SUITE_END();
