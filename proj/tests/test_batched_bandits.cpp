#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "slhvb/batched_bandits.hpp"
#include "slhvb/errors.hpp"

using namespace slhvb;

namespace {

GridSpec explicit_grid(std::vector<double> fractions) {
    GridSpec g;
    g.level = static_cast<int>(fractions.size()) - 1;
    g.fractions = std::move(fractions);
    return g;
}

std::vector<ArmId> id_range(ArmId count) {
    std::vector<ArmId> ids(count);
    for (ArmId i = 0; i < count; ++i) ids[i] = i;
    return ids;
}

std::map<ArmId, RewardBatch> point_mass_rewards(const Allocation& batch,
                                                const std::vector<double>& mus) {
    std::map<ArmId, RewardBatch> rewards;
    for (const auto& [id, c] : batch)
        rewards[id] = {c, static_cast<double>(c) * mus[static_cast<std::size_t>(id)]};
    return rewards;
}

} // namespace

TEST_CASE("bse_init resampling") {
    Rng rng(1);
    const auto ids = id_range(5);
    const auto full = bse_init(ids, explicit_grid({0.5, 0.5}), 5, 100, 100, rng);
    CHECK(full.survivors == ids);
    CHECK(full.resampled == ids);

    CHECK_THROWS_AS(bse_init(ids, explicit_grid({0.5, 0.5}), 6, 100, 100, rng), Error);
    CHECK_THROWS_AS(bse_init(ids, explicit_grid({0.5, 0.5}), 0, 100, 100, rng), Error);

    Rng a(9), b(9);
    const auto ids100 = id_range(100);
    const auto sa = bse_init(ids100, explicit_grid({0.5, 0.5}), 10, 100, 100, a);
    const auto sb = bse_init(ids100, explicit_grid({0.5, 0.5}), 10, 100, 100, b);
    CHECK(sa.survivors == sb.survivors);
    CHECK(sa.survivors.size() == 10);
}

TEST_CASE("bse_init resampling is uniform") {
    const auto ids = id_range(4);
    std::array<long long, 4> hits{};
    for (int seed = 0; seed < 10000; ++seed) {
        Rng rng(static_cast<std::uint64_t>(seed));
        const auto s = bse_init(ids, explicit_grid({0.5, 0.5}), 1, 100, 100, rng);
        ++hits[static_cast<std::size_t>(s.survivors[0])];
    }
    for (long long h : hits) {
        CHECK(h > 2350);
        CHECK(h < 2650);
    }
}

TEST_CASE("confidence_radius") {
    // radius^2 * n_i == 9 ln(n_env), so n_i = 9 ln(n_env) gives radius 1.
    for (long long n_env : {10LL, 1000LL, 1000000LL}) {
        for (long long n_i : {1LL, 7LL, 144LL}) {
            const double r = confidence_radius(n_i, n_env);
            CHECK(r * r * static_cast<double>(n_i) ==
                  doctest::Approx(9.0 * std::log(static_cast<double>(n_env))).epsilon(1e-12));
        }
        CHECK(confidence_radius(4 * 25, n_env) ==
              doctest::Approx(confidence_radius(25, n_env) / 2.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(confidence_radius(0, 100), Error);
    try {
        confidence_radius(0, 100);
    } catch (const Error& e) {
        CHECK(e.code() == Err::ZeroPulls);
    }
}

TEST_CASE("bse_next_batch: equal split, remainder, exhaustion") {
    Rng rng(2);
    auto s = bse_init(id_range(5), explicit_grid({0.1, 0.9}), 5, 100, 100, rng);
    const auto b0 = bse_next_batch(s);
    REQUIRE(b0.size() == 5);
    for (const auto& [id, c] : b0) CHECK(c == 2); // floor(0.1*100/5)

    CHECK_THROWS_AS(bse_next_batch(s), Error); // already emitted this phase

    std::vector<double> mus{0.5, 0.5, 0.5, 0.5, 0.5};
    bse_observe(s, point_mass_rewards(b0, mus));
    const auto b1 = bse_next_batch(s);
    REQUIRE(b1.size() == 1);
    CHECK(b1.begin()->second == 90); // budget exactness: 100 - 10
    bse_observe(s, point_mass_rewards(b1, mus));
    CHECK(s.done());
    CHECK_THROWS_AS(bse_next_batch(s), Error);
}

TEST_CASE("final-phase remainder with budget 101") {
    // floor(0.1*101) = 10 explored, so the final batch holds 91.
    Rng rng(3);
    auto s = bse_init(id_range(5), explicit_grid({0.1, 0.9}), 5, 101, 101, rng);
    const auto b0 = bse_next_batch(s);
    long long used = 0;
    for (const auto& [id, c] : b0) used += c;
    CHECK(used == 10);
    std::vector<double> mus(5, 0.5);
    bse_observe(s, point_mass_rewards(b0, mus));
    const auto b1 = bse_next_batch(s);
    CHECK(b1.begin()->second == 91);
}

TEST_CASE("early termination routes remaining batches to the singleton") {
    Rng rng(4);
    std::vector<double> mus{0.9, 0.1};
    // Gap 0.8 with radius < 0.8 after phase 0: n_i = 600 pulls per arm.
    auto s = bse_init(id_range(2), explicit_grid({0.3, 0.3, 0.4}), 2, 4000, 4000, rng);
    const auto b0 = bse_next_batch(s);
    CHECK(b0.at(0) == 600);
    bse_observe(s, point_mass_rewards(b0, mus));
    REQUIRE(s.survivors.size() == 1);
    CHECK(s.survivors[0] == 0);
    CHECK(s.terminated_early);

    const auto b1 = bse_next_batch(s); // phase 1: floor(0.3*4000/1) to the survivor
    CHECK(b1.at(0) == 1200);
    bse_observe(s, point_mass_rewards(b1, mus));
    const auto b2 = bse_next_batch(s);
    CHECK(b2.at(0) == 4000 - 600 * 2 - 1200);
    bse_observe(s, point_mass_rewards(b2, mus));
    CHECK(s.used_pulls == 4000);
}

TEST_CASE("bse_observe eliminates exactly per the inequality") {
    Rng rng(5);
    std::vector<double> mus{0.9, 0.1};
    auto s = bse_init(id_range(2), explicit_grid({0.5, 0.5}), 2, 100, 1200, rng);
    // n_i = 300; radius = 3 sqrt(ln(100)/300) = 0.371 < gap 0.8.
    const auto b0 = bse_next_batch(s);
    bse_observe(s, point_mass_rewards(b0, mus));
    CHECK(s.survivors == std::vector<ArmId>{0});

    // Identical means: nobody is ever eliminated.
    Rng rng2(6);
    std::vector<double> flat{0.4, 0.4, 0.4};
    auto s2 = bse_init(id_range(3), explicit_grid({0.5, 0.5}), 3, 1200, 1200, rng2);
    const auto c0 = bse_next_batch(s2);
    bse_observe(s2, point_mass_rewards(c0, flat));
    CHECK(s2.survivors.size() == 3);

    // A lone survivor stays a lone survivor.
    Rng rng3(7);
    auto s3 = bse_init(id_range(1), explicit_grid({0.5, 0.5}), 1, 100, 100, rng3);
    const auto d0 = bse_next_batch(s3);
    bse_observe(s3, point_mass_rewards(d0, mus));
    CHECK(s3.survivors.size() == 1);
}

TEST_CASE("bse_observe rejects mismatched rewards") {
    Rng rng(8);
    std::vector<double> mus{0.5, 0.5};
    auto s = bse_init(id_range(2), explicit_grid({0.5, 0.5}), 2, 100, 100, rng);
    const auto b0 = bse_next_batch(s);
    std::map<ArmId, RewardBatch> wrong_arm{{7, {25, 10.0}}, {0, {25, 10.0}}};
    CHECK_THROWS_AS(bse_observe(s, wrong_arm), Error);
    std::map<ArmId, RewardBatch> short_count{{0, {25, 10.0}}, {1, {10, 4.0}}};
    CHECK_THROWS_AS(bse_observe(s, short_count), Error);
    CHECK_NOTHROW(bse_observe(s, point_mass_rewards(b0, mus)));
    CHECK_THROWS_AS(bse_observe(s, point_mass_rewards(b0, mus)), Error); // nothing outstanding
}

TEST_CASE("zero per-arm budget skips the phase") {
    Rng rng(9);
    auto s = bse_init(id_range(10), explicit_grid({0.05, 0.95}), 10, 100, 100, rng);
    const auto b0 = bse_next_batch(s); // floor(5/10) = 0
    CHECK(b0.empty());
    CHECK(s.skipped_phases == 1);
    bse_observe(s, {});
    const auto b1 = bse_next_batch(s);
    CHECK(b1.begin()->second == 100);
}

TEST_CASE("property: monotone elimination and exact budget") {
    Rng rng(12345);
    for (int trial = 0; trial < 200; ++trial) {
        const int arms = 2 + static_cast<int>(uniform_index(rng, 5));
        const int level = 1 + static_cast<int>(uniform_index(rng, 3));
        std::vector<double> fractions(static_cast<std::size_t>(level) + 1,
                                      0.5 / static_cast<double>(level));
        fractions.back() = 0.5;
        const long long budget = 50 + static_cast<long long>(uniform_index(rng, 500));
        std::vector<double> mus(static_cast<std::size_t>(arms));
        for (auto& m : mus) m = uniform01(rng);

        auto s = bse_init(id_range(static_cast<ArmId>(arms)), explicit_grid(fractions),
                          arms, budget, budget, rng);
        auto prev = s.survivors;
        while (!s.done()) {
            const auto batch = bse_next_batch(s);
            // Bernoulli rewards drawn in the test harness role.
            std::map<ArmId, RewardBatch> rewards;
            for (const auto& [id, c] : batch) {
                std::binomial_distribution<long long> bin(c, mus[static_cast<std::size_t>(id)]);
                rewards[id] = {c, static_cast<double>(bin(rng))};
            }
            bse_observe(s, rewards);
            CHECK(!s.survivors.empty());
            CHECK(std::includes(prev.begin(), prev.end(), s.survivors.begin(), s.survivors.end()));
            prev = s.survivors;
        }
        CHECK(s.used_pulls == budget);
        long long total = 0;
        for (const auto& [id, st] : s.stats) total += st.pulls;
        CHECK(total == budget);
    }
}

TEST_CASE("point mass with wide gaps finds the true best of the resample") {
    Rng rng(321);
    for (int trial = 0; trial < 50; ++trial) {
        const int arms = 3 + static_cast<int>(uniform_index(rng, 3));
        std::vector<double> mus(static_cast<std::size_t>(arms));
        for (std::size_t i = 0; i < mus.size(); ++i)
            mus[i] = 0.05 + 0.9 * static_cast<double>(i) / static_cast<double>(arms);
        // Huge budget: every phase radius far below the minimum gap.
        const long long budget = 2000000;
        auto s = bse_init(id_range(static_cast<ArmId>(arms)), explicit_grid({0.2, 0.3, 0.5}),
                          arms - 1, budget, budget, rng);
        while (!s.done()) {
            const auto batch = bse_next_batch(s);
            bse_observe(s, point_mass_rewards(batch, mus));
        }
        ArmId best = s.resampled.front();
        for (ArmId a : s.resampled)
            if (mus[static_cast<std::size_t>(a)] > mus[static_cast<std::size_t>(best)]) best = a;
        REQUIRE(s.survivors.size() >= 1);
        CHECK(bse_designated(s) == best);
    }
}

TEST_CASE("bb_regret") {
    CHECK(bb_regret({{0, 10}}, {{0, 0.9}, {1, 0.1}}, 10) == 0.0);
    CHECK(bb_regret({{0, 7}, {1, 3}}, {{0, 0.9}, {1, 0.1}}, 10) ==
          doctest::Approx(0.24).epsilon(1e-12));
    CHECK(bb_regret({{0, 4}, {1, 6}}, {{0, 0.3}, {1, 0.3}}, 10) == 0.0);
    CHECK_THROWS_AS(bb_regret({{0, 5}}, {{0, 0.5}}, 10), Error);
}
