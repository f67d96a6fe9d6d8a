#include "doctest.h"

#include <algorithm>

#include "slhvb/environment.hpp"
#include "slhvb/errors.hpp"
#include "slhvb/metrics.hpp"

using namespace slhvb;

namespace {

EnvConfig basic_config(long long n, long long k, int w) {
    EnvConfig cfg;
    cfg.n = n;
    cfg.k = k;
    cfg.w = w;
    cfg.horizon_T = 100;
    cfg.prior = PriorSpec::uniform();
    return cfg;
}

} // namespace

TEST_CASE("advance_round window arithmetic") {
    EnvConfig cfg = basic_config(10, 3, 2);
    ArmPool pool;
    Rng rng(1);
    pool.advance_round(cfg, rng);
    CHECK(pool.cohorts().size() == 1);
    CHECK(pool.arm_count() == 3);

    EnvConfig cfg2 = basic_config(10, 2, 1);
    ArmPool pool2;
    Rng rng2(1);
    for (int t = 0; t < 3; ++t) pool2.advance_round(cfg2, rng2); // w + 2 advances
    CHECK(pool2.cohorts().size() == 2);
    CHECK(pool2.arm_count() == 4);
}

TEST_CASE("advance_round reports expiries") {
    EnvConfig cfg = basic_config(10, 2, 1);
    ArmPool pool;
    Rng rng(3);
    CHECK(pool.advance_round(cfg, rng).empty());
    CHECK(pool.advance_round(cfg, rng).empty());
    const auto expired = pool.advance_round(cfg, rng);
    REQUIRE(expired.size() == 2);
    CHECK(expired[0] == 0);
    CHECK(expired[1] == 1);
}

TEST_CASE("window discipline: (w+1)*k arms from round w on") {
    for (int w : {1, 2, 4}) {
        for (long long k : {1LL, 3LL, 7LL}) {
            EnvConfig cfg = basic_config(5, k, w);
            ArmPool pool;
            Rng rng(99);
            for (long long t = 0; t < 3 * w + 2; ++t) {
                pool.advance_round(cfg, rng);
                if (t >= w) CHECK(pool.arm_count() == (w + 1) * k);
            }
        }
    }
}

TEST_CASE("determinism: identical seeds give identical means") {
    EnvConfig cfg = basic_config(10, 5, 2);
    ArmPool a, b;
    Rng ra(777), rb(777);
    for (int t = 0; t < 10; ++t) {
        a.advance_round(cfg, ra);
        b.advance_round(cfg, rb);
    }
    REQUIRE(a.arm_count() == b.arm_count());
    auto ita = a.cohorts().begin();
    auto itb = b.cohorts().begin();
    for (; ita != a.cohorts().end(); ++ita, ++itb)
        for (std::size_t i = 0; i < ita->arms.size(); ++i)
            CHECK(ita->arms[i].mu == itb->arms[i].mu);
}

TEST_CASE("oracle_best") {
    EnvConfig cfg = basic_config(10, 1, 1);
    cfg.scripted_means = {{0.4}};
    ArmPool pool;
    Rng rng(1);
    pool.advance_round(cfg, rng);
    const auto [arm, mu] = oracle_best(pool);
    CHECK(mu == 0.4);
    CHECK(arm.id == 0);

    // Tie on the maximum: the smaller id wins.
    EnvConfig cfg2 = basic_config(10, 3, 1);
    cfg2.scripted_means = {{0.9, 0.1, 0.9}};
    ArmPool pool2;
    pool2.advance_round(cfg2, rng);
    const auto [arm2, mu2] = oracle_best(pool2);
    CHECK(mu2 == 0.9);
    CHECK(arm2.id == 0);

    CHECK_THROWS_AS(oracle_best(ArmPool{}), Error);
}

TEST_CASE("oracle_best equals a linear scan over 1000 arms") {
    EnvConfig cfg = basic_config(10, 1000, 1);
    ArmPool pool;
    Rng rng(4242);
    pool.advance_round(cfg, rng);
    double best = -1.0;
    for (const auto& c : pool.cohorts())
        for (const auto& a : c.arms) best = std::max(best, a.mu);
    CHECK(oracle_best(pool).second == best);
}

TEST_CASE("draw_reward") {
    Rng rng(5);
    Arm arm{0, 0, 0.37};
    CHECK(draw_reward(arm, RewardModel::PointMass, rng) == 0.37);

    Arm zero{1, 0, 0.0};
    for (int i = 0; i < 100; ++i) CHECK(draw_reward(zero, RewardModel::Bernoulli, rng) == 0.0);

    Arm biased{2, 0, 0.7};
    double acc = 0.0;
    const int count = 100000;
    for (int i = 0; i < count; ++i) acc += draw_reward(biased, RewardModel::Bernoulli, rng);
    CHECK(acc / count == doctest::Approx(0.7).epsilon(0.015));
}

TEST_CASE("play: losses, totals, and errors") {
    EnvConfig cfg = basic_config(10, 2, 1);
    cfg.reward_model = RewardModel::PointMass;
    cfg.scripted_means = {{0.9, 0.1}};
    ArmPool pool;
    Rng rng(8);
    pool.advance_round(cfg, rng);

    // All pulls on the oracle arm: zero loss.
    const auto zero = play(pool, {{0, 10}}, cfg, rng);
    CHECK(round_loss(zero, cfg.n) == 0.0);

    // Split (5, 5) over gaps (0, 0.8): loss (1/10)(5*0 + 5*0.8) = 0.4.
    const auto split = play(pool, {{0, 5}, {1, 5}}, cfg, rng);
    CHECK(round_loss(split, cfg.n) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(split.oracle_mean == 0.9);
    CHECK(split.rewards.at(1).sum == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(play(pool, {{0, 9}}, cfg, rng), Error);
    try {
        play(pool, {{0, 9}}, cfg, rng);
    } catch (const Error& e) {
        CHECK(e.code() == Err::WrongTotal);
    }
    CHECK_THROWS_AS(play(pool, {{0, 5}, {77, 5}}, cfg, rng), Error);
    try {
        play(pool, {{0, 5}, {77, 5}}, cfg, rng);
    } catch (const Error& e) {
        CHECK(e.code() == Err::UnavailableArm);
    }
}

TEST_CASE("play under point mass is bit-identical across runs") {
    EnvConfig cfg = basic_config(20, 4, 2);
    cfg.reward_model = RewardModel::PointMass;
    auto run_once = [&cfg]() {
        ArmPool pool;
        Rng rng(31337);
        pool.advance_round(cfg, rng);
        Allocation alloc;
        long long rest = cfg.n;
        for (const auto& a : pool.cohorts().front().arms) {
            alloc[a.id] = std::min<long long>(5, rest);
            rest -= alloc[a.id];
        }
        return play(pool, alloc, cfg, rng);
    };
    const auto first = run_once();
    const auto second = run_once();
    CHECK(first.oracle_mean == second.oracle_mean);
    for (const auto& [id, rb] : second.rewards) {
        CHECK(first.rewards.at(id).count == rb.count);
        CHECK(first.rewards.at(id).sum == rb.sum);
    }
}

TEST_CASE("bernoulli play draws match the allocation counts") {
    EnvConfig cfg = basic_config(1000, 10, 1);
    ArmPool pool;
    Rng rng(55);
    pool.advance_round(cfg, rng);
    Allocation alloc;
    for (const auto& a : pool.cohorts().front().arms) alloc[a.id] = 100;
    const auto outcome = play(pool, alloc, cfg, rng);
    for (const auto& [id, rb] : outcome.rewards) {
        CHECK(rb.count == 100);
        CHECK(rb.sum >= 0.0);
        CHECK(rb.sum <= 100.0);
    }
}
