#include "doctest.h"

#include <cmath>

#include "slhvb/errors.hpp"
#include "slhvb/grids.hpp"

using namespace slhvb;

namespace {

void check_valid(const GridSpec& g) {
    REQUIRE(g.fractions.size() == static_cast<std::size_t>(g.level) + 1);
    double sum = 0.0;
    for (double f : g.fractions) {
        CHECK(f > 0.0);
        sum += f;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
}

} // namespace

TEST_CASE("revised geometric grid") {
    // l=2, k/n = 1e-4: (1e-4)^{1/2} = 0.01 and (1e-4)^{1/4} = 0.1 by hand.
    const auto g2 = revised_geometric_grid(2, 100, 1000000);
    check_valid(g2);
    CHECK(g2.fractions[0] == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(g2.fractions[1] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(g2.fractions[2] == doctest::Approx(0.89).epsilon(1e-12));

    const auto g1 = revised_geometric_grid(1, 1, 1000);
    CHECK(g1.fractions[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(g1.fractions[1] == doctest::Approx(0.9).epsilon(1e-12));

    // k/n = 0.5 at l=2: 0.5^{1/2} + 0.5^{1/4} > 1.
    CHECK_THROWS_AS(revised_geometric_grid(2, 1, 2), Error);
    try {
        revised_geometric_grid(2, 1, 2);
    } catch (const Error& e) {
        CHECK(e.code() == Err::GridInfeasible);
    }
}

TEST_CASE("revised grid fractions strictly increase") {
    for (int l : {1, 2, 3, 4}) {
        const auto g = revised_geometric_grid(l, 10, 100000);
        check_valid(g);
        for (std::size_t i = 0; i + 1 < g.fractions.size(); ++i)
            CHECK(g.fractions[i] < g.fractions[i + 1]);
    }
}

TEST_CASE("revised grid log-factor variant") {
    // l=1: eps_0 = (k/n)^{1/3} (ln n)^{1/3}.
    const long long n = 1000000, k = 10;
    const auto g = revised_geometric_grid(1, k, n, true);
    const double expect = std::cbrt(static_cast<double>(k) / n * std::log(static_cast<double>(n)));
    CHECK(g.fractions[0] == doctest::Approx(expect).epsilon(1e-12));
    check_valid(g);
}

TEST_CASE("normalized revised grid is always feasible") {
    // Strict construction is infeasible here (k/n = 100/2048 at l=4).
    CHECK_THROWS_AS(revised_geometric_grid(4, 100, 2048), Error);
    const auto g = revised_geometric_grid_normalized(4, 100, 2048);
    check_valid(g);
    // Same consecutive ratios as the unnormalized weights.
    const double ratio = std::pow(100.0 / 2048.0, -1.0 / 6.0);
    for (std::size_t i = 0; i + 1 < g.fractions.size(); ++i)
        CHECK(g.fractions[i + 1] / g.fractions[i] == doctest::Approx(ratio).epsilon(1e-9));
}

TEST_CASE("minimax grid") {
    // l=1, n=1e6: a = n^{2/3} = 1e4, so fractions (0.01, 0.99).
    const auto g1 = minimax_grid(1, 1000000);
    check_valid(g1);
    CHECK(g1.fractions[0] == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(g1.fractions[1] == doctest::Approx(0.99).epsilon(1e-9));

    // l=2: u_i = a^{2 - 2^{-i}} with a = n^{4/7}; final point exactly n.
    const double a = std::pow(1e6, 4.0 / 7.0);
    const auto g2 = minimax_grid(2, 1000000);
    check_valid(g2);
    CHECK(g2.fractions[0] == doctest::Approx(a / 1e6).epsilon(1e-9));
    CHECK(g2.fractions[1] == doctest::Approx((std::pow(a, 1.5) - a) / 1e6).epsilon(1e-9));

    for (int l : {1, 2, 3, 5, 8})
        for (long long n : {2LL, 10LL, 1000LL, 1000000LL}) check_valid(minimax_grid(l, n));
}

TEST_CASE("geometric grid") {
    // l=2, n=1e4: weights (1e2, 1e4, 1e6).
    const auto g2 = geometric_grid(2, 10000);
    check_valid(g2);
    const double total = 1e2 + 1e4 + 1e6;
    CHECK(g2.fractions[0] == doctest::Approx(1e2 / total).epsilon(1e-9));
    CHECK(g2.fractions[1] == doctest::Approx(1e4 / total).epsilon(1e-9));

    // l=1: weights (n, n^2) -> (1/(1+n), n/(1+n)).
    const auto g1 = geometric_grid(1, 100);
    CHECK(g1.fractions[0] == doctest::Approx(1.0 / 101.0).epsilon(1e-12));
    CHECK(g1.fractions[1] == doctest::Approx(100.0 / 101.0).epsilon(1e-12));

    for (int l : {1, 2, 3, 6}) {
        const auto g = geometric_grid(l, 5000);
        check_valid(g);
        for (std::size_t i = 0; i + 1 < g.fractions.size(); ++i)
            CHECK(g.fractions[i] < g.fractions[i + 1]);
    }
}

TEST_CASE("threshold exponent") {
    CHECK(threshold_exponent(1).num == 0);
    CHECK(threshold_exponent(1).den == 1);
    CHECK(threshold_exponent(2).num == 1);
    CHECK(threshold_exponent(2).den == 5);
    CHECK(threshold_exponent(4).num == 1);
    CHECK(threshold_exponent(4).den == 3);
    CHECK(threshold_exponent(7).value() == doctest::Approx(6.0 / 15.0).epsilon(1e-15));
}

TEST_CASE("max feasible level") {
    CHECK(max_feasible_level(1.0 / 3.0).value() == 4);
    CHECK(max_feasible_level(0.2).value() == 2);
    CHECK(!max_feasible_level(0.5).has_value());
    CHECK(!max_feasible_level(0.7).has_value());
    CHECK(max_feasible_level(0.49).value() >= 70);
    CHECK(max_feasible_level(0.01).value() == 1);
}

TEST_CASE("hybrid plan regimes") {
    // rho < 1/5: level 1, k' = k.
    const auto low = hybrid_plan(0.1, 3, 100000, 3);
    CHECK(low.level == 1);
    CHECK(low.resample_k_prime == 3);

    // 1/5 <= rho < w/(2w+2): theta_2 = 0.2 <= 0.25 < 2/6.
    const auto mid = hybrid_plan(0.25, 3, 10000, 10);
    CHECK(mid.level == 2);
    CHECK(mid.resample_k_prime == 10);

    // rho >= w/(2w+2): level w, k' = round(n^{w/(2w+2)}).
    const auto high = hybrid_plan(0.6, 2, 1000000, 3981);
    CHECK(high.level == 2);
    CHECK(high.resample_k_prime == 100);

    const auto half = hybrid_plan(0.5, 1, 10000, 100);
    CHECK(half.level == 1);
    CHECK(half.resample_k_prime == 10); // n^{1/4}

    CHECK_THROWS_AS(hybrid_plan(0.9, 2, 1000000, 10), Error); // rho vs k mismatch
}

TEST_CASE("hybrid plan always satisfies theta_l <= rho and l <= w") {
    for (double rho : {0.05, 0.2, 0.22, 0.3, 0.35, 0.45, 0.5, 0.8}) {
        for (int w : {1, 2, 3, 5, 8}) {
            const long long n = 1 << 20;
            const long long k = std::llround(std::pow(static_cast<double>(n), rho));
            const auto plan = hybrid_plan(rho, w, n, k);
            CHECK(plan.level <= w);
            CHECK(threshold_exponent(plan.level).value() <= rho + 1e-12);
            check_valid(plan.grid);
            CHECK(plan.resample_k_prime <= k);
        }
    }
}
