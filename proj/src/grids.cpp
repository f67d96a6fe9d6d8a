#include "slhvb/grids.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "slhvb/errors.hpp"

namespace slhvb {

namespace {

void check_level(int l) {
    if (l < 1 || l > 64) raise(Err::BadConfig, "grid level must be in [1, 64]");
}

GridSpec finish(int l, std::vector<double> fractions) {
    GridSpec g;
    g.level = l;
    g.fractions = std::move(fractions);
    return g;
}

} // namespace

GridSpec revised_geometric_grid(int l, long long k, long long n, bool with_log_factor) {
    check_level(l);
    if (!(k >= 1 && k < n)) raise(Err::BadConfig, "revised_geometric_grid: need 1 <= k < n");
    const double ratio = static_cast<double>(k) / static_cast<double>(n);
    const double logn = std::log(static_cast<double>(n));
    std::vector<double> eps(static_cast<std::size_t>(l) + 1, 0.0);
    double partial = 0.0;
    for (int i = 0; i < l; ++i) {
        const double e = static_cast<double>(l - i) / (l + 2);
        double f = std::pow(ratio, e);
        if (with_log_factor) f *= std::pow(logn, e);
        eps[static_cast<std::size_t>(i)] = f;
        partial += f;
    }
    if (partial >= 1.0)
        raise(Err::GridInfeasible, "revised geometric grid: exploration fractions sum to " +
                                       std::to_string(partial) + " >= 1 at level " +
                                       std::to_string(l));
    eps.back() = 1.0 - partial;
    return finish(l, std::move(eps));
}

GridSpec revised_geometric_grid_normalized(int l, long long k, long long n) {
    check_level(l);
    if (!(k >= 1 && k < n)) raise(Err::BadConfig, "revised_geometric_grid: need 1 <= k < n");
    const double ratio = static_cast<double>(k) / static_cast<double>(n);
    std::vector<double> w(static_cast<std::size_t>(l) + 1, 0.0);
    double total = 0.0;
    for (int i = 0; i <= l; ++i) {
        w[static_cast<std::size_t>(i)] = std::pow(ratio, static_cast<double>(l - i) / (l + 2));
        total += w[static_cast<std::size_t>(i)];
    }
    double partial = 0.0;
    for (int i = 0; i < l; ++i) {
        w[static_cast<std::size_t>(i)] /= total;
        partial += w[static_cast<std::size_t>(i)];
    }
    w.back() = 1.0 - partial;
    return finish(l, std::move(w));
}

GridSpec minimax_grid(int l, long long n) {
    check_level(l);
    if (n < 2) raise(Err::BadConfig, "minimax_grid: n >= 2");
    const double nd = static_cast<double>(n);
    const double loga = std::log(nd) / (2.0 - std::ldexp(1.0, -l));
    std::vector<double> eps(static_cast<std::size_t>(l) + 1, 0.0);
    double prev_u = 0.0;
    double partial = 0.0;
    for (int i = 0; i < l; ++i) {
        const double u = std::exp((2.0 - std::ldexp(1.0, -i)) * loga);
        eps[static_cast<std::size_t>(i)] = (u - prev_u) / nd;
        partial += eps[static_cast<std::size_t>(i)];
        prev_u = u;
    }
    eps.back() = 1.0 - partial; // u_l = n exactly by the choice of a
    return finish(l, std::move(eps));
}

GridSpec geometric_grid(int l, long long n) {
    check_level(l);
    if (n < 2) raise(Err::BadConfig, "geometric_grid: n >= 2");
    const double logb = std::log(static_cast<double>(n)) / l;
    std::vector<double> w(static_cast<std::size_t>(l) + 1, 0.0);
    double total = 0.0;
    for (int i = 0; i <= l; ++i) {
        w[static_cast<std::size_t>(i)] = std::exp(logb * (i + 1));
        total += w[static_cast<std::size_t>(i)];
    }
    double partial = 0.0;
    for (int i = 0; i < l; ++i) {
        w[static_cast<std::size_t>(i)] /= total;
        partial += w[static_cast<std::size_t>(i)];
    }
    w.back() = 1.0 - partial;
    return finish(l, std::move(w));
}

Rational threshold_exponent(int l) {
    check_level(l);
    long long num = l - 1;
    long long den = 2LL * l + 1;
    const long long g = std::gcd(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    if (num == 0) den = 1;
    return {num, den};
}

std::optional<int> max_feasible_level(double rho) {
    if (!(rho > 0.0)) raise(Err::BadConfig, "max_feasible_level: rho > 0");
    if (rho >= 0.5) return std::nullopt;
    // Small guard against floating-point noise at exact rational boundaries.
    const double x = (1.0 + rho) / (1.0 - 2.0 * rho);
    return static_cast<int>(std::floor(x + 1e-9));
}

AdaptivityPlan hybrid_plan(double rho, int w, long long n, long long k) {
    if (w < 1) raise(Err::BadConfig, "hybrid_plan: w >= 1");
    if (!(rho > 0.0)) raise(Err::BadConfig, "hybrid_plan: rho > 0");
    if (k < 1 || n < 2) raise(Err::BadConfig, "hybrid_plan: need n >= 2 and k >= 1");
    const double implied = std::pow(static_cast<double>(n), rho);
    if (std::abs(implied - static_cast<double>(k)) > 1.0 + 1e-6 * implied)
        raise(Err::BadConfig, "hybrid_plan: rho inconsistent with k = round(n^rho)");

    AdaptivityPlan plan;
    const double w_cut = static_cast<double>(w) / (2.0 * w + 2.0);
    if (rho >= w_cut) {
        plan.level = w;
        long long kp = std::llround(std::pow(static_cast<double>(n), w_cut));
        plan.resample_k_prime = std::min(kp, k);
    } else {
        // Smallest l <= w with theta_l <= rho < l/(2l+2); exists because the
        // intervals overlap and cover (0, w/(2w+2)).
        int chosen = 0;
        for (int l = 1; l <= w; ++l) {
            const Rational theta = threshold_exponent(l);
            const bool lower_ok = rho * theta.den >= static_cast<double>(theta.num) - 1e-12;
            const bool upper_ok = rho < static_cast<double>(l) / (2.0 * l + 2.0);
            if (lower_ok && upper_ok) {
                chosen = l;
                break;
            }
        }
        if (chosen == 0) raise(Err::BadConfig, "hybrid_plan: no feasible level for rho");
        plan.level = chosen;
        plan.resample_k_prime = k;
    }
    plan.grid = revised_geometric_grid(plan.level, plan.resample_k_prime, n);
    return plan;
}

} // namespace slhvb
