#pragma once

#include <optional>
#include <vector>

namespace slhvb {

// Exploration fractions (eps_0, ..., eps_l): strictly positive, sum to 1.
struct GridSpec {
    int level = 1;
    std::vector<double> fractions;
};

struct Rational {
    long long num = 0;
    long long den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct AdaptivityPlan {
    int level = 1;
    long long resample_k_prime = 1;
    GridSpec grid;
};

// eps_i = (k/n)^{(l-i)/(l+2)} for i < l, eps_l = 1 - sum. Throws
// Err::GridInfeasible when the partial sum reaches 1. with_log_factor
// additionally multiplies eps_i by (ln n)^{(l-i)/(l+2)}.
GridSpec revised_geometric_grid(int l, long long k, long long n, bool with_log_factor = false);

// Same ratios, but the weights (including w_l = 1) are normalized to sum 1.
// Always feasible; used where the strict grid has no room for a final phase.
GridSpec revised_geometric_grid_normalized(int l, long long k, long long n);

// Cumulative grid points u_0 = a, u_i = a*sqrt(u_{i-1}) with a = n^{1/(2-2^-l)}
// so that u_l = n exactly; fractions are consecutive differences over n.
GridSpec minimax_grid(int l, long long n);

// Unnormalized weights b^{i+1} with b = n^{1/l}, normalized to sum 1.
GridSpec geometric_grid(int l, long long n);

// theta_l = (l-1)/(2l+1), reduced.
Rational threshold_exponent(int l);

// floor((1+rho)/(1-2rho)) for rho < 1/2; nullopt means unbounded (rho >= 1/2).
std::optional<int> max_feasible_level(double rho);

// Algorithm: rho < 1/5 -> (l=1, k'=k); 1/5 <= rho < w/(2w+2) -> smallest l <= w
// with theta_l <= rho < l/(2l+2), k'=k; otherwise l=w, k' = round(n^{w/(2w+2)}).
// The grid is the revised geometric grid for the chosen (l, k').
AdaptivityPlan hybrid_plan(double rho, int w, long long n, long long k);

} // namespace slhvb
