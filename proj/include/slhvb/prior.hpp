#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "slhvb/rng.hpp"

namespace slhvb {

struct BetaParams {
    double alpha;
    double beta;
};

enum class PriorFamily { Uniform, TruncatedBeta, PiecewiseConstant };

// A bounded-density distribution on (a sub-interval of) [0, 1] from which arm
// mean rewards are drawn. Immutable after construction; safe to share across
// threads. All sampling goes through an explicitly passed generator.
class PriorSpec {
public:
    static PriorSpec uniform();
    // Beta(alpha, beta) restricted to [lo, hi] and renormalized.
    static PriorSpec truncated_beta(double alpha, double beta, double lo = 0.0, double hi = 1.0);
    // Piecewise-constant density: breakpoints increasing in [0,1], densities[i]
    // on [breakpoints[i], breakpoints[i+1]). Must integrate to 1.
    static PriorSpec piecewise_constant(std::vector<double> breakpoints,
                                        std::vector<double> densities);

    // Asserts C1 <= f(x) <= C2 on a 10^4-point grid over the support.
    PriorSpec& declare_bounds(double c1, double c2);

    double density(double x) const;
    std::pair<double, double> support() const { return {lo_, hi_}; }
    double sample(Rng& rng) const;

    PriorFamily family() const { return family_; }
    double beta_alpha() const { return alpha_; }
    double beta_beta() const { return beta_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& densities() const { return densities_; }
    std::optional<std::pair<double, double>> declared_bounds() const { return declared_; }

private:
    PriorSpec() = default;
    void check_normalized_() const;
    void build_beta_cdf_();

    PriorFamily family_ = PriorFamily::Uniform;
    double lo_ = 0.0, hi_ = 1.0;
    double alpha_ = 1.0, beta_ = 1.0;
    double beta_norm_ = 1.0; // truncation mass of the un-truncated Beta pdf
    std::vector<double> breakpoints_;
    std::vector<double> densities_;
    std::vector<double> seg_cum_; // cumulative segment masses for sampling
    std::vector<double> beta_cdf_; // inverse-transform table for TruncatedBeta
    std::optional<std::pair<double, double>> declared_;
};

// Min and max of the density over an even grid on the support. Throws
// Err::DensityUnbounded when the minimum is 0 (Assumption-style priors need a
// strictly positive lower density bound).
std::pair<double, double> validate_bounded_density(const PriorSpec& p, int grid_points = 10000);

std::vector<double> sample_means(const PriorSpec& p, long long count, Rng& rng);

// Method-of-moments Beta fit. Throws Err::InfeasibleMoments when
// variance >= mean*(1-mean).
BetaParams fit_beta_moments(double mean, double variance);

// 1/(X^(1) - X^(2)) for the two largest values; nullopt when they tie.
std::optional<double> gap_reciprocal(std::span<const double> values);
std::optional<double> gap_reciprocal_sample(const PriorSpec& p, int m, Rng& rng);

} // namespace slhvb
