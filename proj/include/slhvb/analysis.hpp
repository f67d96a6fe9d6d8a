#pragma once

#include <array>
#include <utility>
#include <vector>

#include "slhvb/rng.hpp"

namespace slhvb {

// Cell index convention throughout: (post ? 2 : 0) + (treatment ? 1 : 0),
// i.e. 0 = pre/control, 1 = pre/treatment, 2 = post/control, 3 = post/treatment.
inline int cell_index(bool post, bool treatment) {
    return (post ? 2 : 0) + (treatment ? 1 : 0);
}

struct CellStats {
    bool treatment = false;
    bool post = false;
    long long count = 1;
    double mean = 0.0;
    double se_mean = 1.0;
};

struct ObsRow {
    int t = 0; // 1 when the observation is from the post period
    int i = 0; // 1 when the unit is in the treatment group
    double y = 0.0;
};

struct DidFit {
    std::array<double, 4> beta{};   // beta0..beta3 on regressors (1, t, i, t*i)
    std::array<double, 4> se{};
    std::array<double, 4> t_stat{};
    std::array<double, 4> p_value{};
    std::array<std::pair<double, double>, 4> ci95{};
    long long n_obs = 0;
    double sigma2 = 0.0; // residual variance (0 in a saturated fit with no dof)
};

// OLS for Y = b0 + b1 t + b2 i + b3 t*i with homoskedastic standard errors
// and normal-approximation p-values. In the saturated 2x2 design the point
// estimates are the cell-mean contrasts. Throws Err::RankDeficient when a
// cell is empty or the normal equations are singular.
DidFit did_ols(const std::vector<ObsRow>& table);

// One-sided Z-test of the difference in differences computed from the four
// cell summaries: z = dbar / sqrt(sum se^2), p = 1 - Phi(z).
std::pair<double, double> did_z_test(const std::array<CellStats, 4>& cells);

// Bootstrap variant: B replicate means of `resample_size` draws with
// replacement per cell; the Z formula is applied to the bootstrap grand means
// and the replicate-level standard errors. Throws Err::DegenerateVariance
// when a cell's bootstrap spread collapses to zero.
std::pair<double, double> bootstrap_did(const std::array<std::vector<double>, 4>& samples,
                                        long long draws_B, long long resample_size, Rng& rng);

// beta3 / (beta0 + beta1): relative lift of the post-period treatment mean
// over the post-period control baseline.
double lift_percentage(const DidFit& fit);

double normal_cdf(double x);

} // namespace slhvb
