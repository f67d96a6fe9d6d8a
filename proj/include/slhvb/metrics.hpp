#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "slhvb/environment.hpp"

namespace slhvb {

struct RoundLog {
    long long round = 0;
    double loss = 0.0;
    double external = 0.0;
    double internal = 0.0;
    std::vector<long long> pulls_by_age; // ages 0..L, sums to n
};

struct EpisodeSummary {
    std::string config_digest;
    double mean_loss = 0.0;
    double loss_ci_halfwidth = 0.0;
    long long rounds = 0;
    std::uint64_t seed = 0;
};

// (1/n) * sum_a pulls(a) * (mu*_t - mu_a); depends on true means and counts
// only, never on reward realizations.
double round_loss(const RoundOutcome& outcome, long long n);

// Decomposes the round loss into cross-cohort heterogeneity of the maxima
// (external) and within-cohort suboptimality of the played arms (internal).
// The external maximum runs over every cohort in the window so that
// round_loss <= external + internal holds on every realized round.
std::pair<double, double> external_internal_split(const ArmPool& pool,
                                                  const Allocation& allocation, long long n);

// Mean of the per-round losses after dropping the first burn_in rounds.
double episode_mean_loss(const std::vector<RoundLog>& logs, long long burn_in);

// Mean and 95% normal-quantile CI halfwidth across replications.
std::pair<double, double> aggregate_mean_ci(const std::vector<double>& values);

// Long-run average loss estimate over replications: per-episode means after
// burn-in, CI from the across-replication variance.
std::pair<double, double> average_loss(const std::vector<std::vector<RoundLog>>& replication_logs,
                                       long long burn_in);

// OLS slope of ln(loss) against ln(n). Throws Err::NonPositiveLoss.
double fit_loss_exponent(const std::vector<std::pair<double, double>>& points);

} // namespace slhvb
