#include "slhvb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "slhvb/errors.hpp"

namespace slhvb {

double round_loss(const RoundOutcome& outcome, long long n) {
    double acc = 0.0;
    for (const auto& [id, count] : outcome.pulls)
        acc += static_cast<double>(count) * (outcome.oracle_mean - outcome.mus.at(id));
    return acc / static_cast<double>(n);
}

std::pair<double, double> external_internal_split(const ArmPool& pool,
                                                  const Allocation& allocation, long long n) {
    std::map<long long, double> cohort_max; // birth_round -> max mu
    std::map<ArmId, long long> arm_cohort;
    std::map<ArmId, double> arm_mu;
    double window_max = -std::numeric_limits<double>::infinity();
    for (const auto& c : pool.cohorts()) {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& a : c.arms) {
            m = std::max(m, a.mu);
            arm_cohort[a.id] = c.birth_round;
            arm_mu[a.id] = a.mu;
        }
        cohort_max[c.birth_round] = m;
        window_max = std::max(window_max, m);
    }

    double external = 0.0;
    for (const auto& [birth, m] : cohort_max) external = std::max(external, window_max - m);

    double internal = 0.0;
    for (const auto& [id, count] : allocation) {
        if (count == 0) continue;
        auto it = arm_cohort.find(id);
        if (it == arm_cohort.end())
            raise(Err::UnavailableArm, "external_internal_split: unknown arm in allocation");
        internal += static_cast<double>(count) / static_cast<double>(n) *
                    (cohort_max.at(it->second) - arm_mu.at(id));
    }
    return {external, internal};
}

double episode_mean_loss(const std::vector<RoundLog>& logs, long long burn_in) {
    if (static_cast<long long>(logs.size()) <= burn_in)
        raise(Err::TooFewRounds, "episode_mean_loss: need more rounds than burn_in");
    double acc = 0.0;
    long long count = 0;
    for (const auto& log : logs) {
        if (log.round < burn_in) continue;
        acc += log.loss;
        ++count;
    }
    if (count == 0) raise(Err::TooFewRounds, "episode_mean_loss: burn_in consumed every round");
    return acc / static_cast<double>(count);
}

std::pair<double, double> aggregate_mean_ci(const std::vector<double>& values) {
    if (values.empty()) raise(Err::TooFewRounds, "aggregate_mean_ci: no values");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    return {mean, 1.96 * sd / std::sqrt(static_cast<double>(values.size()))};
}

std::pair<double, double> average_loss(const std::vector<std::vector<RoundLog>>& replication_logs,
                                       long long burn_in) {
    std::vector<double> means;
    means.reserve(replication_logs.size());
    for (const auto& logs : replication_logs) means.push_back(episode_mean_loss(logs, burn_in));
    return aggregate_mean_ci(means);
}

double fit_loss_exponent(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) raise(Err::BadConfig, "fit_loss_exponent: need at least 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [n, loss] : points) {
        if (!(loss > 0.0)) raise(Err::NonPositiveLoss, "fit_loss_exponent: losses must be positive");
        const double x = std::log(n), y = std::log(loss);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(points.size());
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0) raise(Err::BadConfig, "fit_loss_exponent: degenerate n values");
    return (m * sxy - sx * sy) / denom;
}

} // namespace slhvb
