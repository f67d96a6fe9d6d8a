#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <vector>

#include "slhvb/prior.hpp"
#include "slhvb/rng.hpp"

namespace slhvb {

using ArmId = std::uint64_t;
using Allocation = std::map<ArmId, long long>;

enum class RewardModel { Bernoulli, PointMass };

struct EnvConfig {
    long long n = 1;      // plays per round
    long long k = 1;      // arrivals per round
    int w = 1;            // lifetime in rounds
    long long horizon_T = 1;
    PriorSpec prior = PriorSpec::uniform();
    RewardModel reward_model = RewardModel::Bernoulli;
    std::uint64_t base_seed = 0;
    // When non-empty, cohort means come from this table (cycled by round)
    // instead of the prior; used by the scripted worst-case instances.
    std::vector<std::vector<double>> scripted_means;
};

struct Arm {
    ArmId id = 0;
    long long birth_round = 0;
    double mu = 0.0; // hidden from policies
};

struct Cohort {
    long long birth_round = 0;
    std::vector<Arm> arms;
};

// Sliding window of the cohorts born in the last w+1 rounds. A cohort born in
// round b is available through round b + w.
class ArmPool {
public:
    long long current_round() const { return current_round_; }
    const std::deque<Cohort>& cohorts() const { return cohorts_; }
    bool empty() const { return cohorts_.empty(); }
    long long arm_count() const;
    const Arm* find(ArmId id) const;
    // Age of an arm's cohort at the current round (0 = arrived this round).
    int age_of(ArmId id) const;

    // Appends a fresh cohort with means drawn iid from the prior (or the
    // scripted table), drops cohorts older than w, increments current_round.
    // Returns the ids that expired this round.
    std::vector<ArmId> advance_round(const EnvConfig& config, Rng& rng);

private:
    std::deque<Cohort> cohorts_;
    long long current_round_ = -1;
    ArmId next_id_ = 0;
};

// Best available arm by true mean; ties broken by smallest id.
std::pair<Arm, double> oracle_best(const ArmPool& pool);

double draw_reward(const Arm& arm, RewardModel model, Rng& rng);

// Realized rewards for one batch of pulls of the same arm, kept as sufficient
// statistics (count and sum). Bernoulli batches draw a single binomial.
struct RewardBatch {
    long long count = 0;
    double sum = 0.0;
};

struct RoundOutcome {
    long long round = 0;
    Allocation pulls;
    std::map<ArmId, RewardBatch> rewards;
    std::map<ArmId, double> mus; // true means of pulled arms (metrics only)
    double oracle_mean = 0.0;
};

// Validates availability and slot totals, realizes rewards, records the
// oracle mean. Throws Err::UnavailableArm / Err::WrongTotal.
RoundOutcome play(const ArmPool& pool, const Allocation& allocation, const EnvConfig& config,
                  Rng& rng);

} // namespace slhvb
