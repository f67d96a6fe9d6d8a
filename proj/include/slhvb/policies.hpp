#pragma once

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "slhvb/batched_bandits.hpp"
#include "slhvb/environment.hpp"
#include "slhvb/grids.hpp"

namespace slhvb {

class Policy {
public:
    virtual ~Policy() = default;
    // Allocation for the current round; must sum to n. The newest cohort in
    // the pool is the round's arrivals.
    virtual Allocation allocate(const ArmPool& pool, Rng& rng) = 0;
    virtual void observe(const RoundOutcome& outcome, const ArmPool& pool) = 0;
    // Largest cohort age this policy may allocate to.
    virtual int age_horizon() const = 0;
};

// Pipelined policy: one BSE instance per live cohort, the cohort of age j
// executing BSE phase j. Ages 0..l-1 receive their floor(eps_j * n) phase
// batches; the age-l cohort's exploit batch absorbs the round remainder. In
// warm-up rounds (no age-l cohort yet) the absent ages' slots are handed out
// as exploit pulls on the live cohorts' current picks, proportionally to the
// grid weights.
class InducedBsePolicy : public Policy {
public:
    InducedBsePolicy(AdaptivityPlan plan, long long n, BseOptions options = {});

    Allocation allocate(const ArmPool& pool, Rng& rng) override;
    void observe(const RoundOutcome& outcome, const ArmPool& pool) override;
    int age_horizon() const override { return plan_.level; }

    const AdaptivityPlan& plan() const { return plan_; }
    const std::map<long long, BseState>& cohort_states() const { return cohort_states_; }

private:
    struct Pending {
        Allocation phase_batch;
        Allocation extra_batch;
    };

    AdaptivityPlan plan_;
    long long n_;
    BseOptions options_;
    std::map<long long, BseState> cohort_states_; // birth_round -> state
    std::map<long long, Pending> pending_;
};

// Hybrid policy: chooses (l, k') from (rho, w) and runs the induced BSE with
// the revised geometric grid.
std::unique_ptr<InducedBsePolicy> make_hybrid(double rho, int w, long long n, long long k,
                                              BseOptions options = {});

Allocation baseline_oracle_greedy(const ArmPool& pool, long long n);
Allocation baseline_uniform_random(const ArmPool& pool, long long n, Rng& rng);

class OracleGreedyPolicy : public Policy {
public:
    explicit OracleGreedyPolicy(long long n, int w) : n_(n), w_(w) {}
    Allocation allocate(const ArmPool& pool, Rng&) override {
        return baseline_oracle_greedy(pool, n_);
    }
    void observe(const RoundOutcome&, const ArmPool&) override {}
    int age_horizon() const override { return w_; }

private:
    long long n_;
    int w_;
};

class UniformRandomPolicy : public Policy {
public:
    explicit UniformRandomPolicy(long long n, int w) : n_(n), w_(w) {}
    Allocation allocate(const ArmPool& pool, Rng& rng) override {
        return baseline_uniform_random(pool, n_, rng);
    }
    void observe(const RoundOutcome&, const ArmPool&) override {}
    int age_horizon() const override { return w_; }

private:
    long long n_;
    int w_;
};

struct BetaPosterior {
    double alpha = 1.0;
    double beta = 1.0;
};

// One user request of `slots` cards: a Thompson score per card, well-explored
// (alpha+beta > theta) and under-explored cards sorted into two descending
// queues, each slot drawing Ber(eps) for the under-explored queue. A depleted
// queue falls through to the other; when both run dry and recycling is
// allowed, the ranking restarts (cards may then repeat).
std::vector<ArmId> rbse_rank_request(const std::map<ArmId, BetaPosterior>& posteriors, double eps,
                                     double theta, long long slots, Rng& rng,
                                     bool allow_recycle = false);

// Predicted mean rewards for one card (the synthetic stand-in for the DNN).
using Predictor = std::function<std::vector<double>(const Arm&, Rng&)>;

// Noisy-oracle predictor: true mu + N(0, sigma), clamped inside (0, 1).
Predictor make_noisy_predictor(double sigma, int samples);

// Thompson-sampling variant: new cards get Beta priors fitted by method of
// moments from predictor output (flat Beta(1,1) on infeasible moments or when
// no predictor is given), posteriors update conjugately from interactions.
class RandomizedBsePolicy : public Policy {
public:
    RandomizedBsePolicy(long long n, int w, double explore_prob_eps,
                        double well_explored_threshold_theta, Predictor predictor,
                        long long request_size = 16);

    Allocation allocate(const ArmPool& pool, Rng& rng) override;
    void observe(const RoundOutcome& outcome, const ArmPool& pool) override;
    int age_horizon() const override { return w_; }

    const std::map<ArmId, BetaPosterior>& posteriors() const { return posteriors_; }
    long long prior_fallbacks() const { return prior_fallbacks_; }

private:
    long long n_;
    int w_;
    double eps_;
    double theta_;
    Predictor predictor_;
    long long request_size_;
    std::map<ArmId, BetaPosterior> posteriors_;
    long long prior_fallbacks_ = 0;
};

// The two k=1 instance streams behind the worst-case loss argument: both open
// with a mean-1/2 arm, then one stream delivers a mean-1 arm where the other
// delivers mean-0, repeating for demonstration sweeps.
struct WorstCasePair {
    std::vector<std::vector<double>> instance_a;
    std::vector<std::vector<double>> instance_b;
};
WorstCasePair worst_case_pair(int w);

} // namespace slhvb
