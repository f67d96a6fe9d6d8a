#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "slhvb/environment.hpp"
#include "slhvb/grids.hpp"
#include "slhvb/rng.hpp"

namespace slhvb {

enum class FinalPick { EmpiricalBest, First };

struct BseOptions {
    FinalPick final_pick = FinalPick::EmpiricalBest;
    // When set, elimination uses means pooled over all phases instead of the
    // current phase only.
    bool cumulative_means = false;
};

struct ArmStats {
    long long pulls = 0;
    double reward_sum = 0.0;
};

// Batched Successive Elimination over one cohort of arms. Phases 0..l-1
// explore the surviving set equally; phase l commits to the designated
// survivor. Batches are emitted with bse_next_batch and settled with
// bse_observe; total pulls across all phases equal budget_n exactly.
struct BseState {
    GridSpec grid;
    int phase = 0; // level+1 once the final batch has been observed
    std::vector<ArmId> survivors; // sorted by id
    std::vector<ArmId> resampled; // the k' subset chosen at init
    std::map<ArmId, ArmStats> stats; // cumulative over all phases and extras
    long long budget_n = 1;
    long long n_env = 2; // n inside the confidence radius's log term
    long long used_pulls = 0;
    bool terminated_early = false;
    bool batch_outstanding = false;
    Allocation last_batch;
    std::map<ArmId, ArmStats> prev_stats; // snapshot for phase-local means
    int skipped_phases = 0;
    BseOptions options;

    bool done() const { return phase > grid.level; }
};

BseState bse_init(std::span<const ArmId> arm_ids, GridSpec grid, long long k_prime,
                  long long n_env, long long budget_n, Rng& rng, BseOptions options = {});

// 3 * n_i^{-1/2} * (ln n_env)^{1/2}. Throws Err::ZeroPulls when n_i == 0.
double confidence_radius(long long n_i, long long n_env);

// Emits the batch for the current phase. For phase i < l each survivor gets
// floor(slots/|S_i|) pulls (slots defaults to floor(eps_i * budget_n)); a
// zero per-arm count skips the phase. For phase l the designated survivor
// gets all remaining budget (or `slots` when the caller owns the remainder
// accounting). `spread_exactly` distributes slots over survivors with
// remainders, used by the pipeline's warm-up rounds.
Allocation bse_next_batch(BseState& state, std::optional<long long> slots = std::nullopt,
                          bool spread_exactly = false);

// Settles the outstanding batch: updates statistics, applies the elimination
// inequality, advances the phase. Rewards must cover exactly the arms of the
// last batch with at least the emitted counts (exploit extras on the same
// arms may ride along).
void bse_observe(BseState& state, const std::map<ArmId, RewardBatch>& rewards);

// Adds observations that belong to no phase (pipeline exploit extras).
void bse_record_extra(BseState& state, const std::map<ArmId, RewardBatch>& rewards);

// The arm the final phase commits to under the configured pick rule.
ArmId bse_designated(const BseState& state);

// (1/budget) * sum_a (mu_max - mu_a) * N_a. Throws Err::WrongTotal when the
// counts do not sum to budget_n.
double bb_regret(const std::map<ArmId, long long>& pull_history,
                 const std::map<ArmId, double>& mus, long long budget_n);

} // namespace slhvb
