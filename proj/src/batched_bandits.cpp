#include "slhvb/batched_bandits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "slhvb/errors.hpp"

namespace slhvb {

BseState bse_init(std::span<const ArmId> arm_ids, GridSpec grid, long long k_prime,
                  long long n_env, long long budget_n, Rng& rng, BseOptions options) {
    if (arm_ids.empty()) raise(Err::BadKPrime, "bse_init: no arms");
    if (k_prime < 1 || k_prime > static_cast<long long>(arm_ids.size()))
        raise(Err::BadKPrime, "bse_init: k' = " + std::to_string(k_prime) +
                                  " outside [1, " + std::to_string(arm_ids.size()) + "]");
    if (grid.fractions.size() != static_cast<std::size_t>(grid.level) + 1)
        raise(Err::BadConfig, "bse_init: grid has wrong arity");
    if (budget_n < 1) raise(Err::BadConfig, "bse_init: budget_n >= 1");
    if (n_env < 2) raise(Err::BadConfig, "bse_init: n_env >= 2");

    BseState s;
    s.grid = std::move(grid);
    s.budget_n = budget_n;
    s.n_env = n_env;
    s.options = options;

    // Uniformly random k'-subset via partial Fisher-Yates.
    std::vector<ArmId> ids(arm_ids.begin(), arm_ids.end());
    for (long long i = 0; i < k_prime; ++i) {
        const std::uint64_t j =
            static_cast<std::uint64_t>(i) + uniform_index(rng, ids.size() - static_cast<std::size_t>(i));
        std::swap(ids[static_cast<std::size_t>(i)], ids[j]);
    }
    ids.resize(static_cast<std::size_t>(k_prime));
    std::sort(ids.begin(), ids.end());
    s.resampled = ids;
    s.survivors = std::move(ids);
    for (ArmId a : s.survivors) s.stats[a] = {};
    return s;
}

double confidence_radius(long long n_i, long long n_env) {
    if (n_i == 0) raise(Err::ZeroPulls, "confidence_radius: n_i must be positive");
    if (n_i < 0 || n_env < 2) raise(Err::BadConfig, "confidence_radius: bad arguments");
    return 3.0 / std::sqrt(static_cast<double>(n_i)) *
           std::sqrt(std::log(static_cast<double>(n_env)));
}

namespace {

long long floor_slots(double x) { return static_cast<long long>(std::floor(x + 1e-9)); }

} // namespace

Allocation bse_next_batch(BseState& state, std::optional<long long> slots, bool spread_exactly) {
    if (state.done()) raise(Err::PhaseExhausted, "bse_next_batch: all phases consumed");
    if (state.batch_outstanding)
        raise(Err::PhaseExhausted, "bse_next_batch: current phase already emitted");

    Allocation batch;
    const long long l = state.grid.level;
    if (state.phase < l) {
        const long long s = slots.value_or(
            floor_slots(state.grid.fractions[static_cast<std::size_t>(state.phase)] *
                        static_cast<double>(state.budget_n)));
        const long long m = static_cast<long long>(state.survivors.size());
        if (spread_exactly) {
            const long long base = s / m;
            const long long extra = s % m;
            long long idx = 0;
            for (ArmId a : state.survivors) {
                const long long c = base + (idx < extra ? 1 : 0);
                if (c > 0) batch[a] = c;
                ++idx;
            }
        } else {
            const long long per_arm = s / m;
            if (per_arm > 0)
                for (ArmId a : state.survivors) batch[a] = per_arm;
        }
        if (batch.empty()) ++state.skipped_phases;
    } else {
        const long long s = slots.value_or(state.budget_n - state.used_pulls);
        if (s < 0) raise(Err::BadConfig, "bse_next_batch: negative final batch");
        if (s > 0) batch[bse_designated(state)] = s;
    }

    for (const auto& [id, c] : batch) state.used_pulls += c;
    state.last_batch = batch;
    state.batch_outstanding = true;
    return batch;
}

void bse_observe(BseState& state, const std::map<ArmId, RewardBatch>& rewards) {
    if (!state.batch_outstanding)
        raise(Err::RewardMismatch, "bse_observe: no outstanding batch");
    if (rewards.size() != state.last_batch.size())
        raise(Err::RewardMismatch, "bse_observe: reward arms differ from the emitted batch");
    for (const auto& [id, rb] : rewards) {
        auto it = state.last_batch.find(id);
        if (it == state.last_batch.end())
            raise(Err::RewardMismatch, "bse_observe: arm " + std::to_string(id) + " not in batch");
        if (rb.count < it->second)
            raise(Err::RewardMismatch, "bse_observe: fewer rewards than pulls for arm " +
                                           std::to_string(id));
    }

    state.prev_stats = state.stats;
    for (const auto& [id, rb] : rewards) {
        auto& st = state.stats[id];
        st.pulls += rb.count;
        st.reward_sum += rb.sum;
    }

    const long long l = state.grid.level;
    if (state.phase < l && !state.last_batch.empty()) {
        // Eliminate only when every survivor has data this phase.
        bool all_observed = true;
        for (ArmId a : state.survivors)
            if (!rewards.count(a)) {
                all_observed = false;
                break;
            }
        if (all_observed) {
            std::map<ArmId, std::pair<double, long long>> mean_count;
            double best = -std::numeric_limits<double>::infinity();
            for (ArmId a : state.survivors) {
                double mean;
                long long count;
                if (state.options.cumulative_means) {
                    const auto& st = state.stats[a];
                    mean = st.reward_sum / static_cast<double>(st.pulls);
                    count = st.pulls;
                } else {
                    const auto& rb = rewards.at(a);
                    mean = rb.sum / static_cast<double>(rb.count);
                    count = rb.count;
                }
                mean_count[a] = {mean, count};
                best = std::max(best, mean);
            }
            std::vector<ArmId> next;
            for (ArmId a : state.survivors) {
                const auto& [mean, count] = mean_count[a];
                if (best - mean <= confidence_radius(count, state.n_env)) next.push_back(a);
            }
            state.survivors = std::move(next);
        }
    }

    ++state.phase;
    if (static_cast<long long>(state.survivors.size()) == 1 && state.phase < l)
        state.terminated_early = true;
    state.batch_outstanding = false;
    state.last_batch.clear();
}

void bse_record_extra(BseState& state, const std::map<ArmId, RewardBatch>& rewards) {
    for (const auto& [id, rb] : rewards) {
        auto& st = state.stats[id];
        st.pulls += rb.count;
        st.reward_sum += rb.sum;
    }
}

ArmId bse_designated(const BseState& state) {
    if (state.survivors.empty()) raise(Err::BadConfig, "bse_designated: no survivors");
    if (state.options.final_pick == FinalPick::First) return state.survivors.front();
    ArmId best_id = state.survivors.front();
    double best_mean = -std::numeric_limits<double>::infinity();
    for (ArmId a : state.survivors) { // ascending ids: ties keep the smallest
        auto it = state.stats.find(a);
        double mean = -std::numeric_limits<double>::infinity();
        if (it != state.stats.end() && it->second.pulls > 0)
            mean = it->second.reward_sum / static_cast<double>(it->second.pulls);
        if (mean > best_mean) {
            best_mean = mean;
            best_id = a;
        }
    }
    return best_id;
}

double bb_regret(const std::map<ArmId, long long>& pull_history,
                 const std::map<ArmId, double>& mus, long long budget_n) {
    long long total = 0;
    for (const auto& [id, c] : pull_history) {
        if (!mus.count(id)) raise(Err::BadConfig, "bb_regret: unknown arm in pull history");
        total += c;
    }
    if (total != budget_n)
        raise(Err::WrongTotal, "bb_regret: pulls sum to " + std::to_string(total) +
                                   ", expected " + std::to_string(budget_n));
    double mu_max = -std::numeric_limits<double>::infinity();
    for (const auto& [id, mu] : mus) mu_max = std::max(mu_max, mu);
    double acc = 0.0;
    for (const auto& [id, c] : pull_history)
        acc += (mu_max - mus.at(id)) * static_cast<double>(c);
    return acc / static_cast<double>(budget_n);
}

} // namespace slhvb
