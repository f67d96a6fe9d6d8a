#include "slhvb/policies.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "slhvb/errors.hpp"
#include "slhvb/prior.hpp"

namespace slhvb {

namespace {

long long floor_slots(double x) { return static_cast<long long>(std::floor(x + 1e-9)); }

} // namespace

InducedBsePolicy::InducedBsePolicy(AdaptivityPlan plan, long long n, BseOptions options)
    : plan_(std::move(plan)), n_(n), options_(options) {
    if (n_ < 1) raise(Err::BadConfig, "InducedBsePolicy: n >= 1");
    if (plan_.grid.fractions.size() != static_cast<std::size_t>(plan_.level) + 1)
        raise(Err::BadConfig, "InducedBsePolicy: grid arity mismatch");
}

Allocation InducedBsePolicy::allocate(const ArmPool& pool, Rng& rng) {
    const long long t = pool.current_round();
    if (pool.empty() || pool.cohorts().back().birth_round != t)
        raise(Err::BadConfig, "InducedBsePolicy: expected a fresh cohort for round " +
                                  std::to_string(t));

    const auto& fresh = pool.cohorts().back();
    std::vector<ArmId> ids;
    ids.reserve(fresh.arms.size());
    for (const auto& a : fresh.arms) ids.push_back(a.id);
    const long long k_prime =
        std::min<long long>(plan_.resample_k_prime, static_cast<long long>(ids.size()));
    cohort_states_.emplace(t, bse_init(ids, plan_.grid, k_prime, n_, n_, rng, options_));

    const int l = plan_.level;
    for (auto it = cohort_states_.begin(); it != cohort_states_.end();)
        it = (it->first < t - l) ? cohort_states_.erase(it) : std::next(it);

    const int oldest_age = static_cast<int>(std::min<long long>(t, l));
    pending_.clear();
    Allocation result;
    long long emitted = 0;

    // Phase batch for every live cohort; the age-l cohort takes the remainder.
    for (int j = 0; j <= oldest_age; ++j) {
        auto& state = cohort_states_.at(t - j);
        Allocation batch;
        if (j == l)
            batch = bse_next_batch(state, n_ - emitted);
        else
            batch = bse_next_batch(state);
        for (const auto& [id, c] : batch) {
            result[id] += c;
            emitted += c;
        }
        pending_[t - j].phase_batch = std::move(batch);
    }

    // Warm-up rounds: absent cohorts' slot shares are handed out as exploit
    // pulls on the live cohorts' current picks, proportionally to the grid
    // weights; the oldest live cohort absorbs the integer residue.
    if (oldest_age < l && emitted < n_) {
        const long long shortfall = n_ - emitted;
        double denom = 0.0;
        for (int j = 0; j <= oldest_age; ++j)
            denom += plan_.grid.fractions[static_cast<std::size_t>(j)];
        long long handed = 0;
        for (int j = 0; j <= oldest_age; ++j) {
            long long extra;
            if (j == oldest_age) {
                extra = shortfall - handed;
            } else {
                extra = floor_slots(static_cast<double>(shortfall) *
                                    plan_.grid.fractions[static_cast<std::size_t>(j)] / denom);
            }
            if (extra <= 0) continue;
            handed += extra;
            auto& state = cohort_states_.at(t - j);
            const ArmId pick = bse_designated(state);
            result[pick] += extra;
            pending_[t - j].extra_batch[pick] += extra;
        }
    }
    return result;
}

void InducedBsePolicy::observe(const RoundOutcome& outcome, const ArmPool&) {
    for (auto& [birth, pending] : pending_) {
        auto& state = cohort_states_.at(birth);
        std::map<ArmId, RewardBatch> phase_rewards;
        for (const auto& [id, c] : pending.phase_batch) {
            auto it = outcome.rewards.find(id);
            if (it == outcome.rewards.end())
                raise(Err::RewardMismatch, "InducedBsePolicy: missing rewards for arm " +
                                               std::to_string(id));
            phase_rewards[id] = it->second; // exploit extras on batch arms ride along
        }
        std::map<ArmId, RewardBatch> extra_rewards;
        for (const auto& [id, c] : pending.extra_batch) {
            if (pending.phase_batch.count(id)) continue;
            auto it = outcome.rewards.find(id);
            if (it == outcome.rewards.end())
                raise(Err::RewardMismatch, "InducedBsePolicy: missing rewards for arm " +
                                               std::to_string(id));
            extra_rewards[id] = it->second;
        }
        bse_observe(state, phase_rewards);
        if (!extra_rewards.empty()) bse_record_extra(state, extra_rewards);
    }
    pending_.clear();
}

std::unique_ptr<InducedBsePolicy> make_hybrid(double rho, int w, long long n, long long k,
                                              BseOptions options) {
    return std::make_unique<InducedBsePolicy>(hybrid_plan(rho, w, n, k), n, options);
}

Allocation baseline_oracle_greedy(const ArmPool& pool, long long n) {
    const auto [arm, mu] = oracle_best(pool);
    Allocation alloc;
    alloc[arm.id] = n;
    return alloc;
}

Allocation baseline_uniform_random(const ArmPool& pool, long long n, Rng& rng) {
    if (pool.empty()) raise(Err::EmptyPool, "baseline_uniform_random: no arms");
    std::vector<ArmId> ids;
    for (const auto& c : pool.cohorts())
        for (const auto& a : c.arms) ids.push_back(a.id);
    // n iid uniform picks, drawn as a chain of binomials.
    Allocation alloc;
    long long remaining = n;
    const long long total = static_cast<long long>(ids.size());
    for (long long i = 0; i < total && remaining > 0; ++i) {
        long long c;
        if (i + 1 == total) {
            c = remaining;
        } else {
            std::binomial_distribution<long long> bin(remaining, 1.0 / static_cast<double>(total - i));
            c = bin(rng);
        }
        if (c > 0) alloc[ids[static_cast<std::size_t>(i)]] = c;
        remaining -= c;
    }
    return alloc;
}

std::vector<ArmId> rbse_rank_request(const std::map<ArmId, BetaPosterior>& posteriors, double eps,
                                     double theta, long long slots, Rng& rng, bool allow_recycle) {
    if (posteriors.empty()) raise(Err::NoCards, "rbse_rank_request: no cards available");
    if (!(eps >= 0.0 && eps <= 1.0)) raise(Err::BadConfig, "rbse_rank_request: eps in [0,1]");

    struct Scored {
        double score;
        ArmId id;
    };
    std::vector<Scored> well, under;
    for (const auto& [id, post] : posteriors) {
        std::gamma_distribution<double> ga(post.alpha, 1.0), gb(post.beta, 1.0);
        const double x = ga(rng);
        const double y = gb(rng);
        const double score = (x + y > 0.0) ? x / (x + y) : 0.5;
        if (post.alpha + post.beta > theta)
            well.push_back({score, id});
        else
            under.push_back({score, id});
    }
    auto by_score = [](const Scored& a, const Scored& b) {
        return a.score > b.score || (a.score == b.score && a.id < b.id);
    };
    std::sort(well.begin(), well.end(), by_score);
    std::sort(under.begin(), under.end(), by_score);

    std::vector<ArmId> out;
    out.reserve(static_cast<std::size_t>(slots));
    std::size_t iw = 0, iu = 0;
    for (long long s = 0; s < slots; ++s) {
        if (iw >= well.size() && iu >= under.size()) {
            if (!allow_recycle) break;
            iw = iu = 0;
        }
        const bool explore = bernoulli(rng, eps);
        if (explore && iu < under.size())
            out.push_back(under[iu++].id);
        else if (!explore && iw < well.size())
            out.push_back(well[iw++].id);
        else if (iu < under.size())
            out.push_back(under[iu++].id);
        else
            out.push_back(well[iw++].id);
    }
    return out;
}

Predictor make_noisy_predictor(double sigma, int samples) {
    if (samples < 2) raise(Err::BadConfig, "make_noisy_predictor: need at least 2 samples");
    return [sigma, samples](const Arm& arm, Rng& rng) {
        std::normal_distribution<double> noise(0.0, sigma);
        std::vector<double> preds(static_cast<std::size_t>(samples));
        for (auto& p : preds) p = std::clamp(arm.mu + noise(rng), 1e-6, 1.0 - 1e-6);
        return preds;
    };
}

RandomizedBsePolicy::RandomizedBsePolicy(long long n, int w, double explore_prob_eps,
                                         double well_explored_threshold_theta,
                                         Predictor predictor, long long request_size)
    : n_(n),
      w_(w),
      eps_(explore_prob_eps),
      theta_(well_explored_threshold_theta),
      predictor_(std::move(predictor)),
      request_size_(request_size) {
    if (request_size_ < 1) raise(Err::BadConfig, "RandomizedBsePolicy: request_size >= 1");
}

Allocation RandomizedBsePolicy::allocate(const ArmPool& pool, Rng& rng) {
    std::set<ArmId> available;
    for (const auto& c : pool.cohorts())
        for (const auto& a : c.arms) available.insert(a.id);
    for (auto it = posteriors_.begin(); it != posteriors_.end();)
        it = available.count(it->first) ? std::next(it) : posteriors_.erase(it);

    for (const auto& c : pool.cohorts()) {
        for (const auto& a : c.arms) {
            if (posteriors_.count(a.id)) continue;
            BetaPosterior post{1.0, 1.0};
            if (predictor_) {
                const std::vector<double> preds = predictor_(a, rng);
                double mean = 0.0;
                for (double p : preds) mean += p;
                mean /= static_cast<double>(preds.size());
                double var = 0.0;
                for (double p : preds) var += (p - mean) * (p - mean);
                var /= static_cast<double>(preds.size() - 1);
                try {
                    const BetaParams fit = fit_beta_moments(mean, var);
                    post = {fit.alpha, fit.beta};
                } catch (const Error&) {
                    ++prior_fallbacks_; // degenerate or infeasible moments: flat prior
                }
            }
            posteriors_.emplace(a.id, post);
        }
    }

    Allocation alloc;
    long long remaining = n_;
    while (remaining > 0) {
        const long long slots = std::min(remaining, request_size_);
        const auto picks = rbse_rank_request(posteriors_, eps_, theta_, slots, rng, true);
        for (ArmId id : picks) ++alloc[id];
        remaining -= static_cast<long long>(picks.size());
    }
    return alloc;
}

void RandomizedBsePolicy::observe(const RoundOutcome& outcome, const ArmPool&) {
    for (const auto& [id, rb] : outcome.rewards) {
        auto it = posteriors_.find(id);
        if (it == posteriors_.end()) continue;
        it->second.alpha += rb.sum;
        it->second.beta += static_cast<double>(rb.count) - rb.sum;
    }
}

WorstCasePair worst_case_pair(int w) {
    if (w < 1) raise(Err::BadConfig, "worst_case_pair: w >= 1");
    WorstCasePair pair;
    pair.instance_a = {{0.5}, {1.0}};
    pair.instance_b = {{0.5}, {0.0}};
    return pair;
}

} // namespace slhvb
