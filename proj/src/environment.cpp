#include "slhvb/environment.hpp"

#include <string>

#include "slhvb/errors.hpp"

namespace slhvb {

long long ArmPool::arm_count() const {
    long long total = 0;
    for (const auto& c : cohorts_) total += static_cast<long long>(c.arms.size());
    return total;
}

const Arm* ArmPool::find(ArmId id) const {
    for (const auto& c : cohorts_)
        for (const auto& a : c.arms)
            if (a.id == id) return &a;
    return nullptr;
}

int ArmPool::age_of(ArmId id) const {
    const Arm* a = find(id);
    if (!a) raise(Err::UnavailableArm, "age_of: arm " + std::to_string(id) + " not available");
    return static_cast<int>(current_round_ - a->birth_round);
}

std::vector<ArmId> ArmPool::advance_round(const EnvConfig& config, Rng& rng) {
    ++current_round_;
    Cohort cohort;
    cohort.birth_round = current_round_;
    cohort.arms.reserve(static_cast<std::size_t>(config.k));
    if (!config.scripted_means.empty()) {
        const auto& means =
            config.scripted_means[static_cast<std::size_t>(current_round_) %
                                  config.scripted_means.size()];
        for (double mu : means) cohort.arms.push_back({next_id_++, current_round_, mu});
    } else {
        for (long long i = 0; i < config.k; ++i)
            cohort.arms.push_back({next_id_++, current_round_, config.prior.sample(rng)});
    }
    cohorts_.push_back(std::move(cohort));

    std::vector<ArmId> expired;
    while (!cohorts_.empty() && cohorts_.front().birth_round < current_round_ - config.w) {
        for (const auto& a : cohorts_.front().arms) expired.push_back(a.id);
        cohorts_.pop_front();
    }
    return expired;
}

std::pair<Arm, double> oracle_best(const ArmPool& pool) {
    if (pool.empty()) raise(Err::EmptyPool, "oracle_best: pool has no arms");
    const Arm* best = nullptr;
    for (const auto& c : pool.cohorts()) {
        for (const auto& a : c.arms) {
            if (!best || a.mu > best->mu || (a.mu == best->mu && a.id < best->id)) best = &a;
        }
    }
    return {*best, best->mu};
}

double draw_reward(const Arm& arm, RewardModel model, Rng& rng) {
    switch (model) {
        case RewardModel::Bernoulli:
            return bernoulli(rng, arm.mu) ? 1.0 : 0.0;
        case RewardModel::PointMass:
            return arm.mu;
    }
    return 0.0;
}

RoundOutcome play(const ArmPool& pool, const Allocation& allocation, const EnvConfig& config,
                  Rng& rng) {
    long long total = 0;
    for (const auto& [id, count] : allocation) {
        if (count < 0) raise(Err::BadConfig, "play: negative pull count");
        total += count;
    }
    if (total != config.n)
        raise(Err::WrongTotal, "play: allocation sums to " + std::to_string(total) +
                                   ", expected n = " + std::to_string(config.n));

    RoundOutcome out;
    out.round = pool.current_round();
    out.oracle_mean = oracle_best(pool).second;
    for (const auto& [id, count] : allocation) {
        if (count == 0) continue;
        const Arm* arm = pool.find(id);
        if (!arm)
            raise(Err::UnavailableArm, "play: arm " + std::to_string(id) + " not available");
        RewardBatch batch;
        batch.count = count;
        switch (config.reward_model) {
            case RewardModel::Bernoulli: {
                std::binomial_distribution<long long> bin(count, arm->mu);
                batch.sum = static_cast<double>(bin(rng));
                break;
            }
            case RewardModel::PointMass:
                batch.sum = static_cast<double>(count) * arm->mu;
                break;
        }
        out.pulls[id] = count;
        out.rewards[id] = batch;
        out.mus[id] = arm->mu;
    }
    return out;
}

} // namespace slhvb
