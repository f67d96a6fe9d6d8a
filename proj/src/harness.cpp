#include "slhvb/harness.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "slhvb/csv.hpp"
#include "slhvb/errors.hpp"

namespace slhvb {

using nlohmann::json;

namespace {

PriorSpec prior_from_json(const json& j) {
    const std::string family = j.value("family", "uniform");
    PriorSpec prior = PriorSpec::uniform();
    if (family == "uniform") {
        prior = PriorSpec::uniform();
    } else if (family == "truncated_beta") {
        prior = PriorSpec::truncated_beta(j.at("alpha").get<double>(), j.at("beta").get<double>(),
                                          j.value("lo", 0.0), j.value("hi", 1.0));
    } else if (family == "piecewise_constant") {
        prior = PriorSpec::piecewise_constant(j.at("breakpoints").get<std::vector<double>>(),
                                              j.at("densities").get<std::vector<double>>());
    } else {
        raise(Err::BadConfig, "env.prior.family: unknown family '" + family + "'");
    }
    if (j.contains("declared_bounds")) {
        const auto b = j.at("declared_bounds").get<std::vector<double>>();
        if (b.size() != 2) raise(Err::BadConfig, "env.prior.declared_bounds: expected [C1, C2]");
        prior.declare_bounds(b[0], b[1]);
    }
    return prior;
}

json prior_to_json(const PriorSpec& prior) {
    json j;
    switch (prior.family()) {
        case PriorFamily::Uniform:
            j["family"] = "uniform";
            break;
        case PriorFamily::TruncatedBeta:
            j["family"] = "truncated_beta";
            j["alpha"] = prior.beta_alpha();
            j["beta"] = prior.beta_beta();
            j["lo"] = prior.support().first;
            j["hi"] = prior.support().second;
            break;
        case PriorFamily::PiecewiseConstant:
            j["family"] = "piecewise_constant";
            j["breakpoints"] = prior.breakpoints();
            j["densities"] = prior.densities();
            break;
    }
    if (const auto b = prior.declared_bounds())
        j["declared_bounds"] = std::vector<double>{b->first, b->second};
    return j;
}

} // namespace

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    const json& env = j.at("env");
    cfg.env.n = env.at("n").get<long long>();
    cfg.env.k = env.at("k").get<long long>();
    cfg.env.w = env.at("w").get<int>();
    cfg.env.horizon_T = env.at("horizon_T").get<long long>();
    if (env.contains("prior")) cfg.env.prior = prior_from_json(env.at("prior"));
    const std::string rm = env.value("reward_model", "bernoulli");
    if (rm == "bernoulli")
        cfg.env.reward_model = RewardModel::Bernoulli;
    else if (rm == "point_mass")
        cfg.env.reward_model = RewardModel::PointMass;
    else
        raise(Err::BadConfig, "env.reward_model: expected 'bernoulli' or 'point_mass'");
    if (env.contains("scripted_means"))
        cfg.env.scripted_means = env.at("scripted_means").get<std::vector<std::vector<double>>>();

    const json& pol = j.at("policy");
    cfg.policy.kind = pol.at("kind").get<std::string>();
    if (pol.contains("rho")) cfg.policy.rho = pol.at("rho").get<double>();
    cfg.policy.level = pol.value("level", 1);
    cfg.policy.grid = pol.value("grid", "revised_geometric");
    if (pol.contains("k_prime")) cfg.policy.k_prime = pol.at("k_prime").get<long long>();
    cfg.policy.with_log_factor = pol.value("with_log_factor", false);
    cfg.policy.final_pick = pol.value("final_pick", "empirical_best");
    cfg.policy.cumulative_means = pol.value("cumulative_means", false);
    cfg.policy.eps = pol.value("eps", 0.1);
    cfg.policy.theta = pol.value("theta", 100.0);
    cfg.policy.m = pol.value("m", 500);
    if (pol.contains("predictor_noise_sigma") && !pol.at("predictor_noise_sigma").is_null())
        cfg.policy.predictor_noise_sigma = pol.at("predictor_noise_sigma").get<double>();
    cfg.policy.request_size = pol.value("request_size", 16LL);

    cfg.replications = j.value("replications", 1LL);
    cfg.base_seed = j.value("base_seed", 0ULL);
    cfg.burn_in = j.value("burn_in", -1LL);
    cfg.output_path = j.value("output_path", std::string{});
    cfg.env.base_seed = cfg.base_seed;
    validate_config(cfg);
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["env"]["n"] = cfg.env.n;
    j["env"]["k"] = cfg.env.k;
    j["env"]["w"] = cfg.env.w;
    j["env"]["horizon_T"] = cfg.env.horizon_T;
    j["env"]["prior"] = prior_to_json(cfg.env.prior);
    j["env"]["reward_model"] =
        cfg.env.reward_model == RewardModel::Bernoulli ? "bernoulli" : "point_mass";
    if (!cfg.env.scripted_means.empty()) j["env"]["scripted_means"] = cfg.env.scripted_means;

    json pol;
    pol["kind"] = cfg.policy.kind;
    if (cfg.policy.rho) pol["rho"] = *cfg.policy.rho;
    if (cfg.policy.kind == "induced_bse" || cfg.policy.kind == "hybrid") {
        pol["level"] = cfg.policy.level;
        pol["grid"] = cfg.policy.grid;
        if (cfg.policy.k_prime) pol["k_prime"] = *cfg.policy.k_prime;
        pol["with_log_factor"] = cfg.policy.with_log_factor;
        pol["final_pick"] = cfg.policy.final_pick;
        pol["cumulative_means"] = cfg.policy.cumulative_means;
    }
    if (cfg.policy.kind == "randomized_bse") {
        pol["eps"] = cfg.policy.eps;
        pol["theta"] = cfg.policy.theta;
        pol["m"] = cfg.policy.m;
        if (cfg.policy.predictor_noise_sigma)
            pol["predictor_noise_sigma"] = *cfg.policy.predictor_noise_sigma;
        pol["request_size"] = cfg.policy.request_size;
    }
    j["policy"] = pol;
    j["replications"] = cfg.replications;
    j["base_seed"] = cfg.base_seed;
    j["burn_in"] = cfg.burn_in;
    j["output_path"] = cfg.output_path;
    return j;
}

long long effective_burn_in(const ExperimentConfig& cfg) {
    return cfg.burn_in >= 0 ? cfg.burn_in : cfg.env.w;
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.env.n < 1) raise(Err::BadConfig, "env.n: must be >= 1");
    if (cfg.env.k < 1) raise(Err::BadConfig, "env.k: must be >= 1");
    if (cfg.env.w < 1) raise(Err::BadConfig, "env.w: must be >= 1");
    if (cfg.env.horizon_T < 1) raise(Err::BadConfig, "env.horizon_T: must be >= 1");
    if (cfg.replications < 1) raise(Err::BadConfig, "replications: must be >= 1");
    if (cfg.env.horizon_T <= effective_burn_in(cfg))
        raise(Err::BadConfig, "env.horizon_T: must exceed burn_in");
    for (const auto& row : cfg.env.scripted_means)
        for (double mu : row)
            if (mu < 0.0 || mu > 1.0)
                raise(Err::BadConfig, "env.scripted_means: means must lie in [0,1]");

    const auto& p = cfg.policy;
    if (p.kind == "hybrid" || p.kind == "induced_bse" || p.kind == "randomized_bse" ||
        p.kind == "oracle" || p.kind == "uniform_random") {
        // recognized
    } else {
        raise(Err::BadConfig, "policy.kind: unknown kind '" + p.kind + "'");
    }
    if (p.kind == "induced_bse") {
        if (p.level < 1 || p.level > cfg.env.w)
            raise(Err::BadConfig, "policy.level: must be in [1, env.w]");
        if (p.grid != "revised_geometric" && p.grid != "revised_geometric_auto" &&
            p.grid != "geometric" && p.grid != "minimax")
            raise(Err::BadConfig, "policy.grid: unknown grid '" + p.grid + "'");
        if (p.k_prime && (*p.k_prime < 1 || *p.k_prime > cfg.env.k))
            raise(Err::BadConfig, "policy.k_prime: must be in [1, env.k]");
    }
    if (p.final_pick != "empirical_best" && p.final_pick != "first")
        raise(Err::BadConfig, "policy.final_pick: expected 'empirical_best' or 'first'");
    if (p.kind == "randomized_bse") {
        if (p.eps < 0.0 || p.eps > 1.0) raise(Err::BadConfig, "policy.eps: must be in [0,1]");
        if (p.theta < 0.0) raise(Err::BadConfig, "policy.theta: must be >= 0");
        if (p.m < 2) raise(Err::BadConfig, "policy.m: must be >= 2");
        if (p.request_size < 1) raise(Err::BadConfig, "policy.request_size: must be >= 1");
    }
    // Grid feasibility is part of config validity for the strict revised grid.
    if (p.kind == "induced_bse" || p.kind == "hybrid") make_policy(cfg);
}

std::string config_digest(const ExperimentConfig& cfg) {
    const std::string dump = config_to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::unique_ptr<Policy> make_policy(const ExperimentConfig& cfg) {
    const auto& p = cfg.policy;
    BseOptions opts;
    opts.final_pick = p.final_pick == "first" ? FinalPick::First : FinalPick::EmpiricalBest;
    opts.cumulative_means = p.cumulative_means;

    if (p.kind == "oracle") return std::make_unique<OracleGreedyPolicy>(cfg.env.n, cfg.env.w);
    if (p.kind == "uniform_random")
        return std::make_unique<UniformRandomPolicy>(cfg.env.n, cfg.env.w);
    if (p.kind == "hybrid") {
        const double rho =
            p.rho ? *p.rho
                  : std::log(static_cast<double>(cfg.env.k)) / std::log(static_cast<double>(cfg.env.n));
        return make_hybrid(rho, cfg.env.w, cfg.env.n, cfg.env.k, opts);
    }
    if (p.kind == "induced_bse") {
        const long long k_prime = p.k_prime.value_or(cfg.env.k);
        AdaptivityPlan plan;
        plan.level = p.level;
        plan.resample_k_prime = k_prime;
        if (p.grid == "revised_geometric") {
            plan.grid = revised_geometric_grid(p.level, k_prime, cfg.env.n, p.with_log_factor);
        } else if (p.grid == "revised_geometric_auto") {
            try {
                plan.grid = revised_geometric_grid(p.level, k_prime, cfg.env.n, p.with_log_factor);
            } catch (const Error& e) {
                if (e.code() != Err::GridInfeasible) throw;
                plan.grid = revised_geometric_grid_normalized(p.level, k_prime, cfg.env.n);
            }
        } else if (p.grid == "geometric") {
            plan.grid = geometric_grid(p.level, cfg.env.n);
        } else if (p.grid == "minimax") {
            plan.grid = minimax_grid(p.level, cfg.env.n);
        } else {
            raise(Err::BadConfig, "policy.grid: unknown grid '" + p.grid + "'");
        }
        return std::make_unique<InducedBsePolicy>(std::move(plan), cfg.env.n, opts);
    }
    if (p.kind == "randomized_bse") {
        Predictor predictor;
        if (p.predictor_noise_sigma && std::isfinite(*p.predictor_noise_sigma))
            predictor = make_noisy_predictor(*p.predictor_noise_sigma, p.m);
        return std::make_unique<RandomizedBsePolicy>(cfg.env.n, cfg.env.w, p.eps, p.theta,
                                                     std::move(predictor), p.request_size);
    }
    raise(Err::BadConfig, "policy.kind: unknown kind '" + p.kind + "'");
}

EpisodeResult run_episode(const ExperimentConfig& cfg, long long replication_index) {
    const std::uint64_t episode_seed = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(replication_index));
    Rng env_rng(substream_seed(episode_seed, 0));
    Rng policy_rng(substream_seed(episode_seed, 1));

    EnvConfig env = cfg.env;
    env.base_seed = episode_seed;
    auto policy = make_policy(cfg);
    const long long burn_in = effective_burn_in(cfg);

    EpisodeResult result;
    result.rounds.reserve(static_cast<std::size_t>(env.horizon_T));
    ArmPool pool;
    for (long long t = 0; t < env.horizon_T; ++t) {
        pool.advance_round(env, env_rng);
        const Allocation alloc = policy->allocate(pool, policy_rng);
        const RoundOutcome outcome = play(pool, alloc, env, env_rng);

        RoundLog log;
        log.round = t;
        log.loss = round_loss(outcome, env.n);
        const auto [ext, inner] = external_internal_split(pool, alloc, env.n);
        log.external = ext;
        log.internal = inner;
        log.pulls_by_age.assign(static_cast<std::size_t>(policy->age_horizon()) + 1, 0);
        for (const auto& [id, count] : alloc) {
            const int age = std::min(pool.age_of(id), policy->age_horizon());
            log.pulls_by_age[static_cast<std::size_t>(age)] += count;
        }
        result.rounds.push_back(std::move(log));

        if (t >= burn_in) {
            for (const auto& [id, rb] : outcome.rewards) result.realized_reward += rb.sum;
            result.oracle_reward += static_cast<double>(env.n) * outcome.oracle_mean;
        }
        policy->observe(outcome, pool);
    }

    result.pct_of_oracle =
        result.oracle_reward > 0.0 ? result.realized_reward / result.oracle_reward : 0.0;
    result.summary.config_digest = config_digest(cfg);
    result.summary.mean_loss = episode_mean_loss(result.rounds, burn_in);
    result.summary.loss_ci_halfwidth = 0.0; // CIs come from across-replication variance
    result.summary.rounds = env.horizon_T;
    result.summary.seed = episode_seed;
    return result;
}

RunReport run_replications(const ExperimentConfig& cfg, int parallelism) {
    if (parallelism < 1) raise(Err::BadConfig, "parallelism: must be >= 1");
    RunReport report;
    report.episodes.resize(static_cast<std::size_t>(cfg.replications));

    std::atomic<long long> next{0};
    auto worker = [&]() {
        for (;;) {
            const long long idx = next.fetch_add(1);
            if (idx >= cfg.replications) return;
            report.episodes[static_cast<std::size_t>(idx)] = run_episode(cfg, idx);
        }
    };
    if (parallelism == 1 || cfg.replications == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        const int count = static_cast<int>(
            std::min<long long>(parallelism, cfg.replications));
        threads.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) threads.emplace_back(worker);
        for (auto& th : threads) th.join();
    }

    std::vector<double> losses, pcts;
    for (const auto& ep : report.episodes) {
        losses.push_back(ep.summary.mean_loss);
        pcts.push_back(ep.pct_of_oracle);
    }
    std::tie(report.mean_loss, report.ci_halfwidth) = aggregate_mean_ci(losses);
    std::tie(report.mean_pct_of_oracle, report.pct_ci_halfwidth) = aggregate_mean_ci(pcts);
    return report;
}

std::string rounds_csv(const EpisodeResult& episode) {
    std::vector<std::string> header = {"round", "loss", "external", "internal"};
    const std::size_t ages = episode.rounds.empty() ? 1 : episode.rounds.front().pulls_by_age.size();
    for (std::size_t a = 0; a < ages; ++a) header.push_back("pulls_age_" + std::to_string(a));
    CsvWriter csv(header);
    for (const auto& log : episode.rounds) {
        std::vector<std::string> row = {std::to_string(log.round), fmt_double(log.loss),
                                        fmt_double(log.external), fmt_double(log.internal)};
        for (long long c : log.pulls_by_age) row.push_back(std::to_string(c));
        csv.row(row);
    }
    return csv.str();
}

std::string episodes_csv(const RunReport& report) {
    CsvWriter csv({"replication", "mean_loss", "ci"});
    for (std::size_t i = 0; i < report.episodes.size(); ++i) {
        const auto& s = report.episodes[i].summary;
        csv.row({std::to_string(i), fmt_double(s.mean_loss), fmt_double(s.loss_ci_halfwidth)});
    }
    return csv.str();
}

SweepSpec sweep_from_json(const json& j) {
    SweepSpec sweep;
    sweep.axis = j.at("axis").get<std::string>();
    if (sweep.axis != "n" && sweep.axis != "l" && sweep.axis != "k" && sweep.axis != "policy")
        raise(Err::BadConfig, "sweep.axis: expected one of n, l, k, policy");
    for (const auto& v : j.at("values")) sweep.values.push_back(v);
    if (sweep.values.empty()) raise(Err::BadConfig, "sweep.values: must be non-empty");
    sweep.base = config_from_json(j.at("base"));
    return sweep;
}

std::string run_sweep(const SweepSpec& sweep, int parallelism) {
    CsvWriter csv({"axis", "value", "mean_loss", "ci"});
    for (const auto& value : sweep.values) {
        ExperimentConfig cfg = sweep.base;
        std::string label;
        if (sweep.axis == "n") {
            cfg.env.n = value.get<long long>();
            label = std::to_string(cfg.env.n);
        } else if (sweep.axis == "k") {
            cfg.env.k = value.get<long long>();
            label = std::to_string(cfg.env.k);
        } else if (sweep.axis == "l") {
            cfg.policy.level = value.get<int>();
            label = std::to_string(cfg.policy.level);
        } else {
            if (value.is_string()) {
                cfg.policy = PolicySpec{};
                cfg.policy.kind = value.get<std::string>();
            } else {
                json wrapper;
                wrapper["env"] = config_to_json(sweep.base)["env"];
                wrapper["policy"] = value;
                wrapper["replications"] = sweep.base.replications;
                wrapper["base_seed"] = sweep.base.base_seed;
                cfg.policy = config_from_json(wrapper).policy;
            }
            label = cfg.policy.kind;
        }
        validate_config(cfg);
        const RunReport report = run_replications(cfg, parallelism);
        csv.row({sweep.axis, label, fmt_double(report.mean_loss), fmt_double(report.ci_halfwidth)});
    }
    return csv.str();
}

void write_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Err::BadConfig, "cannot open output file: " + path);
    out << content;
}

} // namespace slhvb
