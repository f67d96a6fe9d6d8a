#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "slhvb/environment.hpp"
#include "slhvb/metrics.hpp"
#include "slhvb/policies.hpp"

namespace slhvb {

struct PolicySpec {
    std::string kind = "hybrid"; // hybrid | induced_bse | randomized_bse | oracle | uniform_random
    // hybrid
    std::optional<double> rho; // inferred as ln(k)/ln(n) when absent
    // induced_bse
    int level = 1;
    std::string grid = "revised_geometric"; // | revised_geometric_auto | geometric | minimax
    std::optional<long long> k_prime;       // defaults to k
    bool with_log_factor = false;
    std::string final_pick = "empirical_best"; // | first
    bool cumulative_means = false;
    // randomized_bse
    double eps = 0.1;
    double theta = 100.0;
    int m = 500;
    std::optional<double> predictor_noise_sigma; // absent = cold start (flat prior)
    long long request_size = 16;
};

struct ExperimentConfig {
    EnvConfig env;
    PolicySpec policy;
    long long replications = 1;
    std::uint64_t base_seed = 0;
    long long burn_in = -1; // -1: defaults to env.w
    std::string output_path;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
// Throws Err::BadConfig with a message naming the offending field.
void validate_config(const ExperimentConfig& config);
long long effective_burn_in(const ExperimentConfig& config);
std::string config_digest(const ExperimentConfig& config);

std::unique_ptr<Policy> make_policy(const ExperimentConfig& config);

struct EpisodeResult {
    EpisodeSummary summary;
    std::vector<RoundLog> rounds;
    double realized_reward = 0.0; // post burn-in totals
    double oracle_reward = 0.0;
    double pct_of_oracle = 0.0;
};

// Deterministic given (config, replication_index): the episode seed is
// base_seed XOR a fixed mixing of the index.
EpisodeResult run_episode(const ExperimentConfig& config, long long replication_index);

struct RunReport {
    std::vector<EpisodeResult> episodes; // ordered by replication index
    double mean_loss = 0.0;
    double ci_halfwidth = 0.0;
    double mean_pct_of_oracle = 0.0;
    double pct_ci_halfwidth = 0.0;
};

// Fans replications over `parallelism` workers; results are merged in
// replication order, so output is byte-identical at any parallelism level.
RunReport run_replications(const ExperimentConfig& config, int parallelism = 1);

std::string rounds_csv(const EpisodeResult& episode);
std::string episodes_csv(const RunReport& report);

struct ScenarioOptions {
    long long replications = -1; // -1: scenario default
    long long n_max = -1;        // -1: scenario default upper bound
    std::uint64_t seed = 20240501;
    int parallelism = 1;
};

// name in {offline-sim-synthetic, cold-vs-warm, slope-check, worst-case-demo,
// did-demo}. Writes CSV files under out_dir and returns their paths.
std::vector<std::string> run_scenario(const std::string& name, const std::string& out_dir,
                                      const ScenarioOptions& options = {});
std::vector<std::string> scenario_names();

struct SweepSpec {
    std::string axis; // n | l | k | policy
    std::vector<nlohmann::json> values;
    ExperimentConfig base;
};

SweepSpec sweep_from_json(const nlohmann::json& j);
// One row per value: (axis, value, mean_loss, ci).
std::string run_sweep(const SweepSpec& sweep, int parallelism = 1);

void write_file(const std::string& path, const std::string& content);

} // namespace slhvb
