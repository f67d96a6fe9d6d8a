#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "slhvb/analysis.hpp"
#include "slhvb/csv.hpp"
#include "slhvb/errors.hpp"
#include "slhvb/grids.hpp"
#include "slhvb/harness.hpp"
#include "slhvb/prior.hpp"

namespace {

using nlohmann::json;
using namespace slhvb;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Err::BadConfig, "cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(path));
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) raise(Err::BadConfig, "empty CSV: " + path);
    return rows;
}

int column_of(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    raise(Err::BadConfig, "CSV is missing column '" + name + "'");
}

void emit(const std::string& content, const std::string& out_path) {
    if (out_path.empty())
        std::cout << content;
    else
        write_file(out_path, content);
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag_seed, std::uint64_t config_seed) {
    if (flag_seed) return *flag_seed;
    if (const char* env = std::getenv("SLHVB_SEED")) return std::strtoull(env, nullptr, 10);
    return config_seed;
}

std::string fit_table_csv(const DidFit& fit) {
    CsvWriter csv({"coef", "estimate", "se", "t", "p", "ci_lo", "ci_hi"});
    for (std::size_t j = 0; j < 4; ++j)
        csv.row({"beta" + std::to_string(j), fmt_double(fit.beta[j]), fmt_double(fit.se[j]),
                 fmt_double(fit.t_stat[j]), fmt_double(fit.p_value[j]),
                 fmt_double(fit.ci95[j].first), fmt_double(fit.ci95[j].second)});
    return csv.str();
}

json fit_table_json(const DidFit& fit) {
    json out = json::array();
    for (std::size_t j = 0; j < 4; ++j)
        out.push_back({{"coef", "beta" + std::to_string(j)},
                       {"estimate", fit.beta[j]},
                       {"se", fit.se[j]},
                       {"t", fit.t_stat[j]},
                       {"p", fit.p_value[j]},
                       {"ci", {fit.ci95[j].first, fit.ci95[j].second}}});
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"slhvb: short-lived high-volume bandit simulation lab"};
    app.require_subcommand(1);

    std::string config_path, out_path, format = "csv", input_path;
    std::optional<std::uint64_t> seed_flag;
    int parallelism = 1;

    app.add_option("--seed", seed_flag, "override the configured base seed");
    app.add_option("--out", out_path, "output path (prefix or directory)");
    app.add_option("--parallelism", parallelism, "worker threads for replications");
    app.add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* simulate = app.add_subcommand("simulate", "run one experiment config");
    simulate->add_option("--config", config_path, "experiment config JSON")->required();

    auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep");
    sweep_cmd->add_option("--config", config_path, "sweep spec JSON")->required();

    auto* grid_cmd = app.add_subcommand("grid", "print an exploration grid");
    std::string grid_kind = "revised_geometric";
    int grid_level = 1;
    long long grid_n = 0, grid_k = 1;
    bool grid_log_factor = false;
    grid_cmd->add_option("--kind", grid_kind, "revised_geometric|geometric|minimax")
        ->check(CLI::IsMember({"revised_geometric", "revised_geometric_normalized", "geometric",
                               "minimax"}));
    grid_cmd->add_option("--level", grid_level, "adaptivity level")->required();
    grid_cmd->add_option("--n", grid_n, "slots per round")->required();
    grid_cmd->add_option("--k", grid_k, "arrivals per round (revised grids)");
    grid_cmd->add_flag("--with-log-factor", grid_log_factor, "log-factor variant");

    auto* fit_prior = app.add_subcommand("fit-prior", "method-of-moments Beta fit");
    double fp_mean = 0.0, fp_var = 0.0;
    fit_prior->add_option("--mean", fp_mean)->required();
    fit_prior->add_option("--var", fp_var)->required();

    auto* did_cmd = app.add_subcommand("did", "difference-in-differences OLS on rows (t,i,y)");
    did_cmd->add_option("input", input_path, "CSV with columns t,i,y")->required();

    auto* ztest_cmd = app.add_subcommand("ztest", "DID Z-test on 4-row cell summaries");
    ztest_cmd->add_option("input", input_path, "CSV with columns group,period,count,mean,se")
        ->required();

    auto* boot_cmd = app.add_subcommand("bootstrap", "bootstrap DID test on raw rows");
    long long boot_draws = 200, boot_resample = 0;
    boot_cmd->add_option("input", input_path, "CSV with columns group,period,y")->required();
    boot_cmd->add_option("--draws", boot_draws, "bootstrap replicates (>= 100)");
    boot_cmd->add_option("--resample", boot_resample, "resample size (default: cell size)");

    auto* scenario_cmd = app.add_subcommand("scenario", "run a named preset scenario");
    std::string scenario_name;
    long long scn_reps = -1, scn_nmax = -1;
    scenario_cmd->add_option("name", scenario_name, "scenario name or 'list'")->required();
    scenario_cmd->add_option("--reps", scn_reps, "replications per configuration");
    scenario_cmd->add_option("--n-max", scn_nmax, "upper bound of the n sweep");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            ExperimentConfig cfg = config_from_json(json::parse(slurp(config_path)));
            cfg.base_seed = resolve_seed(seed_flag, cfg.base_seed);
            cfg.env.base_seed = cfg.base_seed;
            if (!out_path.empty()) cfg.output_path = out_path;
            const RunReport report = run_replications(cfg, parallelism);
            if (format == "json") {
                json out;
                out["mean_loss"] = report.mean_loss;
                out["ci"] = report.ci_halfwidth;
                out["mean_pct_of_oracle"] = report.mean_pct_of_oracle;
                json eps = json::array();
                for (std::size_t i = 0; i < report.episodes.size(); ++i) {
                    const auto& s = report.episodes[i].summary;
                    eps.push_back({{"replication", i},
                                   {"mean_loss", s.mean_loss},
                                   {"seed", s.seed},
                                   {"pct_of_oracle", report.episodes[i].pct_of_oracle}});
                }
                out["episodes"] = eps;
                emit(out.dump(2) + "\n", cfg.output_path.empty() ? "" : cfg.output_path + ".json");
            } else {
                if (cfg.output_path.empty()) {
                    std::cout << episodes_csv(report);
                } else {
                    write_file(cfg.output_path + "_episodes.csv", episodes_csv(report));
                    write_file(cfg.output_path + "_rounds.csv", rounds_csv(report.episodes.front()));
                }
                std::cerr << "mean_loss=" << fmt_double(report.mean_loss)
                          << " ci=" << fmt_double(report.ci_halfwidth) << "\n";
            }
        } else if (sweep_cmd->parsed()) {
            SweepSpec sweep = sweep_from_json(json::parse(slurp(config_path)));
            sweep.base.base_seed = resolve_seed(seed_flag, sweep.base.base_seed);
            emit(run_sweep(sweep, parallelism), out_path);
        } else if (grid_cmd->parsed()) {
            GridSpec grid;
            if (grid_kind == "revised_geometric")
                grid = revised_geometric_grid(grid_level, grid_k, grid_n, grid_log_factor);
            else if (grid_kind == "revised_geometric_normalized")
                grid = revised_geometric_grid_normalized(grid_level, grid_k, grid_n);
            else if (grid_kind == "geometric")
                grid = geometric_grid(grid_level, grid_n);
            else
                grid = minimax_grid(grid_level, grid_n);
            if (format == "json") {
                emit(json{{"level", grid.level}, {"fractions", grid.fractions}}.dump(2) + "\n",
                     out_path);
            } else {
                CsvWriter csv({"i", "epsilon_i"});
                for (std::size_t i = 0; i < grid.fractions.size(); ++i)
                    csv.row({std::to_string(i), fmt_double(grid.fractions[i])});
                emit(csv.str(), out_path);
            }
        } else if (fit_prior->parsed()) {
            const BetaParams params = fit_beta_moments(fp_mean, fp_var);
            if (format == "json") {
                emit(json{{"alpha", params.alpha}, {"beta", params.beta}}.dump(2) + "\n", out_path);
            } else {
                CsvWriter csv({"alpha", "beta"});
                csv.row({fmt_double(params.alpha), fmt_double(params.beta)});
                emit(csv.str(), out_path);
            }
        } else if (did_cmd->parsed()) {
            const auto rows = read_csv(input_path);
            const int ct = column_of(rows[0], "t"), ci = column_of(rows[0], "i"),
                      cy = column_of(rows[0], "y");
            std::vector<ObsRow> table;
            for (std::size_t r = 1; r < rows.size(); ++r)
                table.push_back({std::stoi(rows[r][static_cast<std::size_t>(ct)]),
                                 std::stoi(rows[r][static_cast<std::size_t>(ci)]),
                                 std::stod(rows[r][static_cast<std::size_t>(cy)])});
            const DidFit fit = did_ols(table);
            if (format == "json")
                emit(fit_table_json(fit).dump(2) + "\n", out_path);
            else
                emit(fit_table_csv(fit), out_path);
        } else if (ztest_cmd->parsed()) {
            const auto rows = read_csv(input_path);
            const int cg = column_of(rows[0], "group"), cp = column_of(rows[0], "period"),
                      cn = column_of(rows[0], "count"), cm = column_of(rows[0], "mean"),
                      cs = column_of(rows[0], "se");
            if (rows.size() != 5) raise(Err::BadConfig, "ztest: expected exactly 4 data rows");
            std::array<CellStats, 4> cells{};
            for (std::size_t r = 1; r < rows.size(); ++r) {
                CellStats cell;
                cell.treatment = rows[r][static_cast<std::size_t>(cg)] == "treatment";
                cell.post = rows[r][static_cast<std::size_t>(cp)] == "post";
                cell.count = std::stoll(rows[r][static_cast<std::size_t>(cn)]);
                cell.mean = std::stod(rows[r][static_cast<std::size_t>(cm)]);
                cell.se_mean = std::stod(rows[r][static_cast<std::size_t>(cs)]);
                cells[r - 1] = cell;
            }
            const auto [z, p] = did_z_test(cells);
            if (format == "json") {
                emit(json{{"z", z}, {"p_one_sided", p}}.dump(2) + "\n", out_path);
            } else {
                CsvWriter csv({"z", "p_one_sided"});
                csv.row({fmt_double(z), fmt_double(p)});
                emit(csv.str(), out_path);
            }
        } else if (boot_cmd->parsed()) {
            const auto rows = read_csv(input_path);
            const int cg = column_of(rows[0], "group"), cp = column_of(rows[0], "period"),
                      cy = column_of(rows[0], "y");
            std::array<std::vector<double>, 4> samples;
            for (std::size_t r = 1; r < rows.size(); ++r) {
                const bool trt = rows[r][static_cast<std::size_t>(cg)] == "treatment";
                const bool post = rows[r][static_cast<std::size_t>(cp)] == "post";
                samples[static_cast<std::size_t>(cell_index(post, trt))].push_back(
                    std::stod(rows[r][static_cast<std::size_t>(cy)]));
            }
            long long resample = boot_resample;
            if (resample <= 0)
                for (const auto& s : samples)
                    resample = std::max<long long>(resample, static_cast<long long>(s.size()));
            Rng rng(resolve_seed(seed_flag, 0));
            const auto [z, p] = bootstrap_did(samples, boot_draws, resample, rng);
            if (format == "json") {
                emit(json{{"z", z}, {"p_one_sided", p}}.dump(2) + "\n", out_path);
            } else {
                CsvWriter csv({"z", "p_one_sided"});
                csv.row({fmt_double(z), fmt_double(p)});
                emit(csv.str(), out_path);
            }
        } else if (scenario_cmd->parsed()) {
            if (scenario_name == "list") {
                for (const auto& n : scenario_names()) std::cout << n << "\n";
                return 0;
            }
            ScenarioOptions opt;
            opt.replications = scn_reps;
            opt.n_max = scn_nmax;
            opt.seed = resolve_seed(seed_flag, opt.seed);
            opt.parallelism = parallelism;
            const auto files = run_scenario(scenario_name, out_path.empty() ? "." : out_path, opt);
            for (const auto& f : files) std::cout << f << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
