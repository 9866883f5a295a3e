// Command line front end: configure and execute experiment grids, the
// batch-size ablation, plot re-emission from stored CSVs, and the fast
// verification suite.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "smac/harness.hpp"
#include "smac/selfcheck.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace smac;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailed = 1;
constexpr int kExitBadConfig = 2;

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

struct RunOptions {
    std::string config_path;
    std::string envs_arg, opts_arg, seeds_arg;
    double eta = -1.0, lambda = -1.0;
    long timesteps = -1;
    std::string out_dir;
    int jobs = 0;
    bool per_sample = false;
    int checkpoint_interval = 0;
};

void apply_overrides(AgentConfig& c, const json& overrides) {
    if (overrides.contains("eta")) c.eta = overrides["eta"].get<double>();
    if (overrides.contains("alpha")) c.alpha = overrides["alpha"].get<double>();
    if (overrides.contains("T")) c.T = overrides["T"].get<int>();
    if (overrides.contains("gamma")) c.gamma = overrides["gamma"].get<double>();
    if (overrides.contains("lambda_gae")) c.lambda_gae = overrides["lambda_gae"].get<double>();
    if (overrides.contains("lambda")) c.lambda = overrides["lambda"].get<double>();
    if (overrides.contains("total_timesteps")) c.total_timesteps = overrides["total_timesteps"].get<long>();
    if (overrides.contains("batch_mode"))
        c.batch_mode = batch_mode_from_string(overrides["batch_mode"].get<std::string>());
    if (overrides.contains("critic_epochs")) c.critic_epochs = overrides["critic_epochs"].get<int>();
    if (overrides.contains("cg_damping")) c.cg_damping = overrides["cg_damping"].get<double>();
    if (overrides.contains("cg_max_iters")) c.cg_max_iters = overrides["cg_max_iters"].get<int>();
    if (overrides.contains("actor_hidden")) c.actor_hidden = overrides["actor_hidden"].get<std::vector<int>>();
    if (overrides.contains("critic_hidden"))
        c.critic_hidden = overrides["critic_hidden"].get<std::vector<int>>();
    if (overrides.contains("checkpoint_interval"))
        c.checkpoint_interval = overrides["checkpoint_interval"].get<int>();
}

ExperimentSpec build_spec(const RunOptions& opt) {
    std::vector<std::string> envs{"cartpole", "acrobot", "pendulum"};
    std::vector<std::string> algorithms{"smac", "sgd", "adam", "cg"};
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    json overrides = json::object();

    ExperimentSpec spec;
    spec.out_dir = "runs";
    spec.jobs = 2;

    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) throw std::invalid_argument("cannot open config file " + opt.config_path);
        json j;
        in >> j;
        if (j.contains("envs")) envs = j["envs"].get<std::vector<std::string>>();
        if (j.contains("algorithms")) algorithms = j["algorithms"].get<std::vector<std::string>>();
        if (j.contains("seeds")) seeds = j["seeds"].get<std::vector<std::uint64_t>>();
        if (j.contains("out_dir")) spec.out_dir = j["out_dir"].get<std::string>();
        if (j.contains("jobs")) spec.jobs = j["jobs"].get<int>();
        if (j.contains("overrides")) overrides = j["overrides"];
    }

    // Command line flags win over the config file.
    if (!opt.envs_arg.empty()) envs = split_csv(opt.envs_arg);
    if (!opt.opts_arg.empty()) algorithms = split_csv(opt.opts_arg);
    if (!opt.seeds_arg.empty()) {
        seeds.clear();
        for (const std::string& s : split_csv(opt.seeds_arg)) seeds.push_back(std::stoull(s));
    }
    if (!opt.out_dir.empty()) spec.out_dir = opt.out_dir;
    if (opt.jobs > 0) spec.jobs = opt.jobs;

    for (const std::string& env : envs) {
        for (const std::string& alg : algorithms) {
            for (std::uint64_t seed : seeds) {
                AgentConfig c = default_config(env, alg, seed);
                apply_overrides(c, overrides);
                if (opt.eta > 0.0) c.eta = opt.eta;
                if (opt.lambda > 0.0) c.lambda = opt.lambda;
                if (opt.timesteps > 0) c.total_timesteps = opt.timesteps;
                if (opt.per_sample) c.batch_mode = BatchMode::per_sample;
                if (opt.checkpoint_interval > 0) {
                    c.checkpoint_interval = opt.checkpoint_interval;
                    c.checkpoint_dir = spec.out_dir + "/checkpoints/" + run_name(c);
                }
                spec.configs.push_back(std::move(c));
            }
        }
    }
    return spec;
}

int cmd_run(const RunOptions& opt) {
    ExperimentSpec spec;
    try {
        spec = build_spec(opt);
        spec.validate();
    } catch (const std::exception& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitBadConfig;
    }

    std::printf("running %zu configuration(s) with %d job(s) into %s\n", spec.configs.size(), spec.jobs,
                spec.out_dir.c_str());
    const ExperimentResult result = run_experiment(spec);
    emit_plots(result.records, spec.out_dir);

    for (const RunRecord& r : result.records) {
        if (r.failed)
            std::printf("  %-28s FAILED: %s\n", run_name(r.config).c_str(), r.error.c_str());
        else
            std::printf("  %-28s final return %10.2f  (%.1f s)\n", run_name(r.config).c_str(),
                        r.final_return, r.total_wall_ms / 1000.0);
    }
    std::printf("\nsummary (%s/summary.txt):\n", spec.out_dir.c_str());
    std::ifstream summary(spec.out_dir + "/summary.txt");
    std::cout << summary.rdbuf();
    return result.any_failed ? kExitRunFailed : kExitOk;
}

int cmd_ablate(const std::string& env, const std::string& sizes_arg, const std::string& seeds_arg,
               long timesteps, const std::string& out_dir, int jobs) {
    std::vector<int> sizes;
    std::vector<std::uint64_t> seeds;
    try {
        for (const std::string& s : split_csv(sizes_arg)) sizes.push_back(std::stoi(s));
        for (const std::string& s : split_csv(seeds_arg)) seeds.push_back(std::stoull(s));
        const AblationReport report = ablation_batch_size(env, sizes, seeds, timesteps, out_dir, jobs);
        write_ablation_report(out_dir + "/ablation.json", report);

        std::printf("update batch size ablation on %s (%ld timesteps per run)\n", env.c_str(), timesteps);
        std::printf("%-12s %18s %20s\n", "batch size", "mean final return", "actor update time (s)");
        for (const AblationModeResult& m : report.modes)
            std::printf("%-12d %18.2f %20.2f\n", m.update_batch, m.mean_final_return,
                        m.total_actor_ms / 1000.0);
        if (report.wall_time_ratio > 0.0)
            std::printf("batch-mean / per-sample actor time ratio: %.3f\n", report.wall_time_ratio);
        std::printf("report written to %s/ablation.json\n", out_dir.c_str());
        return kExitOk;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "ablation failed: " << e.what() << "\n";
        return kExitRunFailed;
    }
}

// Rebuild plottable records from persisted run CSVs (filenames carry
// env/optimizer/seed).
int cmd_plot(const std::string& dir, const std::string& out_dir) {
    std::vector<RunRecord> records;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() < 8 || name.substr(name.size() - 8) != "_run.csv") continue;
        std::string stem = name.substr(0, name.size() - 8);
        const auto tokens = split_csv([&stem] {
            std::string t = stem;
            for (char& ch : t)
                if (ch == '_') ch = ',';
            return t;
        }());
        if (tokens.size() < 3) continue;

        RunRecord r;
        r.config.env_id = tokens[0];
        r.config.optimizer_id = tokens[1];
        r.config.seed = std::stoull(tokens[2].substr(1));  // sNNN
        if (tokens.size() > 3 && tokens[3].size() > 1 && tokens[3][0] == 'B')
            r.config.update_batch_size = std::stoi(tokens[3].substr(1));

        std::ifstream in(entry.path());
        std::string line;
        std::getline(in, line);
        std::vector<std::pair<double, double>> returns, logprobs;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string cell;
            std::vector<std::string> cells;
            while (std::getline(ss, cell, ',')) cells.push_back(cell);
            if (cells.size() < 4) continue;
            returns.emplace_back(std::stod(cells[1]), std::stod(cells[2]));
            logprobs.emplace_back(std::stod(cells[1]), std::stod(cells[3]));
        }
        if (returns.empty()) continue;
        for (const auto& [c, v] : bin_curve(returns, 100)) {
            r.bin_centers.push_back(c);
            r.binned_return.push_back(v);
        }
        for (const auto& [c, v] : bin_curve(logprobs, 100)) r.binned_logprob.push_back(v);
        r.smoothed_return = ewm_smooth(r.binned_return, 0.1);
        r.smoothed_logprob = ewm_smooth(r.binned_logprob, 0.1);
        r.final_return = r.smoothed_return.back();
        records.push_back(std::move(r));
    }
    if (records.empty()) {
        std::cerr << "no *_run.csv files found in " << dir << "\n";
        return kExitBadConfig;
    }
    const auto written = emit_plots(records, out_dir.empty() ? dir : out_dir);
    for (const std::string& p : written) std::printf("wrote %s\n", p.c_str());
    return kExitOk;
}

int cmd_verify() {
    int failures = 0;
    for (const CheckResult& r : run_verification()) {
        std::printf("[%s] %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        if (!r.passed) ++failures;
    }
    return failures == 0 ? kExitOk : kExitRunFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"matrix-free natural-gradient actor-critic toolkit"};
    app.require_subcommand(1);

    RunOptions run_opt;
    CLI::App* run = app.add_subcommand("run", "execute a grid of training runs");
    run->add_option("--config", run_opt.config_path, "experiment JSON file");
    run->add_option("--env", run_opt.envs_arg, "comma-separated env ids (cartpole,acrobot,pendulum)");
    run->add_option("--opt", run_opt.opts_arg, "comma-separated optimizers (smac,sgd,adam,cg)");
    run->add_option("--seed", run_opt.seeds_arg, "comma-separated seeds");
    run->add_option("--eta", run_opt.eta, "actor step size override");
    run->add_option("--lambda", run_opt.lambda, "SM damping override");
    run->add_option("--timesteps", run_opt.timesteps, "total environment steps per run");
    run->add_option("--out", run_opt.out_dir, "output directory");
    run->add_option("--jobs", run_opt.jobs, "parallel runs");
    run->add_flag("--per-sample", run_opt.per_sample, "per-sample SMAC updates instead of batch-mean");
    run->add_option("--checkpoint-interval", run_opt.checkpoint_interval,
                    "iterations between checkpoints (0 = off)");

    std::string ab_env = "cartpole", ab_sizes = "1,1000", ab_seeds = "0,1,2", ab_out = "ablation";
    long ab_timesteps = 300000;
    int ab_jobs = 2;
    CLI::App* ablate = app.add_subcommand("ablate-batch", "per-sample vs batch-mean update ablation");
    ablate->add_option("--env", ab_env, "environment id");
    ablate->add_option("--sizes", ab_sizes, "comma-separated update batch sizes");
    ablate->add_option("--seed", ab_seeds, "comma-separated seeds");
    ablate->add_option("--timesteps", ab_timesteps, "total environment steps per run");
    ablate->add_option("--out", ab_out, "output directory");
    ablate->add_option("--jobs", ab_jobs, "parallel runs");

    std::string plot_dir = "runs", plot_out;
    CLI::App* plot = app.add_subcommand("plot", "re-emit SVG plots from stored run CSVs");
    plot->add_option("--dir", plot_dir, "directory containing *_run.csv files");
    plot->add_option("--out", plot_out, "output directory (defaults to --dir)");

    app.add_subcommand("verify", "run the fast oracle/property suites");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_opt);
        if (ablate->parsed()) return cmd_ablate(ab_env, ab_sizes, ab_seeds, ab_timesteps, ab_out, ab_jobs);
        if (plot->parsed()) return cmd_plot(plot_dir, plot_out);
        return cmd_verify();
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRunFailed;
    }
}
