#pragma once

#include <map>
#include <string>
#include <vector>

#include "smac/binning.hpp"
#include "smac/trainer.hpp"

namespace smac {

// A batch of independent training runs (typically envs x algorithms x seeds)
// executed with run-level parallelism.
struct ExperimentSpec {
    std::vector<AgentConfig> configs;
    std::string out_dir = "runs";
    int jobs = 1;

    void validate() const;  // distinct (env, opt, seed) triples, valid configs
};

struct SummaryRow {
    std::string env;
    std::string algorithm;
    double mean_final_return = 0.0;
    double std_final_return = 0.0;  // population std across seeds
    int n_seeds = 0;
};

struct ExperimentResult {
    std::vector<RunRecord> records;  // in spec order
    std::vector<SummaryRow> summary;
    bool any_failed = false;
};

// Default hyperparameters per (env, algorithm): actor step size, critic
// learning rate, horizon, discounting, damping, and timestep budget.
AgentConfig default_config(const std::string& env_id, const std::string& optimizer_id,
                           std::uint64_t seed);

// Executes every run (jobs-way parallel), writes per-run CSV/JSON under
// out_dir, and writes summary.csv plus an aligned summary.txt.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Recompute the summary from records held in memory.
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);

// Per-run artifacts.
std::string run_name(const AgentConfig& config);
void write_run_csv(const std::string& path, const RunRecord& record);
void write_run_json(const std::string& path, const RunRecord& record);
RunRecord read_run_json(const std::string& path);

// Re-derive one seed's final (smoothed last-bin) return from its run CSV.
double final_return_from_csv(const std::string& path);

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);
void write_summary_text(const std::string& path, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary_csv(const std::string& path);

// Per-env SVG plots: one mean curve per algorithm with a +-1 std band over
// the binned+smoothed data, plus a CSV with the plotted series (100 rows per
// series). Returns the paths written.
std::vector<std::string> emit_plots(const std::vector<RunRecord>& records, const std::string& out_dir);

struct AblationModeResult {
    int update_batch = 0;  // B
    std::vector<RunRecord> records;
    double mean_final_return = 0.0;
    double total_actor_ms = 0.0;  // summed over runs
};

struct AblationReport {
    std::string env_id;
    std::vector<AblationModeResult> modes;
    double wall_time_ratio = 0.0;  // batch-mean actor time / per-sample actor time, when both present
};

// SMAC update-batch-size ablation: runs the listed B values (1 = per-sample,
// T = batch-mean) and reports final returns and actor-update wall time.
AblationReport ablation_batch_size(const std::string& env_id, const std::vector<int>& sizes,
                                   const std::vector<std::uint64_t>& seeds, long total_timesteps,
                                   const std::string& out_dir, int jobs);

void write_ablation_report(const std::string& path, const AblationReport& report);

}  // namespace smac
