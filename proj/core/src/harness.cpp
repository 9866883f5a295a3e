#include "smac/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace smac {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void execute_runs(const std::vector<AgentConfig>& configs, int jobs, std::vector<RunRecord>& out) {
    out.resize(configs.size());
    const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= configs.size()) break;
            out[i] = train(configs[i]);  // train() reports failures in the record
        }
    };
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
}

std::string mode_suffix(const AgentConfig& c) {
    const int b = c.effective_update_batch();
    return b == c.T ? "" : "_B" + std::to_string(b);
}

struct GroupKey {
    std::string env, alg;
    bool operator<(const GroupKey& o) const { return std::tie(env, alg) < std::tie(o.env, o.alg); }
};

json record_to_json(const RunRecord& r) {
    json j;
    j["config"] = {{"env", r.config.env_id},
                   {"optimizer", r.config.optimizer_id},
                   {"eta", r.config.eta},
                   {"alpha", r.config.alpha},
                   {"T", r.config.T},
                   {"gamma", r.config.gamma},
                   {"lambda_gae", r.config.lambda_gae},
                   {"lambda", r.config.lambda},
                   {"total_timesteps", r.config.total_timesteps},
                   {"seed", r.config.seed},
                   {"batch_mode", to_string(r.config.batch_mode)},
                   {"update_batch", r.config.effective_update_batch()},
                   {"critic_epochs", r.config.critic_epochs},
                   {"cg_damping", r.config.cg_damping},
                   {"cg_max_iters", r.config.cg_max_iters},
                   {"actor_hidden", r.config.actor_hidden},
                   {"critic_hidden", r.config.critic_hidden}};
    j["failed"] = r.failed;
    j["error"] = r.error;
    j["final_return"] = r.final_return;
    j["total_actor_updates"] = r.total_actor_updates;
    j["total_actor_ms"] = r.total_actor_ms;
    j["total_wall_ms"] = r.total_wall_ms;
    json iters = json::array();
    for (const IterationLog& l : r.iterations) {
        iters.push_back({{"iteration", l.iteration},
                         {"timestep", l.timestep},
                         {"mean_return", l.mean_episode_return},
                         {"mean_logprob", l.mean_action_log_prob},
                         {"critic_loss", l.critic_loss},
                         {"dir_norm", l.direction_norm},
                         {"dot_with_grad", l.dot_with_grad},
                         {"denom", l.sm_denominator},
                         {"cg_iterations", l.cg_iterations},
                         {"cg_residual", l.cg_residual},
                         {"g_hat", l.score_g_hat},
                         {"score_trace", l.score_trace},
                         {"actor_ms", l.actor_ms},
                         {"wall_ms", l.wall_ms}});
    }
    j["iterations"] = std::move(iters);
    json eps = json::array();
    for (const auto& [t, ret] : r.episode_returns) eps.push_back({t, ret});
    j["episode_returns"] = std::move(eps);
    j["bin_centers"] = r.bin_centers;
    j["binned_return"] = r.binned_return;
    j["smoothed_return"] = r.smoothed_return;
    j["binned_logprob"] = r.binned_logprob;
    j["smoothed_logprob"] = r.smoothed_logprob;
    return j;
}

}  // namespace

void ExperimentSpec::validate() const {
    if (configs.empty()) throw std::invalid_argument("experiment: no runs configured");
    if (jobs < 1) throw std::invalid_argument("experiment: jobs must be >= 1");
    std::set<std::tuple<std::string, std::string, std::uint64_t, int>> seen;
    for (const AgentConfig& c : configs) {
        c.validate();
        const auto key = std::make_tuple(c.env_id, c.optimizer_id, c.seed, c.effective_update_batch());
        if (!seen.insert(key).second)
            throw std::invalid_argument("experiment: duplicate run (env=" + c.env_id + ", opt=" +
                                        c.optimizer_id + ", seed=" + std::to_string(c.seed) + ")");
    }
}

AgentConfig default_config(const std::string& env_id, const std::string& optimizer_id,
                           std::uint64_t seed) {
    AgentConfig c;
    c.env_id = env_id;
    c.optimizer_id = optimizer_id;
    c.seed = seed;
    c.alpha = 1e-3;
    c.T = 1000;
    c.gamma = 0.99;
    c.lambda_gae = 0.9;
    c.lambda = 0.1;
    c.total_timesteps = env_id == "pendulum" ? 2000000 : 300000;
    // Per-task actor step sizes.
    if (env_id == "acrobot") {
        if (optimizer_id == "smac") c.eta = 5e-2;
        else if (optimizer_id == "adam") c.eta = 6e-4;
        else if (optimizer_id == "sgd") c.eta = 2e-1;
        else c.eta = 6e-1;
    } else if (env_id == "cartpole") {
        if (optimizer_id == "smac") c.eta = 5e-3;
        else if (optimizer_id == "adam") c.eta = 7e-5;
        else if (optimizer_id == "sgd") c.eta = 7e-3;
        else c.eta = 8e-2;
    } else if (env_id == "pendulum") {
        if (optimizer_id == "smac") c.eta = 6e-3;
        else if (optimizer_id == "adam") c.eta = 7e-4;
        else if (optimizer_id == "sgd") c.eta = 5e-2;
        else c.eta = 3e-2;
    } else {
        throw std::invalid_argument("default_config: unknown env '" + env_id + "'");
    }
    return c;
}

std::string run_name(const AgentConfig& config) {
    return config.env_id + "_" + config.optimizer_id + "_s" + std::to_string(config.seed) +
           mode_suffix(config);
}

void write_run_csv(const std::string& path, const RunRecord& record) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_run_csv: cannot open " + path);
    out << "iteration,timestep,mean_return,mean_logprob,critic_loss,dir_norm,denom,wall_ms\n";
    for (const IterationLog& l : record.iterations) {
        out << l.iteration << ',' << l.timestep << ',' << fmt_double(l.mean_episode_return) << ','
            << fmt_double(l.mean_action_log_prob) << ',' << fmt_double(l.critic_loss) << ','
            << fmt_double(l.direction_norm) << ',' << fmt_double(l.sm_denominator) << ','
            << fmt_double(l.wall_ms) << '\n';
    }
}

void write_run_json(const std::string& path, const RunRecord& record) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_run_json: cannot open " + path);
    out << record_to_json(record).dump(2) << '\n';
}

RunRecord read_run_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_run_json: cannot open " + path);
    json j;
    in >> j;
    RunRecord r;
    r.config.env_id = j.at("config").at("env").get<std::string>();
    r.config.optimizer_id = j.at("config").at("optimizer").get<std::string>();
    r.config.seed = j.at("config").at("seed").get<std::uint64_t>();
    r.config.T = j.at("config").at("T").get<int>();
    r.config.total_timesteps = j.at("config").at("total_timesteps").get<long>();
    r.failed = j.at("failed").get<bool>();
    r.error = j.at("error").get<std::string>();
    r.final_return = j.at("final_return").get<double>();
    r.total_actor_updates = j.at("total_actor_updates").get<long>();
    r.total_actor_ms = j.at("total_actor_ms").get<double>();
    r.total_wall_ms = j.at("total_wall_ms").get<double>();
    r.bin_centers = j.at("bin_centers").get<std::vector<double>>();
    r.binned_return = j.at("binned_return").get<std::vector<double>>();
    r.smoothed_return = j.at("smoothed_return").get<std::vector<double>>();
    r.binned_logprob = j.at("binned_logprob").get<std::vector<double>>();
    r.smoothed_logprob = j.at("smoothed_logprob").get<std::vector<double>>();
    for (const auto& row : j.at("iterations")) {
        IterationLog l;
        l.iteration = row.at("iteration").get<long>();
        l.timestep = row.at("timestep").get<long>();
        l.mean_episode_return = row.at("mean_return").get<double>();
        l.mean_action_log_prob = row.at("mean_logprob").get<double>();
        l.critic_loss = row.at("critic_loss").get<double>();
        l.direction_norm = row.at("dir_norm").get<double>();
        l.dot_with_grad = row.at("dot_with_grad").get<double>();
        l.sm_denominator = row.at("denom").is_null() ? 0.0 : row.at("denom").get<double>();
        l.cg_iterations = row.at("cg_iterations").get<int>();
        l.cg_residual = row.at("cg_residual").get<double>();
        l.score_g_hat = row.at("g_hat").get<double>();
        l.score_trace = row.at("score_trace").get<double>();
        l.actor_ms = row.at("actor_ms").get<double>();
        l.wall_ms = row.at("wall_ms").get<double>();
        r.iterations.push_back(l);
    }
    for (const auto& ep : j.at("episode_returns"))
        r.episode_returns.emplace_back(ep.at(0).get<double>(), ep.at(1).get<double>());
    return r;
}

double final_return_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("final_return_from_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("final_return_from_csv: empty file " + path);
    std::vector<std::pair<double, double>> points;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 3) continue;
        points.emplace_back(std::stod(cells[1]), std::stod(cells[2]));
    }
    const auto binned = bin_curve(points, 100);
    std::vector<double> values;
    values.reserve(binned.size());
    for (const auto& [c, v] : binned) values.push_back(v);
    return ewm_smooth(values, 0.1).back();
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
    std::map<GroupKey, std::vector<double>> groups;
    std::vector<GroupKey> order;
    for (const RunRecord& r : records) {
        if (r.failed) continue;
        const GroupKey key{r.config.env_id, r.config.optimizer_id + mode_suffix(r.config)};
        if (groups.find(key) == groups.end()) order.push_back(key);
        groups[key].push_back(r.final_return);
    }
    std::vector<SummaryRow> rows;
    for (const GroupKey& key : order) {
        const std::vector<double>& finals = groups[key];
        SummaryRow row;
        row.env = key.env;
        row.algorithm = key.alg;
        row.n_seeds = static_cast<int>(finals.size());
        double mean = 0.0;
        for (double v : finals) mean += v;
        mean /= static_cast<double>(finals.size());
        double var = 0.0;
        for (double v : finals) var += (v - mean) * (v - mean);
        var /= static_cast<double>(finals.size());
        row.mean_final_return = mean;
        row.std_final_return = std::sqrt(var);
        rows.push_back(row);
    }
    return rows;
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_summary_csv: cannot open " + path);
    out << "env,algorithm,mean_final_return,std_final_return,n_seeds\n";
    for (const SummaryRow& r : rows) {
        out << r.env << ',' << r.algorithm << ',' << fmt_double(r.mean_final_return) << ','
            << fmt_double(r.std_final_return) << ',' << r.n_seeds << '\n';
    }
}

std::vector<SummaryRow> read_summary_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_summary_csv: cannot open " + path);
    std::string line;
    std::getline(in, line);
    std::vector<SummaryRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        SummaryRow r;
        std::string cell;
        std::getline(ss, r.env, ',');
        std::getline(ss, r.algorithm, ',');
        std::getline(ss, cell, ',');
        r.mean_final_return = std::stod(cell);
        std::getline(ss, cell, ',');
        r.std_final_return = std::stod(cell);
        std::getline(ss, cell, ',');
        r.n_seeds = std::stoi(cell);
        rows.push_back(r);
    }
    return rows;
}

void write_summary_text(const std::string& path, const std::vector<SummaryRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_summary_text: cannot open " + path);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-10s %-12s %16s %16s %8s\n", "env", "algorithm", "mean_final",
                  "std_final", "seeds");
    out << buf;
    out << std::string(66, '-') << '\n';
    for (const SummaryRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%-10s %-12s %16.2f %16.2f %8d\n", r.env.c_str(),
                      r.algorithm.c_str(), r.mean_final_return, r.std_final_return, r.n_seeds);
        out << buf;
    }
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    fs::create_directories(spec.out_dir);

    ExperimentResult result;
    execute_runs(spec.configs, spec.jobs, result.records);

    for (const RunRecord& r : result.records) {
        const std::string base = spec.out_dir + "/" + run_name(r.config);
        if (!r.failed) write_run_csv(base + "_run.csv", r);
        write_run_json(base + "_run.json", r);
        if (r.failed) result.any_failed = true;
    }
    result.summary = summarize(result.records);
    write_summary_csv(spec.out_dir + "/summary.csv", result.summary);
    write_summary_text(spec.out_dir + "/summary.txt", result.summary);
    return result;
}

std::vector<std::string> emit_plots(const std::vector<RunRecord>& records, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::map<std::string, std::map<std::string, std::vector<const RunRecord*>>> by_env;
    for (const RunRecord& r : records) {
        if (r.failed || r.smoothed_return.empty()) continue;
        by_env[r.config.env_id][r.config.optimizer_id + mode_suffix(r.config)].push_back(&r);
    }

    const std::map<std::string, std::string> palette = {{"smac", "#d62728"},
                                                        {"sgd", "#1f77b4"},
                                                        {"adam", "#2ca02c"},
                                                        {"cg", "#9467bd"}};
    std::vector<std::string> written;
    for (const auto& [env, algs] : by_env) {
        struct Series {
            std::string name;
            std::vector<double> centers, mean, stddev;
        };
        std::vector<Series> series;
        for (const auto& [alg, runs] : algs) {
            const std::size_t n_bins = runs.front()->smoothed_return.size();
            Series s;
            s.name = alg;
            s.centers = runs.front()->bin_centers;
            s.mean.assign(n_bins, 0.0);
            s.stddev.assign(n_bins, 0.0);
            for (const RunRecord* r : runs)
                for (std::size_t i = 0; i < n_bins; ++i) s.mean[i] += r->smoothed_return[i];
            for (double& v : s.mean) v /= static_cast<double>(runs.size());
            for (const RunRecord* r : runs)
                for (std::size_t i = 0; i < n_bins; ++i) {
                    const double d = r->smoothed_return[i] - s.mean[i];
                    s.stddev[i] += d * d;
                }
            for (double& v : s.stddev) v = std::sqrt(v / static_cast<double>(runs.size()));
            series.push_back(std::move(s));
        }

        // Companion CSV with the plotted series.
        const std::string csv_path = out_dir + "/" + env + "_curves.csv";
        {
            std::ofstream csv(csv_path);
            csv << "algorithm,bin_center,mean_return,std_return\n";
            for (const Series& s : series)
                for (std::size_t i = 0; i < s.mean.size(); ++i)
                    csv << s.name << ',' << fmt_double(s.centers[i]) << ',' << fmt_double(s.mean[i]) << ','
                        << fmt_double(s.stddev[i]) << '\n';
        }
        written.push_back(csv_path);

        double y_min = 1e300, y_max = -1e300, x_max = 0.0;
        for (const Series& s : series)
            for (std::size_t i = 0; i < s.mean.size(); ++i) {
                y_min = std::min(y_min, s.mean[i] - s.stddev[i]);
                y_max = std::max(y_max, s.mean[i] + s.stddev[i]);
                x_max = std::max(x_max, s.centers[i]);
            }
        if (y_max <= y_min) y_max = y_min + 1.0;
        const double pad = 0.05 * (y_max - y_min);
        y_min -= pad;
        y_max += pad;

        const double w = 860, h = 520, ml = 90, mr = 30, mt = 40, mb = 60;
        auto sx = [&](double t) { return ml + (w - ml - mr) * (x_max > 0 ? t / x_max : 0.0); };
        auto sy = [&](double v) { return h - mb - (h - mb - mt) * (v - y_min) / (y_max - y_min); };

        std::ostringstream svg;
        svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
        svg << "<rect width='100%' height='100%' fill='white'/>\n";
        svg << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='18'>" << env
            << " average return</text>\n";
        svg << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
            << "' stroke='black'/>\n";
        svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
            << "' stroke='black'/>\n";
        for (int tick = 0; tick <= 4; ++tick) {
            const double xv = x_max * tick / 4.0;
            const double yv = y_min + (y_max - y_min) * tick / 4.0;
            svg << "<text x='" << sx(xv) << "' y='" << h - mb + 20
                << "' text-anchor='middle' font-size='12'>" << static_cast<long>(xv) << "</text>\n";
            char ybuf[32];
            std::snprintf(ybuf, sizeof(ybuf), "%.1f", yv);
            svg << "<text x='" << ml - 8 << "' y='" << sy(yv) + 4
                << "' text-anchor='end' font-size='12'>" << ybuf << "</text>\n";
        }
        svg << "<text x='" << (ml + w - mr) / 2 << "' y='" << h - 16
            << "' text-anchor='middle' font-size='14'>timesteps</text>\n";

        int legend_i = 0;
        for (const Series& s : series) {
            const auto it = palette.find(s.name.substr(0, s.name.find('_')));
            const std::string color = it != palette.end() ? it->second : "#8c564b";
            std::ostringstream band, line;
            band << "<polygon fill='" << color << "' fill-opacity='0.18' stroke='none' points='";
            for (std::size_t i = 0; i < s.mean.size(); ++i)
                band << sx(s.centers[i]) << ',' << sy(s.mean[i] + s.stddev[i]) << ' ';
            for (std::size_t i = s.mean.size(); i-- > 0;)
                band << sx(s.centers[i]) << ',' << sy(s.mean[i] - s.stddev[i]) << ' ';
            band << "'/>";
            line << "<polyline fill='none' stroke='" << color << "' stroke-width='2' points='";
            for (std::size_t i = 0; i < s.mean.size(); ++i)
                line << sx(s.centers[i]) << ',' << sy(s.mean[i]) << ' ';
            line << "'/>";
            svg << band.str() << '\n' << line.str() << '\n';
            const double ly = mt + 18.0 * legend_i;
            svg << "<line x1='" << w - mr - 150 << "' y1='" << ly << "' x2='" << w - mr - 120 << "' y2='"
                << ly << "' stroke='" << color << "' stroke-width='3'/>\n";
            svg << "<text x='" << w - mr - 112 << "' y='" << ly + 4 << "' font-size='13'>" << s.name
                << "</text>\n";
            ++legend_i;
        }
        svg << "</svg>\n";

        const std::string svg_path = out_dir + "/" + env + ".svg";
        std::ofstream out(svg_path);
        out << svg.str();
        written.push_back(svg_path);
    }
    return written;
}

AblationReport ablation_batch_size(const std::string& env_id, const std::vector<int>& sizes,
                                   const std::vector<std::uint64_t>& seeds, long total_timesteps,
                                   const std::string& out_dir, int jobs) {
    if (sizes.empty()) throw std::invalid_argument("ablation: no batch sizes given");
    if (seeds.empty()) throw std::invalid_argument("ablation: no seeds given");

    std::vector<AgentConfig> configs;
    for (int b : sizes) {
        for (std::uint64_t seed : seeds) {
            AgentConfig c = default_config(env_id, "smac", seed);
            c.total_timesteps = total_timesteps;
            if (b < 1 || b > c.T || c.T % b != 0)
                throw std::invalid_argument("ablation: batch size " + std::to_string(b) +
                                            " incompatible with T=" + std::to_string(c.T));
            c.batch_mode = b == 1 ? BatchMode::per_sample : BatchMode::batch_mean;
            c.update_batch_size = b;
            configs.push_back(std::move(c));
        }
    }

    std::vector<RunRecord> records;
    execute_runs(configs, jobs, records);

    fs::create_directories(out_dir);
    for (const RunRecord& r : records) {
        const std::string base = out_dir + "/" + run_name(r.config);
        if (!r.failed) write_run_csv(base + "_run.csv", r);
        write_run_json(base + "_run.json", r);
        if (r.failed) throw std::runtime_error("ablation: run failed: " + r.error);
    }

    AblationReport report;
    report.env_id = env_id;
    std::size_t idx = 0;
    for (int b : sizes) {
        AblationModeResult mode;
        mode.update_batch = b;
        for (std::size_t s = 0; s < seeds.size(); ++s, ++idx) {
            mode.records.push_back(records[idx]);
            mode.mean_final_return += records[idx].final_return;
            mode.total_actor_ms += records[idx].total_actor_ms;
        }
        mode.mean_final_return /= static_cast<double>(seeds.size());
        report.modes.push_back(std::move(mode));
    }

    const AblationModeResult* per_sample = nullptr;
    const AblationModeResult* batch_mean = nullptr;
    for (const AblationModeResult& m : report.modes) {
        if (m.update_batch == 1) per_sample = &m;
        if (m.update_batch == report.modes.front().records.front().config.T) batch_mean = &m;
    }
    if (per_sample && batch_mean && per_sample->total_actor_ms > 0.0)
        report.wall_time_ratio = batch_mean->total_actor_ms / per_sample->total_actor_ms;
    return report;
}

void write_ablation_report(const std::string& path, const AblationReport& report) {
    json j;
    j["env"] = report.env_id;
    j["wall_time_ratio_batch_over_per_sample"] = report.wall_time_ratio;
    json modes = json::array();
    for (const AblationModeResult& m : report.modes) {
        json finals = json::array();
        for (const RunRecord& r : m.records) finals.push_back(r.final_return);
        modes.push_back({{"update_batch", m.update_batch},
                         {"mean_final_return", m.mean_final_return},
                         {"final_returns", finals},
                         {"total_actor_ms", m.total_actor_ms}});
    }
    j["modes"] = std::move(modes);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_ablation_report: cannot open " + path);
    out << j.dump(2) << '\n';
}

}  // namespace smac
