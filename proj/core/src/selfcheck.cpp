#include "smac/selfcheck.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "smac/binning.hpp"
#include "smac/fisher.hpp"
#include "smac/gae.hpp"
#include "smac/harness.hpp"
#include "smac/mlp.hpp"
#include "smac/policy.hpp"
#include "smac/rng.hpp"

namespace smac {

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

double rel_err(const Vec& got, const Vec& want) {
    const double scale = norm(want);
    return norm(axpy(-1.0, want, got)) / (scale > 0.0 ? scale : 1.0);
}

}  // namespace

CheckResult check_sm_exactness(int n_cases) {
    Rng rng(20240617);
    const int dims[] = {2, 8, 64, 128};
    const double lambdas[] = {0.01, 0.1, 1.0, 10.0};
    double worst = 0.0;
    for (int c = 0; c < n_cases; ++c) {
        const int d = dims[c % 4];
        const double lambda = lambdas[(c / 4) % 4];
        Vec l = gaussian_sample(rng, d);
        Vec g = gaussian_sample(rng, d);
        const FisherPrecond p(lambda, l);
        worst = std::max(worst, rel_err(sm_inverse_apply(p, g), dense_sm_oracle(p, g)));
    }
    CheckResult r;
    r.name = "sherman-morrison inverse vs dense solve";
    r.passed = worst <= 1e-10;
    r.detail = "max relative error " + fmt(worst) + " over " + std::to_string(n_cases) + " cases (tol 1e-10)";
    return r;
}

CheckResult check_gradients(int n_nets) {
    Rng rng(7151);
    const double h = 1e-5;
    double worst = 0.0;
    for (int c = 0; c < n_nets; ++c) {
        const int in_dim = 2 + rng.uniform_int(4);
        const int hidden = 2 + rng.uniform_int(8);
        const int kind = c % 3;

        if (kind == 0) {
            // categorical score gradient
            const int n_act = 2 + rng.uniform_int(3);
            CategoricalPolicy pol(Mlp::init(MlpSpec{in_dim, n_act, {hidden}}, rng), n_act);
            Vec s = gaussian_sample(rng, in_dim);
            const Action a{rng.uniform_int(n_act)};
            Vec analytic = pol.grad_log_prob(s, a);
            CategoricalPolicy probe = pol;
            auto f = [&](const Vec& theta) {
                probe.set_params(theta);
                return probe.log_prob_of(s, a);
            };
            worst = std::max(worst, rel_err(analytic, finite_diff_grad(f, pol.params(), h)));
        } else if (kind == 1) {
            // gaussian score gradient (mean net + log_std tail)
            const int a_dim = 1 + rng.uniform_int(2);
            GaussianPolicy pol(Mlp::init(MlpSpec{in_dim, a_dim, {hidden}}, rng), a_dim);
            Vec s = gaussian_sample(rng, in_dim);
            SampleResult sr = pol.sample(s, rng);
            Vec analytic = pol.grad_log_prob(s, sr.action);
            GaussianPolicy probe = pol;
            auto f = [&](const Vec& theta) {
                probe.set_params(theta);
                return probe.log_prob_of(s, sr.action);
            };
            worst = std::max(worst, rel_err(analytic, finite_diff_grad(f, pol.params(), h)));
        } else {
            // critic mean-squared-error gradient over a small batch
            Mlp critic = Mlp::init(MlpSpec{in_dim, 1, {hidden}}, rng);
            const int t_max = 4;
            std::vector<Vec> states;
            Vec targets;
            for (int t = 0; t < t_max; ++t) {
                states.push_back(gaussian_sample(rng, in_dim));
                targets.push_back(rng.uniform(-2.0, 2.0));
            }
            Vec analytic = zeros(critic.param_dim());
            Vec upstream(1);
            for (int t = 0; t < t_max; ++t) {
                const double v = critic.forward(states[t])[0];
                upstream[0] = 2.0 / t_max * (v - targets[t]);
                axpy_inplace(1.0, critic.backward(states[t], upstream), analytic);
            }
            Mlp probe = critic;
            auto f = [&](const Vec& phi) {
                probe.set_params(phi);
                double loss = 0.0;
                for (int t = 0; t < t_max; ++t) {
                    const double err = probe.forward(states[t])[0] - targets[t];
                    loss += err * err / t_max;
                }
                return loss;
            };
            worst = std::max(worst, rel_err(analytic, finite_diff_grad(f, critic.params(), h)));
        }
    }
    CheckResult r;
    r.name = "analytic gradients vs finite differences";
    r.passed = worst <= 1e-4;
    r.detail = "max relative error " + fmt(worst) + " over " + std::to_string(n_nets) + " nets (tol 1e-4)";
    return r;
}

CheckResult check_gae_oracle(int n_batches) {
    Rng rng(90210);
    double worst = 0.0;
    bool lambda0_ok = true;
    for (int c = 0; c < n_batches; ++c) {
        const int t_max = 1 + rng.uniform_int(256);
        RolloutBatch batch;
        for (int t = 0; t < t_max; ++t) {
            batch.rewards.push_back(rng.uniform(-2.0, 2.0));
            batch.dones.push_back(rng.uniform() < 0.08 ? 1 : 0);
            batch.values.push_back(rng.uniform(-2.0, 2.0));
        }
        batch.values.push_back(rng.uniform(-2.0, 2.0));
        batch.states.resize(t_max);
        batch.actions.resize(t_max, Action{0});
        batch.rewards.resize(t_max);
        batch.log_probs.resize(t_max);

        const double gamma = rng.uniform(0.5, 1.0);
        const double lam = rng.uniform();
        const GaeOutput fast = compute_gae(batch, gamma, lam);
        const GaeOutput slow = gae_bruteforce_oracle(batch, gamma, lam);
        for (int t = 0; t < t_max; ++t)
            worst = std::max(worst, std::abs(fast.advantages[t] - slow.advantages[t]));

        const GaeOutput one_step = compute_gae(batch, gamma, 0.0);
        for (int t = 0; t < t_max; ++t)
            if (one_step.advantages[t] != one_step.deltas[t]) lambda0_ok = false;
    }
    CheckResult r;
    r.name = "recursive GAE vs brute-force double sum";
    r.passed = worst <= 1e-12 && lambda0_ok;
    r.detail = "max abs deviation " + fmt(worst) + " over " + std::to_string(n_batches) +
               " batches (tol 1e-12); lambda=0 reduces to TD residuals: " + (lambda0_ok ? "yes" : "no");
    return r;
}

CheckResult check_cg_rank1_consistency(int n_cases) {
    Rng rng(5150);
    double worst = 0.0;
    int worst_iters = 0;
    for (int c = 0; c < n_cases; ++c) {
        const int d = 4 + rng.uniform_int(60);
        const double lambda = 0.01 * std::pow(10.0, c % 4);
        Vec l = gaussian_sample(rng, d);
        Vec g = gaussian_sample(rng, d);
        const std::vector<Vec> scores{l};
        Vec direct = smac_direction(lambda, scores, g);
        const FvpBatch batch{scores, lambda};
        const CgResult cg =
            cg_solve([&batch](const Vec& v) { return empirical_fvp(batch, v); }, g, 10, 1e-10);
        worst = std::max(worst, rel_err(cg.x, direct));
        worst_iters = std::max(worst_iters, cg.iterations);
    }
    CheckResult r;
    r.name = "rank-1 CG vs closed-form inverse";
    r.passed = worst <= 1e-6 && worst_iters <= 2;
    r.detail = "max relative gap " + fmt(worst) + " (tol 1e-6), max CG iterations " +
               std::to_string(worst_iters) + " (limit 2)";
    return r;
}

CheckResult check_protocol_fidelity() {
    std::ostringstream why;
    bool ok = true;

    // Hand-computed binning case: values 1..4 into two bins.
    {
        const std::vector<std::pair<double, double>> pts{{1, 1}, {2, 2}, {3, 3}, {4, 4}};
        const auto binned = bin_curve(pts, 2);
        if (std::abs(binned[0].second - 1.5) > 1e-15 || std::abs(binned[1].second - 3.5) > 1e-15) {
            ok = false;
            why << "two-bin means wrong; ";
        }
        const auto global = bin_curve(pts, 1);
        if (std::abs(global[0].second - 2.5) > 1e-15) {
            ok = false;
            why << "single-bin mean wrong; ";
        }
    }
    // Hand-computed smoothing case and fixed points.
    {
        const auto sm = ewm_smooth({0.0, 1.0}, 0.1);
        if (sm[0] != 0.0 || std::abs(sm[1] - 0.1) > 1e-15) {
            ok = false;
            why << "ewm recursion wrong; ";
        }
        const auto ident = ewm_smooth({3.0, -1.0, 2.0}, 1.0);
        if (ident[0] != 3.0 || ident[1] != -1.0 || ident[2] != 2.0) {
            ok = false;
            why << "factor=1 not identity; ";
        }
        std::vector<std::pair<double, double>> flat;
        for (int i = 1; i <= 50; ++i) flat.emplace_back(i, 7.25);
        const auto binned = bin_curve(flat, 10);
        std::vector<double> vals;
        for (const auto& [c, v] : binned) vals.push_back(v);
        for (double v : ewm_smooth(vals, 0.1))
            if (std::abs(v - 7.25) > 1e-15) {
                ok = false;
                why << "constant signal not preserved; ";
                break;
            }
    }
    // Summary round trip through persisted CSV.
    {
        namespace fs = std::filesystem;
        const fs::path dir = fs::temp_directory_path() / "smac_selfcheck_csv";
        fs::create_directories(dir);
        Rng rng(31);
        std::vector<RunRecord> records;
        for (int seed = 0; seed < 3; ++seed) {
            RunRecord rec;
            rec.config = default_config("cartpole", "smac", seed);
            for (int k = 0; k < 120; ++k) {
                IterationLog log;
                log.iteration = k;
                log.timestep = (k + 1) * 1000;
                log.mean_episode_return = 10.0 * seed + k + 0.37 * rng.normal();
                log.mean_action_log_prob = -0.5 - 0.001 * k;
                rec.iterations.push_back(log);
            }
            std::vector<std::pair<double, double>> pts;
            for (const auto& l : rec.iterations)
                pts.emplace_back(static_cast<double>(l.timestep), l.mean_episode_return);
            std::vector<double> vals;
            for (const auto& [c, v] : bin_curve(pts, 100)) vals.push_back(v);
            rec.final_return = ewm_smooth(vals, 0.1).back();
            const std::string path = (dir / (run_name(rec.config) + "_run.csv")).string();
            write_run_csv(path, rec);
            const double reread = final_return_from_csv(path);
            if (std::abs(reread - rec.final_return) > 1e-9) {
                ok = false;
                why << "per-run csv round trip off by " << fmt(std::abs(reread - rec.final_return)) << "; ";
            }
            records.push_back(std::move(rec));
        }
        const auto rows = summarize(records);
        const std::string spath = (dir / "summary.csv").string();
        write_summary_csv(spath, rows);
        const auto reread = read_summary_csv(spath);
        if (reread.size() != rows.size()) {
            ok = false;
            why << "summary row count changed; ";
        } else {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (std::abs(reread[i].mean_final_return - rows[i].mean_final_return) > 1e-9 ||
                    std::abs(reread[i].std_final_return - rows[i].std_final_return) > 1e-9) {
                    ok = false;
                    why << "summary csv round trip drifted; ";
                }
            }
        }
    }

    CheckResult r;
    r.name = "binning/smoothing pipeline and csv round trip";
    r.passed = ok;
    r.detail = ok ? "hand cases, constant identity, and 1e-9 csv round trip hold" : why.str();
    return r;
}

CheckResult check_score_properties(int n_states) {
    Rng rng(444);
    double worst_mean = 0.0;
    double worst_quadform = 0.0;
    for (int c = 0; c < n_states; ++c) {
        const int n_act = 2 + rng.uniform_int(4);
        const int in_dim = 2 + rng.uniform_int(4);
        CategoricalPolicy pol(Mlp::init(MlpSpec{in_dim, n_act, {6}}, rng), n_act);
        Vec s = gaussian_sample(rng, in_dim);
        const Vec probs = pol.action_probs(s);

        Vec mean = zeros(pol.param_dim());
        std::vector<Vec> scores;
        for (int a = 0; a < n_act; ++a) {
            Vec l = pol.grad_log_prob(s, Action{a});
            axpy_inplace(probs[a], l, mean);
            scores.push_back(std::move(l));
        }
        worst_mean = std::max(worst_mean, norm(mean));

        const double lambda = 0.05;
        Vec v = gaussian_sample(rng, pol.param_dim());
        const FvpBatch batch{scores, lambda};
        const double quad = dot(v, empirical_fvp(batch, v));
        const double floor = lambda * squared_norm(v);
        worst_quadform = std::min(worst_quadform, quad - floor);
    }
    CheckResult r;
    r.name = "score zero-mean and damped-fisher positive definiteness";
    r.passed = worst_mean <= 1e-10 && worst_quadform >= -1e-12;
    r.detail = "max |E[score]| " + fmt(worst_mean) + " (tol 1e-10); min v^T(F+lI)v - l|v|^2 = " +
               fmt(worst_quadform);
    return r;
}

std::vector<CheckResult> run_verification() {
    std::vector<CheckResult> results;
    results.push_back(check_sm_exactness(1000));
    results.push_back(check_gradients(100));
    results.push_back(check_gae_oracle(1000));
    results.push_back(check_cg_rank1_consistency(200));
    results.push_back(check_protocol_fidelity());
    results.push_back(check_score_properties(50));
    return results;
}

}  // namespace smac
