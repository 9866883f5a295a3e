#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "smac/policy.hpp"

using namespace smac;

namespace {

CategoricalPolicy uniform_two_action_policy() {
    // Zero weights and biases: logits are (0, 0) for every state.
    Rng rng(1);
    Mlp net = Mlp::init(MlpSpec{3, 2, {4}}, rng);
    net.set_params(zeros(net.params().size()));
    return {std::move(net), 2};
}

}  // namespace

TEST_CASE("categorical: uniform logits sample each action half the time") {
    CategoricalPolicy pol = uniform_two_action_policy();
    Rng rng(77);
    const Vec s{0.1, -0.2, 0.3};
    int count0 = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const SampleResult sr = pol.sample(s, rng);
        if (std::get<int>(sr.action) == 0) ++count0;
        CHECK(sr.log_prob == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    }
    const double freq = static_cast<double>(count0) / n;
    CHECK(freq >= 0.49);
    CHECK(freq <= 0.51);
}

TEST_CASE("categorical: log_prob_of equals logit minus logsumexp") {
    CategoricalPolicy pol = uniform_two_action_policy();
    const Vec s{1.0, 1.0, 1.0};
    CHECK(pol.log_prob_of(s, Action{0}) == doctest::Approx(-0.6931471805599453).epsilon(1e-12));
    CHECK_THROWS_AS(pol.log_prob_of(s, Action{5}), std::out_of_range);
    CHECK_THROWS_AS(pol.log_prob_of(s, Action{Vec{0.5}}), std::invalid_argument);
}

TEST_CASE("categorical: probabilities normalize") {
    Rng rng(9);
    const int n_act = 5;
    CategoricalPolicy pol(Mlp::init(MlpSpec{4, n_act, {8}}, rng), n_act);
    for (int rep = 0; rep < 20; ++rep) {
        const Vec s = gaussian_sample(rng, 4);
        double total = 0.0;
        for (int a = 0; a < n_act; ++a) total += std::exp(pol.log_prob_of(s, Action{a}));
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("categorical: sampling is deterministic given the seed") {
    Rng r1(123), r2(123);
    Rng init(4);
    CategoricalPolicy pol(Mlp::init(MlpSpec{2, 3, {6}}, init), 3);
    const Vec s{0.4, -0.9};
    for (int i = 0; i < 50; ++i) {
        const SampleResult a = pol.sample(s, r1);
        const SampleResult b = pol.sample(s, r2);
        CHECK(std::get<int>(a.action) == std::get<int>(b.action));
        CHECK(a.log_prob == b.log_prob);
    }
}

TEST_CASE("categorical: saturated logits give a vanishing score") {
    Rng rng(2);
    Mlp net = Mlp::init(MlpSpec{2, 2, {3}}, rng);
    Vec p = zeros(net.params().size());
    p[p.size() - 2] = 40.0;  // output bias pushes all mass onto action 0
    net.set_params(p);
    CategoricalPolicy pol(std::move(net), 2);
    const Vec score = pol.grad_log_prob({0.2, 0.3}, Action{0});
    CHECK(norm(score) <= 1e-12);
}

TEST_CASE("categorical: score matches finite differences") {
    Rng rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        const int n_act = 2 + rng.uniform_int(3);
        CategoricalPolicy pol(Mlp::init(MlpSpec{3, n_act, {7}}, rng), n_act);
        const Vec s = gaussian_sample(rng, 3);
        const Action a{rng.uniform_int(n_act)};
        const Vec analytic = pol.grad_log_prob(s, a);
        CategoricalPolicy probe = pol;
        auto f = [&](const Vec& theta) {
            probe.set_params(theta);
            return probe.log_prob_of(s, a);
        };
        const Vec numeric = finite_diff_grad(f, pol.params(), 1e-5);
        CHECK(norm(axpy(-1.0, numeric, analytic)) <= 1e-4 * std::max(1.0, norm(numeric)));
    }
}

TEST_CASE("categorical: score has zero mean under the policy") {
    Rng rng(12);
    const int n_act = 4;
    CategoricalPolicy pol(Mlp::init(MlpSpec{3, n_act, {6}}, rng), n_act);
    for (int rep = 0; rep < 10; ++rep) {
        const Vec s = gaussian_sample(rng, 3);
        const Vec probs = pol.action_probs(s);
        Vec mean = zeros(pol.param_dim());
        for (int a = 0; a < n_act; ++a) axpy_inplace(probs[a], pol.grad_log_prob(s, Action{a}), mean);
        CHECK(norm(mean) <= 1e-10);
    }
}

TEST_CASE("gaussian: density values at the mean and the worked case") {
    Rng rng(3);
    Mlp net = Mlp::init(MlpSpec{2, 1, {3}}, rng);
    net.set_params(zeros(net.params().size()));  // mean identically 0
    GaussianPolicy pol(std::move(net), 1);

    // std = exp(0) = 1: density at the mean is -0.5*log(2*pi) per dimension
    CHECK(pol.log_prob_of({0.0, 1.0}, Action{Vec{0.0}}) ==
          doctest::Approx(-0.9189385332046727).epsilon(1e-12));

    // mean 1, std 2, a = 1: -0.5*log(2*pi*4)
    Vec theta = pol.params();
    theta[theta.size() - 2] = 1.0;           // output bias -> mean = 1
    theta[theta.size() - 1] = std::log(2.0); // log_std
    pol.set_params(theta);
    CHECK(pol.log_prob_of({0.0, 1.0}, Action{Vec{1.0}}) ==
          doctest::Approx(-1.612085713764618).epsilon(1e-10));
}

TEST_CASE("gaussian: sample/log_prob consistency and determinism") {
    Rng init(6);
    GaussianPolicy pol(Mlp::init(MlpSpec{3, 2, {5}}, init), 2);
    Rng r1(55), r2(55);
    const Vec s{0.2, -0.4, 0.6};
    for (int i = 0; i < 30; ++i) {
        const SampleResult a = pol.sample(s, r1);
        const SampleResult b = pol.sample(s, r2);
        CHECK(std::get<Vec>(a.action) == std::get<Vec>(b.action));
        CHECK(a.log_prob == b.log_prob);
        CHECK(pol.log_prob_of(s, a.action) == doctest::Approx(a.log_prob).epsilon(1e-12));
    }
}

TEST_CASE("gaussian: score matches finite differences, including log_std") {
    Rng rng(13);
    for (int rep = 0; rep < 10; ++rep) {
        const int a_dim = 1 + rng.uniform_int(2);
        GaussianPolicy pol(Mlp::init(MlpSpec{3, a_dim, {6}}, rng), a_dim);
        const Vec s = gaussian_sample(rng, 3);
        const SampleResult sr = pol.sample(s, rng);
        const Vec analytic = pol.grad_log_prob(s, sr.action);
        GaussianPolicy probe = pol;
        auto f = [&](const Vec& theta) {
            probe.set_params(theta);
            return probe.log_prob_of(s, sr.action);
        };
        const Vec numeric = finite_diff_grad(f, pol.params(), 1e-5);
        CHECK(norm(axpy(-1.0, numeric, analytic)) <= 1e-4 * std::max(1.0, norm(numeric)));
    }
}

TEST_CASE("gaussian: log_std stays clamped") {
    Rng rng(14);
    GaussianPolicy pol(Mlp::init(MlpSpec{2, 1, {3}}, rng), 1);
    Vec theta = pol.params();
    theta[theta.size() - 1] = -20.0;  // below the clamp
    pol.set_params(theta);
    CHECK(pol.stddev()[0] == doctest::Approx(std::exp(-5.0)).epsilon(1e-12));
    // Gradient through a clamped log_std is zero.
    const SampleResult sr = pol.sample({0.1, 0.2}, rng);
    const Vec g = pol.grad_log_prob({0.1, 0.2}, sr.action);
    CHECK(g[g.size() - 1] == 0.0);

    theta[theta.size() - 1] = 10.0;  // above the clamp
    pol.set_params(theta);
    CHECK(pol.stddev()[0] == doctest::Approx(std::exp(2.0)).epsilon(1e-12));
}

TEST_CASE("gaussian: param round trip keeps the log_std tail") {
    Rng rng(15);
    GaussianPolicy pol(Mlp::init(MlpSpec{2, 2, {4}}, rng), 2);
    Vec theta = pol.params();
    theta[theta.size() - 1] = 0.5;
    theta[theta.size() - 2] = -0.25;
    pol.set_params(theta);
    CHECK(pol.params() == theta);
}
