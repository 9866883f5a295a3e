#include "smac/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace smac {

int param_count(const MlpSpec& spec) {
    if (!spec.valid()) throw std::invalid_argument("param_count: invalid MlpSpec");
    int d = 0;
    int in = spec.input_dim;
    for (int h : spec.hidden) {
        d += in * h + h;
        in = h;
    }
    d += in * spec.output_dim + spec.output_dim;
    return d;
}

void Mlp::build_layout() {
    layer_in_.clear();
    layer_out_.clear();
    w_off_.clear();
    b_off_.clear();
    int in = spec_.input_dim;
    int off = 0;
    auto add_layer = [&](int out) {
        layer_in_.push_back(in);
        layer_out_.push_back(out);
        w_off_.push_back(off);
        off += in * out;
        b_off_.push_back(off);
        off += out;
        in = out;
    };
    for (int h : spec_.hidden) add_layer(h);
    add_layer(spec_.output_dim);
}

Mlp Mlp::init(const MlpSpec& spec, Rng& rng) {
    if (!spec.valid()) throw std::invalid_argument("Mlp::init: invalid MlpSpec");
    Mlp net;
    net.spec_ = spec;
    net.build_layout();
    net.params_.assign(param_count(spec), 0.0);
    for (std::size_t layer = 0; layer < net.layer_in_.size(); ++layer) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(net.layer_in_[layer]));
        const int nw = net.layer_in_[layer] * net.layer_out_[layer];
        for (int i = 0; i < nw; ++i) net.params_[net.w_off_[layer] + i] = rng.uniform(-bound, bound);
        // biases stay zero
    }
    return net;
}

void Mlp::set_params(Vec p) {
    if (static_cast<int>(p.size()) != param_dim())
        throw std::invalid_argument("Mlp::set_params: dimension mismatch");
    params_ = std::move(p);
}

Vec Mlp::forward(const Vec& x) const {
    if (static_cast<int>(x.size()) != spec_.input_dim)
        throw std::invalid_argument("Mlp::forward: input dimension mismatch");
    Vec act = x;
    const std::size_t n_layers = layer_in_.size();
    for (std::size_t layer = 0; layer < n_layers; ++layer) {
        const int in = layer_in_[layer];
        const int out = layer_out_[layer];
        Vec next(out);
        const double* w = params_.data() + w_off_[layer];
        const double* b = params_.data() + b_off_[layer];
        for (int o = 0; o < out; ++o) {
            double s = b[o];
            const double* row = w + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) s += row[i] * act[i];
            next[o] = s;
        }
        if (layer + 1 < n_layers) {
            for (double& v : next) v = std::tanh(v);
        }
        act = std::move(next);
    }
    return act;
}

Vec Mlp::backward(const Vec& x, const Vec& upstream) const {
    if (static_cast<int>(x.size()) != spec_.input_dim)
        throw std::invalid_argument("Mlp::backward: input dimension mismatch");
    if (static_cast<int>(upstream.size()) != spec_.output_dim)
        throw std::invalid_argument("Mlp::backward: upstream dimension mismatch");

    const std::size_t n_layers = layer_in_.size();

    // Forward pass, keeping post-activation values per layer.
    std::vector<Vec> acts(n_layers + 1);
    acts[0] = x;
    for (std::size_t layer = 0; layer < n_layers; ++layer) {
        const int in = layer_in_[layer];
        const int out = layer_out_[layer];
        Vec next(out);
        const double* w = params_.data() + w_off_[layer];
        const double* b = params_.data() + b_off_[layer];
        for (int o = 0; o < out; ++o) {
            double s = b[o];
            const double* row = w + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) s += row[i] * acts[layer][i];
            next[o] = s;
        }
        if (layer + 1 < n_layers) {
            for (double& v : next) v = std::tanh(v);
        }
        acts[layer + 1] = std::move(next);
    }

    Vec grad(params_.size(), 0.0);
    Vec delta = upstream;  // output layer is linear
    for (std::size_t li = n_layers; li-- > 0;) {
        const int in = layer_in_[li];
        const int out = layer_out_[li];
        const Vec& a_prev = acts[li];
        double* gw = grad.data() + w_off_[li];
        double* gb = grad.data() + b_off_[li];
        for (int o = 0; o < out; ++o) {
            const double d = delta[o];
            double* row = gw + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) row[i] += d * a_prev[i];
            gb[o] += d;
        }
        if (li == 0) break;
        // Propagate through the tanh of the previous layer.
        const double* w = params_.data() + w_off_[li];
        Vec prev_delta(in, 0.0);
        for (int o = 0; o < out; ++o) {
            const double d = delta[o];
            const double* row = w + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) prev_delta[i] += d * row[i];
        }
        for (int i = 0; i < in; ++i) prev_delta[i] *= 1.0 - a_prev[i] * a_prev[i];
        delta = std::move(prev_delta);
    }
    return grad;
}

}  // namespace smac
