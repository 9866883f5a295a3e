#pragma once

#include <vector>

#include "smac/numeric.hpp"
#include "smac/rng.hpp"

namespace smac {

// Fully connected tanh network. Weights live in one flat vector so that
// Fisher preconditioning and the optimizers can treat the whole network
// as a single d-dimensional point.
struct MlpSpec {
    int input_dim = 0;
    int output_dim = 0;
    std::vector<int> hidden;

    bool valid() const {
        if (input_dim < 1 || output_dim < 1) return false;
        for (int h : hidden)
            if (h < 1) return false;
        return true;
    }
};

// Total parameter count: sum over layers of (fan_in * fan_out + fan_out).
int param_count(const MlpSpec& spec);

class Mlp {
public:
    Mlp() = default;

    // Weights uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
    static Mlp init(const MlpSpec& spec, Rng& rng);

    // Hidden layers tanh, output layer linear.
    Vec forward(const Vec& x) const;

    // Flat gradient w.r.t. parameters of the scalar upstream^T forward(x).
    // Layout matches params(): per layer, row-major weights then biases.
    Vec backward(const Vec& x, const Vec& upstream) const;

    const Vec& params() const { return params_; }
    void set_params(Vec p);
    int param_dim() const { return static_cast<int>(params_.size()); }
    const MlpSpec& spec() const { return spec_; }

private:
    MlpSpec spec_;
    Vec params_;
    std::vector<int> layer_in_, layer_out_;  // per-layer shapes
    std::vector<int> w_off_, b_off_;         // offsets into params_

    void build_layout();
};

}  // namespace smac
