#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace smac {

// Equal-width timestep bins over (0, max_timestep]. Each bin reports the
// arithmetic mean of the values falling inside it; empty bins carry the
// previous bin's value forward (the first bins, if empty, take the first
// available value). Non-finite values are skipped. Returns exactly n_bins
// (bin_center, mean) pairs.
std::vector<std::pair<double, double>> bin_curve(const std::vector<std::pair<double, double>>& points,
                                                 std::size_t n_bins);

// Exponentially weighted mean: y_0 = x_0, y_t = factor*x_t + (1-factor)*y_{t-1}.
std::vector<double> ewm_smooth(const std::vector<double>& curve, double factor);

}  // namespace smac
