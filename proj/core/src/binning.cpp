#include "smac/binning.hpp"

#include <cmath>
#include <stdexcept>

namespace smac {

std::vector<std::pair<double, double>> bin_curve(const std::vector<std::pair<double, double>>& points,
                                                 std::size_t n_bins) {
    if (n_bins < 1) throw std::invalid_argument("bin_curve: n_bins must be >= 1");
    if (points.empty()) throw std::invalid_argument("bin_curve: empty input");

    double max_t = 0.0;
    for (const auto& [t, v] : points) max_t = std::max(max_t, t);
    const double width = max_t > 0.0 ? max_t / static_cast<double>(n_bins) : 1.0;

    std::vector<double> sums(n_bins, 0.0);
    std::vector<std::size_t> counts(n_bins, 0);
    for (const auto& [t, v] : points) {
        if (!std::isfinite(v)) continue;
        std::size_t idx = t <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(t / width)) - 1;
        if (idx >= n_bins) idx = n_bins - 1;
        sums[idx] += v;
        counts[idx] += 1;
    }

    std::vector<std::pair<double, double>> out(n_bins);
    // Leading empty bins take the first occupied bin's value.
    double carry = 0.0;
    bool have_carry = false;
    for (std::size_t i = 0; i < n_bins && !have_carry; ++i) {
        if (counts[i] > 0) {
            carry = sums[i] / static_cast<double>(counts[i]);
            have_carry = true;
        }
    }
    for (std::size_t i = 0; i < n_bins; ++i) {
        if (counts[i] > 0) carry = sums[i] / static_cast<double>(counts[i]);
        out[i] = {(static_cast<double>(i) + 0.5) * width, carry};
    }
    return out;
}

std::vector<double> ewm_smooth(const std::vector<double>& curve, double factor) {
    if (curve.empty()) throw std::invalid_argument("ewm_smooth: empty input");
    if (!(factor > 0.0 && factor <= 1.0)) throw std::invalid_argument("ewm_smooth: factor must be in (0,1]");
    std::vector<double> out(curve.size());
    out[0] = curve[0];
    for (std::size_t i = 1; i < curve.size(); ++i) out[i] = factor * curve[i] + (1.0 - factor) * out[i - 1];
    return out;
}

}  // namespace smac
