#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace smac {

// Flat parameter/gradient vector. Every optimizer and network in this
// library operates on this one representation.
using Vec = std::vector<double>;

inline void require_same_dim(const Vec& a, const Vec& b, const char* where) {
    if (a.size() != b.size()) {
        throw std::invalid_argument(std::string(where) + ": dimension mismatch (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    }
}

inline bool all_finite(const Vec& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

inline double dot(const Vec& a, const Vec& b) {
    require_same_dim(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// y + alpha * x
inline Vec axpy(double alpha, const Vec& x, const Vec& y) {
    require_same_dim(x, y, "axpy");
    Vec out(y);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += alpha * x[i];
    return out;
}

inline void axpy_inplace(double alpha, const Vec& x, Vec& y) {
    require_same_dim(x, y, "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vec scaled(double alpha, const Vec& x) {
    Vec out(x);
    for (double& v : out) v *= alpha;
    return out;
}

inline void scale_inplace(double alpha, Vec& x) {
    for (double& v : x) v *= alpha;
}

inline double squared_norm(const Vec& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

inline double norm(const Vec& x) { return std::sqrt(squared_norm(x)); }

inline Vec zeros(std::size_t n) { return Vec(n, 0.0); }

// Central-difference gradient, (f(x+h e_i) - f(x-h e_i)) / (2h).
// Test oracle for every analytic gradient in the library.
inline Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: h must be > 0");
    Vec g(x.size(), 0.0);
    Vec xp(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        xp[i] = xi + h;
        const double fp = f(xp);
        xp[i] = xi - h;
        const double fm = f(xp);
        xp[i] = xi;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw std::runtime_error("finite_diff_grad: non-finite function evaluation");
        }
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

}  // namespace smac
