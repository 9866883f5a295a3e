#include "smac/dense.hpp"

#include <algorithm>
#include <cmath>

namespace smac {

Vec solve_gauss(DenseMatrix a, Vec b) {
    const int n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("solve_gauss: square matrix required");
    if (static_cast<int>(b.size()) != n) throw std::invalid_argument("solve_gauss: rhs dimension mismatch");

    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(a.at(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double v = std::abs(a.at(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0.0) throw std::runtime_error("solve_gauss: singular matrix");
        if (piv != k) {
            for (int j = k; j < n; ++j) std::swap(a.at(k, j), a.at(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (int i = k + 1; i < n; ++i) {
            const double f = a.at(i, k) / a.at(k, k);
            if (f == 0.0) continue;
            for (int j = k; j < n; ++j) a.at(i, j) -= f * a.at(k, j);
            b[i] -= f * b[k];
        }
    }
    Vec x(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= a.at(i, j) * x[j];
        x[i] = s / a.at(i, i);
    }
    return x;
}

std::vector<double> symmetric_eigenvalues(DenseMatrix a) {
    const int n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("symmetric_eigenvalues: square matrix required");

    // Cyclic Jacobi sweeps until off-diagonal mass is negligible.
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
        if (off < 1e-26) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (apq == 0.0) continue;
                const double app = a.at(p, p);
                const double aqq = a.at(q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                             : 1.0 / (tau - std::sqrt(1.0 + tau * tau)));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a.at(k, p);
                    const double akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a.at(p, k);
                    const double aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eigs(n);
    for (int i = 0; i < n; ++i) eigs[i] = a.at(i, i);
    std::sort(eigs.begin(), eigs.end());
    return eigs;
}

double smallest_symmetric_eigenvalue(const DenseMatrix& a) { return symmetric_eigenvalues(a).front(); }

}  // namespace smac
