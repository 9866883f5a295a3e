#pragma once

#include <vector>

#include "smac/numeric.hpp"

namespace smac {

// Row-major dense matrix. Oracle/test scale only: production update paths
// never materialize a d x d matrix.
class DenseMatrix {
public:
    DenseMatrix(int rows, int cols)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {
        if (rows < 1 || cols < 1) throw std::invalid_argument("DenseMatrix: non-positive shape");
    }

    static DenseMatrix identity(int n) {
        DenseMatrix m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

    // u v^T
    static DenseMatrix outer(const Vec& u, const Vec& v) {
        DenseMatrix m(static_cast<int>(u.size()), static_cast<int>(v.size()));
        for (std::size_t i = 0; i < u.size(); ++i)
            for (std::size_t j = 0; j < v.size(); ++j) m.at(static_cast<int>(i), static_cast<int>(j)) = u[i] * v[j];
        return m;
    }

    double& at(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double at(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    Vec apply(const Vec& x) const {
        if (static_cast<int>(x.size()) != cols_) throw std::invalid_argument("DenseMatrix::apply: dimension mismatch");
        Vec y(rows_, 0.0);
        for (int i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (int j = 0; j < cols_; ++j) s += at(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    DenseMatrix& add_scaled_identity(double alpha) {
        if (rows_ != cols_) throw std::invalid_argument("add_scaled_identity: square only");
        for (int i = 0; i < rows_; ++i) at(i, i) += alpha;
        return *this;
    }

private:
    int rows_, cols_;
    std::vector<double> data_;
};

// Solve A x = b by Gaussian elimination with partial pivoting.
Vec solve_gauss(DenseMatrix a, Vec b);

// All eigenvalues of a symmetric matrix via cyclic Jacobi rotations.
std::vector<double> symmetric_eigenvalues(DenseMatrix a);

double smallest_symmetric_eigenvalue(const DenseMatrix& a);

}  // namespace smac
