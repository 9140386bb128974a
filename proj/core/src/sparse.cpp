/*
   Copyright 2026 The spdekit Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/
#include "spdekit/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spdekit {

double SparseMatrix::at(int i, int j) const {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        if (col_idx[k] == j) return vals[k];
    return 0.0;
}

std::vector<double> SparseMatrix::diagonal() const {
    std::vector<double> d(rows, 0.0);
    for (int i = 0; i < rows; ++i)
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            if (col_idx[k] == i) d[i] = vals[k];
    return d;
}

bool SparseMatrix::is_symmetric(double tol) const {
    if (rows != cols) return false;
    for (int i = 0; i < rows; ++i)
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            const int j = col_idx[k];
            if (std::abs(vals[k] - at(j, i)) > tol) return false;
        }
    return true;
}

void TripletBuilder::add(int i, int j, double v) {
    if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
        throw std::invalid_argument("sparse: triplet index out of range");
    entries_.push_back({i, j, v});
}

SparseMatrix TripletBuilder::build() const {
    std::vector<Entry> sorted = entries_;
    std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });

    SparseMatrix A;
    A.rows = rows_;
    A.cols = cols_;
    A.row_ptr.assign(rows_ + 1, 0);
    A.col_idx.reserve(sorted.size());
    A.vals.reserve(sorted.size());

    std::size_t k = 0;
    for (int i = 0; i < rows_; ++i) {
        while (k < sorted.size() && sorted[k].i == i) {
            const int j = sorted[k].j;
            double v = 0.0;
            while (k < sorted.size() && sorted[k].i == i && sorted[k].j == j) {
                v += sorted[k].v;
                ++k;
            }
            A.col_idx.push_back(j);
            A.vals.push_back(v);
        }
        A.row_ptr[i + 1] = static_cast<int>(A.col_idx.size());
    }
    return A;
}

void spmv(const SparseMatrix& A, std::span<const double> x, std::span<double> y) {
    if (static_cast<int>(x.size()) != A.cols || static_cast<int>(y.size()) != A.rows)
        throw std::invalid_argument("spmv: dimension mismatch");
    for (int i = 0; i < A.rows; ++i) {
        double acc = 0.0;
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            acc += A.vals[k] * x[A.col_idx[k]];
        y[i] = acc;
    }
}

std::vector<double> spmv(const SparseMatrix& A, const std::vector<double>& x) {
    std::vector<double> y(A.rows);
    spmv(A, std::span<const double>(x), std::span<double>(y));
    return y;
}

SparseMatrix add_scaled(const SparseMatrix& A, double alpha, const SparseMatrix& B) {
    if (A.rows != B.rows || A.cols != B.cols)
        throw std::invalid_argument("add_scaled: shape mismatch");
    TripletBuilder tb(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            tb.add(i, A.col_idx[k], A.vals[k]);
    for (int i = 0; i < B.rows; ++i)
        for (int k = B.row_ptr[i]; k < B.row_ptr[i + 1]; ++k)
            tb.add(i, B.col_idx[k], alpha * B.vals[k]);
    return tb.build();
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

SolveReport cg_solve(const SparseMatrix& A, std::span<const double> b, std::span<double> x,
                     const CgOptions& opts) {
    if (A.rows != A.cols) throw std::invalid_argument("cg_solve: matrix must be square");
    if (static_cast<int>(b.size()) != A.rows || static_cast<int>(x.size()) != A.rows)
        throw std::invalid_argument("cg_solve: dimension mismatch");

    const int n = A.rows;
    const int max_iter = opts.max_iter > 0 ? opts.max_iter : 10 * n;

    SolveReport rep;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        rep.converged = true;
        return rep;
    }
    const double target = opts.tol * bnorm;

    std::vector<double> inv_diag;
    if (opts.jacobi) {
        inv_diag = A.diagonal();
        for (double& d : inv_diag) d = (d != 0.0) ? 1.0 / d : 1.0;
    }

    std::vector<double> r(n), z(n), p(n), q(n);
    spmv(A, x, std::span<double>(r));
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];

    auto precondition = [&](const std::vector<double>& in, std::vector<double>& out) {
        if (opts.jacobi)
            for (int i = 0; i < n; ++i) out[i] = inv_diag[i] * in[i];
        else
            out = in;
    };

    double rnorm = norm2(r);
    if (opts.track_residuals) rep.residual_history.push_back(rnorm);
    if (rnorm <= target) {
        rep.converged = true;
        rep.residual = rnorm;
        return rep;
    }

    precondition(r, z);
    p = z;
    double rz = dot(r, z);

    for (int it = 0; it < max_iter; ++it) {
        spmv(A, p, std::span<double>(q));
        const double pq = dot(p, q);
        if (!(pq > 0.0)) {
            rep.breakdown = true;
            break;
        }
        const double alpha = rz / pq;
        for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (int i = 0; i < n; ++i) r[i] -= alpha * q[i];
        rep.iterations = it + 1;

        rnorm = norm2(r);
        if (opts.track_residuals) rep.residual_history.push_back(rnorm);
        if (rnorm <= target) {
            rep.converged = true;
            break;
        }

        precondition(r, z);
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }

    // Report the true residual, not the recurrence value.
    spmv(A, x, std::span<double>(q));
    for (int i = 0; i < n; ++i) q[i] -= b[i];
    rep.residual = norm2(q);
    rep.converged = rep.residual <= target;
    return rep;
}

}  // namespace spdekit
