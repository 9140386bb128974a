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
// Reference implementations used only by the tests. They intentionally use
// different algorithms from the library (dense LU instead of CG, quadrature
// instead of closed forms, Jacobi rotations instead of anything iterative) so
// that agreement between the two is meaningful.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "spdekit/sparse.hpp"

namespace oracle {

// Row-major dense matrix helpers.
struct Dense {
    int n = 0;
    std::vector<double> a;

    explicit Dense(int size) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}
    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

inline Dense to_dense(const spdekit::SparseMatrix& m) {
    Dense d(m.rows);
    for (int i = 0; i < m.rows; ++i)
        for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) d.at(i, m.col_idx[k]) += m.vals[k];
    return d;
}

inline std::vector<double> matvec(const Dense& m, const std::vector<double>& x) {
    std::vector<double> y(m.n, 0.0);
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) y[i] += m.at(i, j) * x[j];
    return y;
}

// LU with partial pivoting; solves in place.
inline std::vector<double> lu_solve(Dense m, std::vector<double> b) {
    const int n = m.n;
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(m.at(i, k)) > std::abs(m.at(p, k))) p = i;
        if (m.at(p, k) == 0.0) throw std::runtime_error("lu_solve: singular matrix");
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(m.at(p, j), m.at(k, j));
            std::swap(b[p], b[k]);
        }
        for (int i = k + 1; i < n; ++i) {
            const double f = m.at(i, k) / m.at(k, k);
            m.at(i, k) = 0.0;
            for (int j = k + 1; j < n; ++j) m.at(i, j) -= f * m.at(k, j);
            b[i] -= f * b[k];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= m.at(i, j) * b[j];
        b[i] = s / m.at(i, i);
    }
    return b;
}

// Cyclic Jacobi eigensolver for symmetric matrices; returns eigenvalues
// ascending. O(n^3) per sweep, fine for the small systems in tests.
inline std::vector<double> jacobi_eigenvalues(Dense m, int sweeps = 30) {
    const int n = m.n;
    for (int s = 0; s < sweeps; ++s) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += m.at(i, j) * m.at(i, j);
        if (off < 1e-24) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double apq = m.at(p, q);
                if (apq == 0.0) continue;
                const double theta = (m.at(q, q) - m.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = m.at(k, p), akq = m.at(k, q);
                    m.at(k, p) = c * akp - sn * akq;
                    m.at(k, q) = sn * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = m.at(p, k), aqk = m.at(q, k);
                    m.at(p, k) = c * apk - sn * aqk;
                    m.at(q, k) = sn * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = m.at(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

// Generalized symmetric eigenvalues of K x = lambda M x via the Cholesky
// reduction M = L L^T, eig(L^-1 K L^-T).
inline std::vector<double> generalized_eigenvalues(const Dense& K, Dense M) {
    const int n = K.n;
    // Cholesky of M (must be SPD).
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < k; ++j) M.at(k, k) -= M.at(k, j) * M.at(k, j);
        if (M.at(k, k) <= 0.0) throw std::runtime_error("generalized_eigenvalues: M not SPD");
        M.at(k, k) = std::sqrt(M.at(k, k));
        for (int i = k + 1; i < n; ++i) {
            for (int j = 0; j < k; ++j) M.at(i, k) -= M.at(i, j) * M.at(k, j);
            M.at(i, k) /= M.at(k, k);
        }
    }
    // B = L^-1 K, then C = B L^-T (forward substitutions using lower L in M).
    Dense B(n);
    for (int col = 0; col < n; ++col) {
        for (int i = 0; i < n; ++i) {
            double s = K.at(i, col);
            for (int j = 0; j < i; ++j) s -= M.at(i, j) * B.at(j, col);
            B.at(i, col) = s / M.at(i, i);
        }
    }
    Dense C(n);
    for (int row = 0; row < n; ++row) {
        for (int i = 0; i < n; ++i) {
            double s = B.at(row, i);
            for (int j = 0; j < i; ++j) s -= M.at(i, j) * C.at(row, j);
            C.at(row, i) = s / M.at(i, i);
        }
    }
    // Symmetrize against roundoff before Jacobi.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = 0.5 * (C.at(i, j) + C.at(j, i));
            C.at(i, j) = v;
            C.at(j, i) = v;
        }
    return jacobi_eigenvalues(C);
}

// Composite Simpson on [a, b] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
    if (n % 2 != 0) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Kolmogorov-Smirnov statistic of a sample against the standard normal.
inline double ks_statistic(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double cdf = normal_cdf(sample[i]);
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
        d = std::max(d, std::abs(cdf - static_cast<double>(i + 1) / n));
    }
    return d;
}

}  // namespace oracle
