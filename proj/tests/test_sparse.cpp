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
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "spdekit/sparse.hpp"

using namespace spdekit;

namespace {

// Deterministic random SPD matrix A = B^T B + n I and a matching rhs.
void random_spd(int n, unsigned seed, oracle::Dense& dense, SparseMatrix& sparse,
                std::vector<double>& b) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    oracle::Dense B(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B.at(i, j) = u(rng);
    dense = oracle::Dense(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = i == j ? static_cast<double>(n) : 0.0;
            for (int k = 0; k < n; ++k) s += B.at(k, i) * B.at(k, j);
            dense.at(i, j) = s;
        }
    TripletBuilder tb(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) tb.add(i, j, dense.at(i, j));
    sparse = tb.build();
    b.assign(n, 0.0);
    for (double& v : b) v = u(rng);
}

}  // namespace

TEST_CASE("triplet builder accumulates duplicates and orders columns") {
    TripletBuilder tb(3, 3);
    tb.add(0, 0, 1.0);
    tb.add(0, 2, 2.0);
    tb.add(0, 0, 0.5);  // duplicate coordinate
    tb.add(2, 1, -1.0);
    tb.add(1, 1, 4.0);
    const SparseMatrix m = tb.build();
    CHECK(m.rows == 3);
    CHECK(m.cols == 3);
    CHECK(m.at(0, 0) == doctest::Approx(1.5));
    CHECK(m.at(0, 2) == doctest::Approx(2.0));
    CHECK(m.at(0, 1) == 0.0);
    CHECK(m.at(1, 1) == doctest::Approx(4.0));
    CHECK(m.at(2, 1) == doctest::Approx(-1.0));
    CHECK(m.nnz() == 4);
    // CSR columns are sorted within each row.
    for (int i = 0; i < m.rows; ++i)
        for (int k = m.row_ptr[i] + 1; k < m.row_ptr[i + 1]; ++k)
            CHECK(m.col_idx[k - 1] < m.col_idx[k]);
}

TEST_CASE("spmv agrees with a dense multiply") {
    oracle::Dense d(0);
    SparseMatrix s;
    std::vector<double> b;
    random_spd(17, 1234u, d, s, b);
    const std::vector<double> y = spmv(s, b);
    const std::vector<double> yd = oracle::matvec(d, b);
    for (int i = 0; i < 17; ++i) CHECK(y[i] == doctest::Approx(yd[i]).epsilon(1e-12));
}

TEST_CASE("diagonal extraction and symmetry check") {
    oracle::Dense d(0);
    SparseMatrix s;
    std::vector<double> b;
    random_spd(11, 99u, d, s, b);
    const std::vector<double> diag = s.diagonal();
    for (int i = 0; i < 11; ++i) CHECK(diag[i] == doctest::Approx(d.at(i, i)));
    CHECK(s.is_symmetric(1e-12));

    TripletBuilder tb(2, 2);
    tb.add(0, 1, 1.0);
    tb.add(1, 0, 2.0);
    CHECK_FALSE(tb.build().is_symmetric(1e-12));
}

TEST_CASE("add_scaled forms A + alpha B") {
    TripletBuilder ta(2, 2), tb(2, 2);
    ta.add(0, 0, 1.0);
    ta.add(1, 1, 2.0);
    tb.add(0, 0, 3.0);
    tb.add(0, 1, 1.0);
    const SparseMatrix c = add_scaled(ta.build(), 0.5, tb.build());
    CHECK(c.at(0, 0) == doctest::Approx(2.5));
    CHECK(c.at(0, 1) == doctest::Approx(0.5));
    CHECK(c.at(1, 1) == doctest::Approx(2.0));
    CHECK(c.at(1, 0) == 0.0);
}

TEST_CASE("conjugate gradient matches dense LU on random SPD systems") {
    for (unsigned seed : {7u, 8u, 9u}) {
        oracle::Dense d(0);
        SparseMatrix s;
        std::vector<double> b;
        random_spd(25, seed, d, s, b);
        const std::vector<double> exact = oracle::lu_solve(d, b);

        for (bool jacobi : {true, false}) {
            CgOptions opt;
            opt.jacobi = jacobi;
            opt.tol = 1e-12;
            std::vector<double> x(25, 0.0);
            const SolveReport rep = cg_solve(s, b, x, opt);
            CHECK(rep.converged);
            CHECK(rep.breakdown == false);
            CHECK(rep.iterations > 0);
            for (int i = 0; i < 25; ++i) CHECK(x[i] == doctest::Approx(exact[i]).epsilon(1e-8));
            // Residual contract: reported true residual satisfies the
            // relative tolerance against ||b||.
            double bn = 0.0;
            for (double v : b) bn += v * v;
            CHECK(rep.residual <= 1e-12 * std::sqrt(bn) * 10.0);
        }
    }
}

TEST_CASE("conjugate gradient solves a diagonal system in one iteration") {
    TripletBuilder tb(4, 4);
    for (int i = 0; i < 4; ++i) tb.add(i, i, 2.0 + i);
    const SparseMatrix a = tb.build();
    const std::vector<double> b{1.0, 2.0, 3.0, 4.0};
    std::vector<double> x(4, 0.0);
    CgOptions opt;  // Jacobi preconditioner makes the system exactly solved in 1 step
    const SolveReport rep = cg_solve(a, b, x, opt);
    CHECK(rep.converged);
    CHECK(rep.iterations <= 2);
    for (int i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(b[i] / (2.0 + i)));
}

TEST_CASE("conjugate gradient respects warm starts") {
    oracle::Dense d(0);
    SparseMatrix s;
    std::vector<double> b;
    random_spd(12, 5u, d, s, b);
    const std::vector<double> exact = oracle::lu_solve(d, b);
    std::vector<double> x = exact;  // exact initial guess
    const SolveReport rep = cg_solve(s, b, x, {});
    CHECK(rep.converged);
    CHECK(rep.iterations <= 1);
}

TEST_CASE("iteration cap reports non-convergence without corrupting x's size") {
    oracle::Dense d(0);
    SparseMatrix s;
    std::vector<double> b;
    random_spd(30, 21u, d, s, b);
    // Make it ill-conditioned enough that 1 iteration cannot converge.
    CgOptions opt;
    opt.max_iter = 1;
    opt.tol = 1e-14;
    opt.jacobi = false;
    std::vector<double> x(30, 0.0);
    const SolveReport rep = cg_solve(s, b, x, opt);
    CHECK_FALSE(rep.converged);
    CHECK(rep.iterations == 1);
    CHECK(x.size() == 30);
}

TEST_CASE("residual history is tracked when requested") {
    oracle::Dense d(0);
    SparseMatrix s;
    std::vector<double> b;
    random_spd(16, 3u, d, s, b);
    CgOptions opt;
    opt.track_residuals = true;
    std::vector<double> x(16, 0.0);
    const SolveReport rep = cg_solve(s, b, x, opt);
    CHECK(rep.converged);
    CHECK(rep.residual_history.size() >= static_cast<std::size_t>(rep.iterations));
    // Monotone overall decay from first to last entry.
    CHECK(rep.residual_history.back() < rep.residual_history.front());
}
