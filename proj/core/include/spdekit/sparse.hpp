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
#pragma once

#include <span>
#include <vector>

namespace spdekit {

// Compressed sparse row matrix. Column indices within a row are sorted and
// unique once built.
struct SparseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<int> row_ptr;   // rows+1 offsets
    std::vector<int> col_idx;
    std::vector<double> vals;

    double at(int i, int j) const;          // 0.0 for structural zeros
    std::vector<double> diagonal() const;
    bool is_symmetric(double tol) const;
    std::size_t nnz() const { return vals.size(); }
};

// Accumulates (i, j, value) triplets; duplicates are summed on build().
class TripletBuilder {
  public:
    TripletBuilder(int rows, int cols) : rows_(rows), cols_(cols) {}
    void add(int i, int j, double v);
    SparseMatrix build() const;

  private:
    int rows_, cols_;
    struct Entry { int i, j; double v; };
    std::vector<Entry> entries_;
};

// y = A x
void spmv(const SparseMatrix& A, std::span<const double> x, std::span<double> y);
std::vector<double> spmv(const SparseMatrix& A, const std::vector<double>& x);

// A + alpha * B (same shape; sparsity patterns may differ)
SparseMatrix add_scaled(const SparseMatrix& A, double alpha, const SparseMatrix& B);

struct SolveReport {
    int iterations = 0;
    double residual = 0.0;          // true residual norm ||Ax - b||_2 on exit
    bool converged = false;
    bool breakdown = false;         // non-SPD direction encountered
    std::vector<double> residual_history;  // filled only when requested
};

struct CgOptions {
    double tol = 1e-10;     // relative: stop when ||r||_2 <= tol * ||b||_2
    int max_iter = -1;      // defaults to 10 * n
    bool jacobi = true;     // diagonal preconditioning
    bool track_residuals = false;
};

// Conjugate gradients for symmetric positive definite A. `x` holds the
// initial guess on entry and the solution on exit. Never throws on
// non-convergence; the caller inspects the report.
SolveReport cg_solve(const SparseMatrix& A, std::span<const double> b, std::span<double> x,
                     const CgOptions& opts = {});

}  // namespace spdekit
