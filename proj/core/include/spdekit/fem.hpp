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

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "spdekit/mesh.hpp"
#include "spdekit/sparse.hpp"

namespace spdekit {

// Constant symmetric 2x2 diffusion tensor.
struct DiffusionTensor {
    double dxx = 1.0, dxy = 0.0, dyy = 1.0;

    double min_eigenvalue() const;
    static DiffusionTensor isotropic(double d) { return {d, 0.0, d}; }
};

enum class BcKind { neumann, dirichlet, robin };

struct BoundaryCondition {
    BcKind kind = BcKind::neumann;
    double value = 0.0;   // Dirichlet trace value
    double sigma = 0.0;   // Robin coefficient (sigma * u contribution)
};

// Elliptic operator A = div(D grad .) + d00 * I on the rectangle, with one
// condition per side, indexed by Side. d00 <= 0 (dissipative zeroth order).
struct OperatorSpec {
    DiffusionTensor D;
    std::vector<DiffusionTensor> per_element;  // optional, size = #triangles
    double d00 = 0.0;
    std::array<BoundaryCondition, 4> bc{};     // [left, right, bottom, top]

    BoundaryCondition& side(Side s) { return bc[static_cast<int>(s)]; }
    const BoundaryCondition& side(Side s) const { return bc[static_cast<int>(s)]; }
};

// Space discretization shared by both views: mass matrix M, stiffness K
// (SPD part representing -A without the zeroth-order term), Dirichlet dof
// bookkeeping. For the FV view M is the diagonal of cell areas.
struct DiscreteOperator {
    SparseMatrix M;
    SparseMatrix K;
    double d00 = 0.0;
    std::vector<int> dirichlet_dofs;      // strictly increasing
    std::vector<double> dirichlet_values; // parallel to dirichlet_dofs
    double h = 0.0;
    int n = 0;

    bool is_dirichlet(int dof) const;
};

// P1 assembly with exact integration of the element integrals.
// Throws std::invalid_argument if any diffusion tensor fails ellipticity
// (min eigenvalue <= 0) or d00 > 0.
DiscreteOperator assemble(const Mesh& mesh, const OperatorSpec& spec);

// P_h in nodal form: pointwise samples at the dofs already represent the
// interpolant, so this is the identity on the value vector.
std::vector<double> project_nodal(const DiscreteOperator& op, std::span<const double> samples);

// Exact L2 projection of a continuous field: solves M x = b with
// b_i = integral of f * phi_i (per-triangle quadrature, degree 4).
std::vector<double> project_l2(const DiscreteOperator& op, const Mesh& mesh,
                               const std::function<double(double, double)>& f,
                               const CgOptions& cg = {});

// One backward-Euler application: solves (M + dt K + dt |d00| M) x = M b,
// with Dirichlet rows/columns eliminated symmetrically and the boundary
// values lifted to the right-hand side.
struct ImplicitStep {
    SparseMatrix A;                  // the (SPD) step matrix after elimination
    const DiscreteOperator* op = nullptr;
    double dt = 0.0;
    std::vector<double> lift;        // rhs correction from Dirichlet columns
    CgOptions cg;

    // x: initial guess in / solution out. rhs_scratch avoids reallocation in
    // hot loops; pass the same vector across calls.
    SolveReport apply(std::span<const double> b, std::span<double> x,
                      std::vector<double>& rhs_scratch) const;
};

ImplicitStep implicit_step_matrix(const DiscreteOperator& op, double dt, const CgOptions& cg = {});

// sqrt(v' M v): the discrete L2 norm matching each view's mass matrix.
double discrete_l2_norm(const DiscreteOperator& op, std::span<const double> v);

}  // namespace spdekit
