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
#include <span>
#include <vector>

#include "spdekit/fem.hpp"
#include "spdekit/mesh.hpp"
#include "spdekit/sparse.hpp"

namespace spdekit {

// Two-point flux approximation of -div(k grad .) on the cell grid.
//
// `op.K` holds only the interior (all-Neumann) fluxes with harmonic-mean
// transmissibilities; Dirichlet faces are returned separately so callers can
// either fold them into the matrix (steady solves) or keep the operator
// purely Neumann and treat the boundary flux explicitly:
//   flux into cell c = dirichlet_rhs[c] - dirichlet_diag[c] * X_c.
struct TpfaOperator {
    DiscreteOperator op;                 // M = diag(cell areas), K = interior TPFA
    std::vector<double> dirichlet_diag;  // per-cell sum of boundary transmissibilities
    std::vector<double> dirichlet_rhs;   // per-cell sum of T_b * g

    // K + diag(dirichlet_diag): the matrix for steady Dirichlet problems.
    SparseMatrix dirichlet_matrix() const;
};

// `coeff` is the per-cell diffusion coefficient (or permeability / viscosity).
// Throws if any coefficient is non-positive or the size is wrong.
TpfaOperator assemble_tpfa(const Mesh& mesh, std::span<const double> coeff,
                           const std::array<BoundaryCondition, 4>& bc);

// Convenience overload for a constant coefficient.
TpfaOperator assemble_tpfa(const Mesh& mesh, double coeff,
                           const std::array<BoundaryCondition, 4>& bc);

// First-order donor-cell upwinding of div(q X) for a face-normal velocity
// field (velocity component along each face's stored normal). Boundary
// inflow through a Dirichlet side carries that side's trace value; inflow
// through other sides carries 0.
struct UpwindAdvection {
    SparseMatrix U;                  // contribution to dX/dt is -(U X)_c / area_c
    std::vector<double> inflow_rhs;  // + inflow_rhs[c] / area_c (already * g)
};

UpwindAdvection upwind_advection(const Mesh& mesh, std::span<const double> face_velocity,
                                 const std::array<BoundaryCondition, 4>& bc);

// Pointwise reaction -x / (|x| + 1); globally Lipschitz with constant 1.
double nonlinear_reaction(double x);
void nonlinear_reaction(std::span<const double> x, std::span<double> out);

}  // namespace spdekit
