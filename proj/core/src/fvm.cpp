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
#include "spdekit/fvm.hpp"

#include <cmath>
#include <stdexcept>

namespace spdekit {

namespace {

// Half distance from a cell center to one of its faces, along the normal.
double half_distance(const Mesh& m, const Face& f) {
    return (f.normal.x != 0.0) ? 0.5 * m.dx : 0.5 * m.dy;
}

}  // namespace

SparseMatrix TpfaOperator::dirichlet_matrix() const {
    TripletBuilder tb(op.K.rows, op.K.cols);
    for (int i = 0; i < op.K.rows; ++i)
        for (int k = op.K.row_ptr[i]; k < op.K.row_ptr[i + 1]; ++k)
            tb.add(i, op.K.col_idx[k], op.K.vals[k]);
    for (int i = 0; i < op.K.rows; ++i)
        if (dirichlet_diag[i] != 0.0) tb.add(i, i, dirichlet_diag[i]);
    return tb.build();
}

TpfaOperator assemble_tpfa(const Mesh& mesh, std::span<const double> coeff,
                           const std::array<BoundaryCondition, 4>& bc) {
    const int n = mesh.n_cells();
    if (static_cast<int>(coeff.size()) != n)
        throw std::invalid_argument("assemble_tpfa: coefficient size != cell count");
    for (double c : coeff)
        if (!(c > 0.0)) throw std::invalid_argument("assemble_tpfa: coefficients must be positive");

    TpfaOperator out;
    out.dirichlet_diag.assign(n, 0.0);
    out.dirichlet_rhs.assign(n, 0.0);

    TripletBuilder kb(n, n);
    for (const Face& f : mesh.faces) {
        const double d = half_distance(mesh, f);
        if (!f.boundary()) {
            // Harmonic mean across the face: series resistance of both halves.
            const double T = f.length / (d / coeff[f.a] + d / coeff[f.b]);
            kb.add(f.a, f.a, T);
            kb.add(f.b, f.b, T);
            kb.add(f.a, f.b, -T);
            kb.add(f.b, f.a, -T);
        } else if (bc[static_cast<int>(f.side)].kind == BcKind::dirichlet) {
            const double T = f.length * coeff[f.a] / d;
            out.dirichlet_diag[f.a] += T;
            out.dirichlet_rhs[f.a] += T * bc[static_cast<int>(f.side)].value;
        }
        // Homogeneous Neumann boundary faces: no flux, no entry.
    }
    out.op.K = kb.build();

    TripletBuilder mb(n, n);
    for (int c = 0; c < n; ++c) mb.add(c, c, mesh.cells[c].area);
    out.op.M = mb.build();
    out.op.h = mesh.h;
    out.op.n = n;
    return out;
}

TpfaOperator assemble_tpfa(const Mesh& mesh, double coeff,
                           const std::array<BoundaryCondition, 4>& bc) {
    std::vector<double> per_cell(mesh.n_cells(), coeff);
    return assemble_tpfa(mesh, per_cell, bc);
}

UpwindAdvection upwind_advection(const Mesh& mesh, std::span<const double> face_velocity,
                                 const std::array<BoundaryCondition, 4>& bc) {
    if (face_velocity.size() != mesh.faces.size())
        throw std::invalid_argument("upwind_advection: one velocity per face required");

    const int n = mesh.n_cells();
    UpwindAdvection adv;
    adv.inflow_rhs.assign(n, 0.0);

    TripletBuilder ub(n, n);
    for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        const Face& f = mesh.faces[fi];
        const double v = face_velocity[fi];  // along the stored normal
        if (!f.boundary()) {
            const double vin = f.length * std::max(v, 0.0);   // donor a
            const double vout = f.length * std::min(v, 0.0);  // donor b
            ub.add(f.a, f.a, vin);
            ub.add(f.a, f.b, vout);
            ub.add(f.b, f.a, -vin);
            ub.add(f.b, f.b, -vout);
        } else if (v > 0.0) {
            // Outflow across the boundary, donor is the interior cell.
            ub.add(f.a, f.a, f.length * v);
        } else if (v < 0.0) {
            // Inflow: the donor value is the Dirichlet trace (0 elsewhere).
            const BoundaryCondition& side_bc = bc[static_cast<int>(f.side)];
            const double g = side_bc.kind == BcKind::dirichlet ? side_bc.value : 0.0;
            adv.inflow_rhs[f.a] += f.length * (-v) * g;
        }
    }
    adv.U = ub.build();
    return adv;
}

double nonlinear_reaction(double x) { return -x / (std::abs(x) + 1.0); }

void nonlinear_reaction(std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = nonlinear_reaction(x[i]);
}

}  // namespace spdekit
