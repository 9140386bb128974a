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
#include "spdekit/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spdekit {

double DiffusionTensor::min_eigenvalue() const {
    const double mean = 0.5 * (dxx + dyy);
    const double half_diff = 0.5 * (dxx - dyy);
    return mean - std::sqrt(half_diff * half_diff + dxy * dxy);
}

bool DiscreteOperator::is_dirichlet(int dof) const {
    return std::binary_search(dirichlet_dofs.begin(), dirichlet_dofs.end(), dof);
}

namespace {

// Edge pairs per side for the boundary terms: (vertex, next vertex) walks.
void for_each_boundary_edge(const Mesh& m, Side s,
                            const std::function<void(int, int, double)>& fn) {
    switch (s) {
        case Side::left:
            for (int j = 0; j < m.ny; ++j) fn(m.vertex_index(0, j), m.vertex_index(0, j + 1), m.dy);
            break;
        case Side::right:
            for (int j = 0; j < m.ny; ++j) fn(m.vertex_index(m.nx, j), m.vertex_index(m.nx, j + 1), m.dy);
            break;
        case Side::bottom:
            for (int i = 0; i < m.nx; ++i) fn(m.vertex_index(i, 0), m.vertex_index(i + 1, 0), m.dx);
            break;
        case Side::top:
            for (int i = 0; i < m.nx; ++i) fn(m.vertex_index(i, m.ny), m.vertex_index(i + 1, m.ny), m.dx);
            break;
        default:
            break;
    }
}

}  // namespace

DiscreteOperator assemble(const Mesh& mesh, const OperatorSpec& spec) {
    if (spec.d00 > 0.0)
        throw std::invalid_argument("assemble: d00 must be <= 0 (dissipative zeroth order)");
    if (!spec.per_element.empty() && spec.per_element.size() != mesh.triangles.size())
        throw std::invalid_argument("assemble: per_element tensor count != triangle count");

    auto tensor_for = [&](std::size_t t) -> const DiffusionTensor& {
        return spec.per_element.empty() ? spec.D : spec.per_element[t];
    };
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (!(tensor_for(t).min_eigenvalue() > 0.0))
            throw std::invalid_argument("assemble: diffusion tensor is not elliptic");
        if (spec.per_element.empty()) break;
    }

    const int n = mesh.n_vertices();
    TripletBuilder mb(n, n), kb(n, n);

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2& p0 = mesh.vertices[tri[0]];
        const Vec2& p1 = mesh.vertices[tri[1]];
        const Vec2& p2 = mesh.vertices[tri[2]];
        const double area = 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));

        // Hat-function gradients: grad phi_a = (b_a, c_a) / (2 area) with the
        // classic cyclic edge coefficients.
        const double bcoef[3] = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
        const double ccoef[3] = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
        const DiffusionTensor& D = tensor_for(t);

        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                const double k_ab = (bcoef[a] * (D.dxx * bcoef[b] + D.dxy * ccoef[b]) +
                                     ccoef[a] * (D.dxy * bcoef[b] + D.dyy * ccoef[b])) /
                                    (4.0 * area);
                kb.add(tri[a], tri[b], k_ab);
                const double m_ab = (a == b ? 2.0 : 1.0) * area / 12.0;
                mb.add(tri[a], tri[b], m_ab);
            }
        }
    }

    // Robin terms: sigma * integral(u v) over the tagged sides.
    for (int si = 0; si < 4; ++si) {
        const BoundaryCondition& bc = spec.bc[si];
        if (bc.kind != BcKind::robin || bc.sigma == 0.0) continue;
        for_each_boundary_edge(mesh, static_cast<Side>(si), [&](int v0, int v1, double len) {
            const double w = bc.sigma * len / 6.0;
            kb.add(v0, v0, 2.0 * w);
            kb.add(v1, v1, 2.0 * w);
            kb.add(v0, v1, w);
            kb.add(v1, v0, w);
        });
    }

    DiscreteOperator op;
    op.M = mb.build();
    op.K = kb.build();
    op.d00 = spec.d00;
    op.h = mesh.h;
    op.n = n;

    // Dirichlet dofs are recorded but not eliminated here; the step matrix
    // does the symmetric elimination.
    std::vector<double> value_of(n, 0.0);
    std::vector<char> tagged(n, 0);
    for (int si = 0; si < 4; ++si) {
        const BoundaryCondition& bc = spec.bc[si];
        if (bc.kind != BcKind::dirichlet) continue;
        for_each_boundary_edge(mesh, static_cast<Side>(si), [&](int v0, int v1, double) {
            tagged[v0] = tagged[v1] = 1;
            value_of[v0] = value_of[v1] = bc.value;
        });
    }
    for (int v = 0; v < n; ++v) {
        if (tagged[v]) {
            op.dirichlet_dofs.push_back(v);
            op.dirichlet_values.push_back(value_of[v]);
        }
    }
    return op;
}

std::vector<double> project_nodal(const DiscreteOperator& op, std::span<const double> samples) {
    if (static_cast<int>(samples.size()) != op.n)
        throw std::invalid_argument("project_nodal: size mismatch");
    return {samples.begin(), samples.end()};
}

std::vector<double> project_l2(const DiscreteOperator& op, const Mesh& mesh,
                               const std::function<double(double, double)>& f,
                               const CgOptions& cg) {
    // Degree-4 triangle quadrature (6 points, two orbits).
    static const double wa = 0.223381589678011, la = 0.445948490915965;
    static const double wb = 0.109951743655322, lb = 0.091576213509771;
    static const double pts[6][3] = {
        {1.0 - 2.0 * la, la, la}, {la, 1.0 - 2.0 * la, la}, {la, la, 1.0 - 2.0 * la},
        {1.0 - 2.0 * lb, lb, lb}, {lb, 1.0 - 2.0 * lb, lb}, {lb, lb, 1.0 - 2.0 * lb},
    };
    static const double wts[6] = {wa, wa, wa, wb, wb, wb};

    std::vector<double> b(op.n, 0.0);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2& p0 = mesh.vertices[tri[0]];
        const Vec2& p1 = mesh.vertices[tri[1]];
        const Vec2& p2 = mesh.vertices[tri[2]];
        const double area = triangle_area(mesh, static_cast<int>(t));
        for (int q = 0; q < 6; ++q) {
            const double x = pts[q][0] * p0.x + pts[q][1] * p1.x + pts[q][2] * p2.x;
            const double y = pts[q][0] * p0.y + pts[q][1] * p1.y + pts[q][2] * p2.y;
            const double fw = f(x, y) * wts[q] * area;
            for (int a = 0; a < 3; ++a) b[tri[a]] += fw * pts[q][a];
        }
    }

    std::vector<double> x(op.n, 0.0);
    const SolveReport rep = cg_solve(op.M, b, x, cg);
    if (!rep.converged) throw std::runtime_error("project_l2: mass solve did not converge");
    return x;
}

ImplicitStep implicit_step_matrix(const DiscreteOperator& op, double dt, const CgOptions& cg) {
    if (!(dt > 0.0)) throw std::invalid_argument("implicit_step_matrix: dt must be positive");

    ImplicitStep step;
    step.op = &op;
    step.dt = dt;
    step.cg = cg;
    step.lift.assign(op.n, 0.0);

    const double mass_scale = 1.0 + dt * std::abs(op.d00);

    std::vector<double> dirichlet_value_of(op.n, 0.0);
    std::vector<char> dir(op.n, 0);
    for (std::size_t k = 0; k < op.dirichlet_dofs.size(); ++k) {
        dir[op.dirichlet_dofs[k]] = 1;
        dirichlet_value_of[op.dirichlet_dofs[k]] = op.dirichlet_values[k];
    }

    TripletBuilder tb(op.n, op.n);
    auto add_entry = [&](int i, int j, double v) {
        if (dir[i]) return;                       // row replaced by identity
        if (dir[j]) {                             // column lifted to the rhs
            step.lift[i] += v * dirichlet_value_of[j];
            return;
        }
        tb.add(i, j, v);
    };
    for (int i = 0; i < op.M.rows; ++i)
        for (int k = op.M.row_ptr[i]; k < op.M.row_ptr[i + 1]; ++k)
            add_entry(i, op.M.col_idx[k], mass_scale * op.M.vals[k]);
    for (int i = 0; i < op.K.rows; ++i)
        for (int k = op.K.row_ptr[i]; k < op.K.row_ptr[i + 1]; ++k)
            add_entry(i, op.K.col_idx[k], dt * op.K.vals[k]);
    for (int d : op.dirichlet_dofs) tb.add(d, d, 1.0);

    step.A = tb.build();
    return step;
}

SolveReport ImplicitStep::apply(std::span<const double> b, std::span<double> x,
                                std::vector<double>& rhs) const {
    rhs.resize(op->n);
    spmv(op->M, b, std::span<double>(rhs));
    for (int i = 0; i < op->n; ++i) rhs[i] -= lift[i];
    for (std::size_t k = 0; k < op->dirichlet_dofs.size(); ++k)
        rhs[op->dirichlet_dofs[k]] = op->dirichlet_values[k];
    return cg_solve(A, rhs, x, cg);
}

double discrete_l2_norm(const DiscreteOperator& op, std::span<const double> v) {
    std::vector<double> mv(op.n);
    spmv(op.M, v, std::span<double>(mv));
    double s = 0.0;
    for (int i = 0; i < op.n; ++i) s += v[i] * mv[i];
    return std::sqrt(std::max(0.0, s));
}

}  // namespace spdekit
