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
#include "spdekit/darcy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spdekit/fvm.hpp"

namespace spdekit {

std::vector<double> make_streak_permeability(const Mesh& mesh, double k_base,
                                             const StreakSpec& streaks) {
    if (!(k_base > 0.0)) throw std::invalid_argument("make_streak_permeability: k_base must be > 0");
    if (!(streaks.contrast > 0.0))
        throw std::invalid_argument("make_streak_permeability: contrast must be > 0");

    std::vector<double> k(static_cast<std::size_t>(mesh.n_cells()), k_base);
    // Closed bands with a relative tolerance so cell centers that land exactly
    // on a band edge are included regardless of rounding in ny * center_frac.
    const double half = 0.5 * streaks.height_frac * mesh.L2;
    const double pad = half * (1.0 + 1e-12) + 1e-14 * mesh.L2;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const double y = mesh.cells[c].center.y;
        for (double frac : streaks.centers) {
            if (std::abs(y - frac * mesh.L2) <= pad) {
                k[c] = k_base * streaks.contrast;
                break;
            }
        }
    }
    return k;
}

namespace {

std::array<BoundaryCondition, 4> pressure_bcs(double p_in, double p_out) {
    std::array<BoundaryCondition, 4> bc{};
    bc[static_cast<int>(Side::left)] = {BcKind::dirichlet, p_in, 0.0};
    bc[static_cast<int>(Side::right)] = {BcKind::dirichlet, p_out, 0.0};
    // bottom / top stay no-flow
    return bc;
}

double half_distance(const Mesh& mesh, const Face& f) {
    return std::abs(f.normal.x) > 0.5 ? 0.5 * mesh.dx : 0.5 * mesh.dy;
}

}  // namespace

PressureSolution solve_pressure(const Mesh& mesh, std::span<const double> mobility,
                                double p_in, double p_out, const CgOptions& cg) {
    TpfaOperator tpfa = assemble_tpfa(mesh, mobility, pressure_bcs(p_in, p_out));
    SparseMatrix A = tpfa.dirichlet_matrix();

    PressureSolution sol;
    sol.p.resize(static_cast<std::size_t>(mesh.n_cells()));
    // Linear profile between the two driven sides as the initial guess.
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const double s = mesh.cells[c].center.x / mesh.L1;
        sol.p[static_cast<std::size_t>(c)] = p_in + (p_out - p_in) * s;
    }
    sol.report = cg_solve(A, tpfa.dirichlet_rhs, sol.p, cg);
    return sol;
}

std::vector<double> reconstruct_velocity(const Mesh& mesh, std::span<const double> mobility,
                                         std::span<const double> p, double p_in, double p_out) {
    if (mobility.size() != static_cast<std::size_t>(mesh.n_cells()) ||
        p.size() != static_cast<std::size_t>(mesh.n_cells()))
        throw std::invalid_argument("reconstruct_velocity: field size mismatch");

    std::vector<double> v(mesh.faces.size(), 0.0);
    for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        const Face& f = mesh.faces[fi];
        const double d = half_distance(mesh, f);
        if (!f.boundary()) {
            const double trans =
                f.length / (d / mobility[static_cast<std::size_t>(f.a)] +
                            d / mobility[static_cast<std::size_t>(f.b)]);
            v[fi] = trans * (p[static_cast<std::size_t>(f.a)] - p[static_cast<std::size_t>(f.b)]) /
                    f.length;
            continue;
        }
        double g = 0.0;
        if (f.side == Side::left) g = p_in;
        else if (f.side == Side::right) g = p_out;
        else continue;  // no-flow top and bottom
        const double trans = f.length * mobility[static_cast<std::size_t>(f.a)] / d;
        v[fi] = trans * (p[static_cast<std::size_t>(f.a)] - g) / f.length;
    }
    return v;
}

double cell_divergence(const Mesh& mesh, std::span<const double> face_velocity, int cell) {
    const Cell& c = mesh.cells[static_cast<std::size_t>(cell)];
    double out = 0.0;
    for (int fi : c.faces) {
        const Face& f = mesh.faces[static_cast<std::size_t>(fi)];
        out += f.length * face_velocity[static_cast<std::size_t>(fi)] * mesh.outward_sign(f, cell);
    }
    return out;
}

double max_face_speed(const Mesh& mesh, std::span<const double> face_velocity) {
    (void)mesh;
    double m = 0.0;
    for (double v : face_velocity) m = std::max(m, std::abs(v));
    return m;
}

double mean_abs_flux(const Mesh& mesh, std::span<const double> face_velocity) {
    if (face_velocity.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t fi = 0; fi < face_velocity.size(); ++fi)
        s += std::abs(face_velocity[fi]) * mesh.faces[fi].length;
    return s / static_cast<double>(face_velocity.size());
}

BoundaryFlow boundary_flow(const Mesh& mesh, std::span<const double> face_velocity) {
    BoundaryFlow flow;
    for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        const Face& f = mesh.faces[fi];
        if (!f.boundary()) continue;
        const double flux = f.length * face_velocity[fi];  // along outward normal
        if (f.side == Side::left) flow.inflow += -flux;
        else if (f.side == Side::right) flow.outflow += flux;
    }
    return flow;
}

DarcyField solve_darcy(const Mesh& mesh, double k_base, const StreakSpec& streaks,
                       double viscosity, double p_in, double p_out, const CgOptions& cg) {
    if (!(viscosity > 0.0)) throw std::invalid_argument("solve_darcy: viscosity must be > 0");

    DarcyField field;
    field.k = make_streak_permeability(mesh, k_base, streaks);
    std::vector<double> mobility(field.k.size());
    for (std::size_t i = 0; i < field.k.size(); ++i) mobility[i] = field.k[i] / viscosity;

    PressureSolution sol = solve_pressure(mesh, mobility, p_in, p_out, cg);
    field.p = std::move(sol.p);
    field.pressure_report = sol.report;
    field.face_velocity = reconstruct_velocity(mesh, mobility, field.p, p_in, p_out);
    return field;
}

}  // namespace spdekit
