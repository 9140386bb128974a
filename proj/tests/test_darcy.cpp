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
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "spdekit/darcy.hpp"
#include "spdekit/fvm.hpp"
#include "spdekit/mesh.hpp"

using namespace spdekit;

TEST_CASE("streak permeability marks exactly the banded cell rows") {
    // ny = 20: bands [0.2,0.3], [0.45,0.55], [0.7,0.8] each catch the two cell
    // rows whose centers fall inside (rows 4-5, 9-10, 14-15).
    Mesh m = build_fv_grid(1.0, 1.0, 3, 20);
    StreakSpec st;  // defaults: height 0.1, centers {0.25, 0.5, 0.75}, contrast 100
    auto k = make_streak_permeability(m, 2.0, st);
    REQUIRE(k.size() == 60);

    int n_streak = 0;
    for (int c = 0; c < m.n_cells(); ++c) {
        const int row = c / 3;  // cells are laid out row-major
        const bool banded = (row == 4 || row == 5 || row == 9 || row == 10 || row == 14 ||
                             row == 15);
        CHECK(k[c] == (banded ? 200.0 : 2.0));
        n_streak += k[c] == 200.0;
    }
    CHECK(n_streak == 18);

    SUBCASE("cell centers landing exactly on a band edge are included") {
        // ny = 10: centers 0.45 and 0.55 sit on the edges of the middle band.
        Mesh m10 = build_fv_grid(1.0, 1.0, 1, 10);
        auto k10 = make_streak_permeability(m10, 1.0, st);
        CHECK(k10[2] == 100.0);  // y = 0.25, middle of the first band
        CHECK(k10[4] == 100.0);  // y = 0.45, lower edge of the middle band
        CHECK(k10[5] == 100.0);  // y = 0.55, upper edge
        CHECK(k10[7] == 100.0);  // y = 0.75
        CHECK(k10[0] == 1.0);
        CHECK(k10[3] == 1.0);
    }

    SUBCASE("invalid parameters are rejected") {
        CHECK_THROWS_AS((void)make_streak_permeability(m, 0.0, st), std::invalid_argument);
        StreakSpec bad = st;
        bad.contrast = -1.0;
        CHECK_THROWS_AS((void)make_streak_permeability(m, 1.0, bad), std::invalid_argument);
    }
}

TEST_CASE("uniform medium gives the exact linear pressure profile") {
    // k = 2, mu = 0.5 -> mobility 4; p: 3 -> 1 over L1 = 1. The discrete
    // scheme is exact for linear pressure, so every check is at solver
    // tolerance, not discretization error.
    Mesh m = build_fv_grid(1.0, 1.0, 8, 5);
    StreakSpec uniform;
    uniform.contrast = 1.0;
    DarcyField f = solve_darcy(m, 2.0, uniform, 0.5, 3.0, 1.0);
    REQUIRE(f.pressure_report.converged);

    const double G = (1.0 - 3.0) / 1.0;  // pressure gradient
    for (int c = 0; c < m.n_cells(); ++c) {
        CHECK(f.p[c] == doctest::Approx(3.0 + G * m.cells[c].center.x).epsilon(1e-8));
        CHECK(std::abs(cell_divergence(m, f.face_velocity, c)) <= 1e-8);
    }

    // Uniform horizontal speed mobility * |G| = 8 on every vertical face,
    // zero on horizontal ones.
    for (std::size_t fi = 0; fi < m.faces.size(); ++fi) {
        const Face& face = m.faces[fi];
        if (face.normal.x != 0.0)
            CHECK(std::abs(f.face_velocity[fi]) == doctest::Approx(8.0).epsilon(1e-8));
        else
            CHECK(std::abs(f.face_velocity[fi]) <= 1e-8);
    }

    BoundaryFlow bf = boundary_flow(m, f.face_velocity);
    CHECK(bf.inflow == doctest::Approx(8.0).epsilon(1e-10));
    CHECK(bf.outflow == doctest::Approx(8.0).epsilon(1e-10));
    CHECK(max_face_speed(m, f.face_velocity) == doctest::Approx(8.0).epsilon(1e-8));
    CHECK(mean_abs_flux(m, f.face_velocity) > 0.0);
}

TEST_CASE("layered streak medium matches the parallel-conductor analytic flux") {
    // Horizontal bands keep the flow strictly horizontal, so each cell row is
    // an independent conductor: total flux = sum_rows (k_row / mu) dy dp / L1.
    Mesh m = build_fv_grid(1.0, 1.0, 4, 20);
    StreakSpec st;
    DarcyField f = solve_darcy(m, 1.0, st, 1.0, 1.0, 0.0);
    REQUIRE(f.pressure_report.converged);

    // 6 rows at k = 100 and 14 rows at k = 1, dy = 0.05, unit pressure drop.
    const double expected = 0.05 * (14.0 * 1.0 + 6.0 * 100.0);
    BoundaryFlow bf = boundary_flow(m, f.face_velocity);
    CHECK(bf.inflow == doctest::Approx(expected).epsilon(1e-8));
    CHECK(bf.outflow == doctest::Approx(expected).epsilon(1e-8));

    // The pressure stays linear in x in every row despite the contrast.
    for (int c = 0; c < m.n_cells(); ++c) {
        CHECK(f.p[c] == doctest::Approx(1.0 - m.cells[c].center.x).epsilon(1e-7));
        CHECK(std::abs(cell_divergence(m, f.face_velocity, c)) <= 1e-8);
    }
    CHECK(max_face_speed(m, f.face_velocity) == doctest::Approx(100.0).epsilon(1e-7));
}

TEST_CASE("two-cell series of mobilities matches the resistor network") {
    // mobilities {5, 1} on a 2x1 grid, p: 10 -> 0. Transmissibilities:
    // left boundary 20, interior 1/(0.05 + 0.25), right boundary 4, so the
    // series resistance is 0.05 + 0.3 + 0.25 = 0.6 and q = 10 / 0.6.
    Mesh m = build_fv_grid(1.0, 1.0, 2, 1);
    std::vector<double> mobility = {5.0, 1.0};
    PressureSolution sol = solve_pressure(m, mobility, 10.0, 0.0);
    REQUIRE(sol.report.converged);

    const double q = 10.0 / 0.6;
    CHECK(sol.p[0] == doctest::Approx(10.0 - q * 0.05).epsilon(1e-10));
    CHECK(sol.p[1] == doctest::Approx(q * 0.25).epsilon(1e-10));

    auto v = reconstruct_velocity(m, mobility, sol.p, 10.0, 0.0);
    BoundaryFlow bf = boundary_flow(m, v);
    CHECK(bf.inflow == doctest::Approx(q).epsilon(1e-10));
    CHECK(bf.outflow == doctest::Approx(q).epsilon(1e-10));
    for (int c = 0; c < 2; ++c) CHECK(std::abs(cell_divergence(m, v, c)) <= 1e-9);

    SUBCASE("velocity reconstruction validates input sizes") {
        std::vector<double> short_p = {1.0};
        CHECK_THROWS_AS((void)reconstruct_velocity(m, mobility, short_p, 10.0, 0.0),
                        std::invalid_argument);
    }
}

TEST_CASE("checkerboard contrast keeps the discrete balance laws") {
    // A worst-case 100:1 checkerboard: no analytic solution, but mass
    // conservation and inflow/outflow balance must hold to solver tolerance.
    Mesh m = build_fv_grid(1.0, 1.0, 6, 6);
    std::vector<double> mobility(36);
    for (int c = 0; c < 36; ++c) {
        const int ix = c % 6, iy = c / 6;
        mobility[c] = ((ix + iy) % 2 == 0) ? 100.0 : 1.0;
    }
    CgOptions cg;
    cg.tol = 1e-12;
    PressureSolution sol = solve_pressure(m, mobility, 2.0, -1.0, cg);
    REQUIRE(sol.report.converged);
    auto v = reconstruct_velocity(m, mobility, sol.p, 2.0, -1.0);

    const double scale = mean_abs_flux(m, v);
    REQUIRE(scale > 0.0);
    for (int c = 0; c < 36; ++c)
        CHECK(std::abs(cell_divergence(m, v, c)) <= 1e-8 * scale);

    BoundaryFlow bf = boundary_flow(m, v);
    CHECK(bf.inflow == doctest::Approx(bf.outflow).epsilon(1e-9));

    // Pressure stays inside the boundary-data bounds (discrete max principle).
    for (double p : sol.p) {
        CHECK(p <= 2.0 + 1e-9);
        CHECK(p >= -1.0 - 1e-9);
    }

    SUBCASE("pressure solve agrees with a dense factorization") {
        // Rebuild the TPFA system the library solves and cross-check with LU.
        std::array<BoundaryCondition, 4> bc{};
        bc[static_cast<int>(Side::left)] = {BcKind::dirichlet, 2.0, 0.0};
        bc[static_cast<int>(Side::right)] = {BcKind::dirichlet, -1.0, 0.0};
        TpfaOperator tp = assemble_tpfa(m, mobility, bc);
        oracle::Dense A = oracle::to_dense(tp.dirichlet_matrix());
        std::vector<double> x = oracle::lu_solve(A, tp.dirichlet_rhs);
        for (int c = 0; c < 36; ++c) CHECK(sol.p[c] == doctest::Approx(x[c]).epsilon(1e-8));
    }
}
