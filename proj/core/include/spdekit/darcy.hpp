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

#include "spdekit/mesh.hpp"
#include "spdekit/sparse.hpp"

namespace spdekit {

// Horizontal high-permeability bands spanning the full x range.
struct StreakSpec {
    double height_frac = 0.1;                         // band height as fraction of L2
    std::vector<double> centers = {0.25, 0.5, 0.75};  // band centers as fractions of L2
    double contrast = 100.0;                          // k multiplier inside a band
};

// Per-cell permeability: k_base everywhere, k_base * contrast inside bands.
std::vector<double> make_streak_permeability(const Mesh& mesh, double k_base,
                                             const StreakSpec& streaks);

struct PressureSolution {
    std::vector<double> p;  // per cell
    SolveReport report;
};

// Incompressible single-phase pressure: div(k/mu grad p) = 0 with p = p_in on
// the left side, p = p_out on the right, no-flow top and bottom. `mobility`
// is k/mu per cell.
PressureSolution solve_pressure(const Mesh& mesh, std::span<const double> mobility,
                                double p_in, double p_out, const CgOptions& cg = {});

// Face-normal Darcy velocity (flux / face length) along each face's stored
// normal; exactly the fluxes of the TPFA pressure system, so the discrete
// divergence vanishes to solver tolerance. Neumann boundary faces carry 0.
std::vector<double> reconstruct_velocity(const Mesh& mesh, std::span<const double> mobility,
                                         std::span<const double> p, double p_in, double p_out);

// sum over the cell's faces of (outward flux) = length * v * orientation.
double cell_divergence(const Mesh& mesh, std::span<const double> face_velocity, int cell);

double max_face_speed(const Mesh& mesh, std::span<const double> face_velocity);
double mean_abs_flux(const Mesh& mesh, std::span<const double> face_velocity);

struct BoundaryFlow {
    double inflow = 0.0;   // total flux entering through the left side
    double outflow = 0.0;  // total flux leaving through the right side
};
BoundaryFlow boundary_flow(const Mesh& mesh, std::span<const double> face_velocity);

// Bundle used by the transport experiment and the precompute tool.
struct DarcyField {
    std::vector<double> k;              // permeability per cell
    std::vector<double> p;              // pressure per cell
    std::vector<double> face_velocity;  // per face
    SolveReport pressure_report;
};

DarcyField solve_darcy(const Mesh& mesh, double k_base, const StreakSpec& streaks,
                       double viscosity, double p_in, double p_out, const CgOptions& cg = {});

}  // namespace spdekit
