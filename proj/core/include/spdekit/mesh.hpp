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
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace spdekit {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// Boundary side tags for the rectangle [0,L1]x[0,L2].
enum class Side : std::uint8_t { left = 0, right = 1, bottom = 2, top = 3, none = 4 };

// Bit flags so corner vertices can sit on two sides at once.
constexpr std::uint8_t side_bit(Side s) { return static_cast<std::uint8_t>(1u << static_cast<int>(s)); }

struct Cell {
    Vec2 center;
    double area = 0.0;
    std::array<int, 4> faces{};  // left, right, bottom, top face indices
};

// A face of the finite-volume grid. For interior faces the stored unit normal
// points from the lower-indexed cell `a` to the higher-indexed cell `b`;
// for boundary faces (b == -1) it points outward.
struct Face {
    int a = -1;
    int b = -1;
    double length = 0.0;
    Vec2 normal;
    Side side = Side::none;  // which boundary, Side::none for interior faces

    bool boundary() const { return b < 0; }
};

// Structured mesh over [0,L1]x[0,L2] carrying both spatial views used by the
// solvers: a P1 triangulation (vertices + triangles, every quad split along
// its lower-left -> upper-right diagonal) and the aligned cell-centered
// finite-volume grid (cells + faces) on the same (nx, ny) partition.
struct Mesh {
    double L1 = 1.0, L2 = 1.0;
    int nx = 0, ny = 0;
    double dx = 0.0, dy = 0.0;
    double h = 0.0;  // max triangle diameter = hypot(dx, dy)

    std::vector<Vec2> vertices;                     // (nx+1)*(ny+1), row-major
    std::vector<std::array<int, 3>> triangles;      // 2*nx*ny, counterclockwise
    std::vector<std::uint8_t> vertex_sides;         // side bitmask per vertex

    std::vector<Cell> cells;                        // nx*ny, row-major
    std::vector<Face> faces;

    int vertex_index(int i, int j) const { return j * (nx + 1) + i; }
    int cell_index(int i, int j) const { return j * nx + i; }
    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_cells() const { return static_cast<int>(cells.size()); }

    bool vertex_on(int v, Side s) const { return (vertex_sides[v] & side_bit(s)) != 0; }

    // +1 if the stored face normal is outward for `cell`, -1 otherwise.
    double outward_sign(const Face& f, int cell) const { return f.a == cell ? 1.0 : -1.0; }
};

// Builds the structured triangulation (and the aligned FV view).
// Throws std::invalid_argument for non-positive dimensions or extents.
Mesh build_uniform_triangulation(double L1, double L2, int nx, int ny);

// Same grid viewed as nx*ny control volumes; identical content, provided so
// call sites can name the view they want.
Mesh build_fv_grid(double L1, double L2, int nx, int ny);

double triangle_area(const Mesh& m, int t);

// CSV dumps: vertex table "index,x,y" and triangle table "index,v0,v1,v2".
void dump_vertices_csv(const Mesh& m, std::ostream& out);
void dump_triangles_csv(const Mesh& m, std::ostream& out);

}  // namespace spdekit
