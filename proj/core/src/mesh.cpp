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
#include "spdekit/mesh.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace spdekit {

Mesh build_uniform_triangulation(double L1, double L2, int nx, int ny) {
    if (!(L1 > 0.0) || !(L2 > 0.0))
        throw std::invalid_argument("mesh: domain extents must be positive");
    if (nx < 1 || ny < 1)
        throw std::invalid_argument("mesh: nx and ny must be >= 1");

    Mesh m;
    m.L1 = L1;
    m.L2 = L2;
    m.nx = nx;
    m.ny = ny;
    m.dx = L1 / nx;
    m.dy = L2 / ny;
    m.h = std::hypot(m.dx, m.dy);

    m.vertices.resize(static_cast<std::size_t>(nx + 1) * (ny + 1));
    m.vertex_sides.assign(m.vertices.size(), 0);
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            const int v = m.vertex_index(i, j);
            m.vertices[v] = {i * m.dx, j * m.dy};
            std::uint8_t s = 0;
            if (i == 0) s |= side_bit(Side::left);
            if (i == nx) s |= side_bit(Side::right);
            if (j == 0) s |= side_bit(Side::bottom);
            if (j == ny) s |= side_bit(Side::top);
            m.vertex_sides[v] = s;
        }
    }

    // Each quad is split along the lower-left -> upper-right diagonal; both
    // triangles are counterclockwise.
    m.triangles.reserve(static_cast<std::size_t>(2) * nx * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int v00 = m.vertex_index(i, j);
            const int v10 = m.vertex_index(i + 1, j);
            const int v01 = m.vertex_index(i, j + 1);
            const int v11 = m.vertex_index(i + 1, j + 1);
            m.triangles.push_back({v00, v10, v11});
            m.triangles.push_back({v00, v11, v01});
        }
    }

    m.cells.resize(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            Cell& c = m.cells[m.cell_index(i, j)];
            c.center = {(i + 0.5) * m.dx, (j + 0.5) * m.dy};
            c.area = m.dx * m.dy;
        }
    }

    // Faces with x-normal first (nx+1 columns of ny faces), then y-normal.
    m.faces.reserve(static_cast<std::size_t>((nx + 1)) * ny + static_cast<std::size_t>(nx) * (ny + 1));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            Face f;
            f.length = m.dy;
            if (i == 0) {
                f.a = m.cell_index(0, j);
                f.normal = {-1.0, 0.0};
                f.side = Side::left;
            } else if (i == nx) {
                f.a = m.cell_index(nx - 1, j);
                f.normal = {1.0, 0.0};
                f.side = Side::right;
            } else {
                f.a = m.cell_index(i - 1, j);
                f.b = m.cell_index(i, j);
                f.normal = {1.0, 0.0};
            }
            const int idx = static_cast<int>(m.faces.size());
            m.faces.push_back(f);
            if (i > 0) m.cells[m.cell_index(i - 1, j)].faces[1] = idx;
            if (i < nx) m.cells[m.cell_index(i, j)].faces[0] = idx;
        }
    }
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            Face f;
            f.length = m.dx;
            if (j == 0) {
                f.a = m.cell_index(i, 0);
                f.normal = {0.0, -1.0};
                f.side = Side::bottom;
            } else if (j == ny) {
                f.a = m.cell_index(i, ny - 1);
                f.normal = {0.0, 1.0};
                f.side = Side::top;
            } else {
                f.a = m.cell_index(i, j - 1);
                f.b = m.cell_index(i, j);
                f.normal = {0.0, 1.0};
            }
            const int idx = static_cast<int>(m.faces.size());
            m.faces.push_back(f);
            if (j > 0) m.cells[m.cell_index(i, j - 1)].faces[3] = idx;
            if (j < ny) m.cells[m.cell_index(i, j)].faces[2] = idx;
        }
    }

    return m;
}

Mesh build_fv_grid(double L1, double L2, int nx, int ny) {
    return build_uniform_triangulation(L1, L2, nx, ny);
}

double triangle_area(const Mesh& m, int t) {
    const auto& tri = m.triangles[t];
    const Vec2& p0 = m.vertices[tri[0]];
    const Vec2& p1 = m.vertices[tri[1]];
    const Vec2& p2 = m.vertices[tri[2]];
    return 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
}

void dump_vertices_csv(const Mesh& m, std::ostream& out) {
    out << "index,x,y\n";
    for (int v = 0; v < m.n_vertices(); ++v)
        out << v << ',' << m.vertices[v].x << ',' << m.vertices[v].y << '\n';
}

void dump_triangles_csv(const Mesh& m, std::ostream& out) {
    out << "index,v0,v1,v2\n";
    for (std::size_t t = 0; t < m.triangles.size(); ++t)
        out << t << ',' << m.triangles[t][0] << ',' << m.triangles[t][1] << ',' << m.triangles[t][2] << '\n';
}

}  // namespace spdekit
