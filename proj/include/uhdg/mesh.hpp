// SPDX-License-Identifier: Apache-2.0
//
// Simplicial triangulations of the polygonal computational domain Omega_h,
// in the fitted (square, interpolated disk) and immersed background-mesh
// regimes, plus the boundary-closeness metrics r_e and R.
#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "uhdg/geometry.hpp"
#include "uhdg/spaces.hpp"
#include "uhdg/types.hpp"

namespace uhdg {

struct Edge {
    int a = -1, b = -1;        // vertex ids, a < b; fixes the trace orientation
    int left = -1, right = -1; // right = -1 on the boundary
    Vec2 normal;               // outward unit normal, boundary edges only
    bool is_boundary() const { return right < 0; }
};

struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> cells;       // CCW vertex triples
    std::vector<Edge> edges;
    std::vector<std::array<int, 3>> cell_edges;  // edge id of face i (opposite vertex i)
    std::vector<double> h_K;      // cell diameters
    std::vector<double> rho_K;    // cell inradii
    double h = 0.0;               // max h_K

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_cells() const { return static_cast<int>(cells.size()); }
    int n_edges() const { return static_cast<int>(edges.size()); }

    PhysTriangle cell_triangle(int c) const {
        const auto& t = cells[c];
        return {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
    }
    Vec2 edge_point(int e, double s) const {
        const Edge& ed = edges[e];
        return vertices[ed.a] + s * (vertices[ed.b] - vertices[ed.a]);
    }
    double edge_length(int e) const {
        return (vertices[edges[e].b] - vertices[edges[e].a]).norm();
    }
    /// measured shape-regularity constant max h_K / rho_K
    double gamma() const;
    /// total area (sum of signed cell areas)
    double area() const;
    /// area of the boundary polygon by the shoelace formula
    double boundary_loop_area() const;
};

struct TransferPathSet; // transfer.hpp

struct MeshMetrics {
    std::vector<int> boundary_edges;  // edge ids
    std::vector<double> h_perp;       // opposite-vertex distance
    std::vector<double> H_perp;       // max transfer length over the edge
    std::vector<double> r_e;          // H_perp / h_perp
    double R = 0.0;
    double dist_estimate = 0.0;       // max sampled distance(Gamma_h, Gamma)
};

/// Uniform triangulation of [0,1]^2 with 2 n^2 cells.
Mesh build_square_mesh(int n);

/// Concentric-ring triangulation of the unit disk; the outermost vertices lie
/// exactly on the unit circle, so the boundary interpolates Gamma (R = O(h)).
Mesh build_fitted_disk_mesh(int rings);

/// Background grid over g.bbox inflated 10%; keeps the triangles certified
/// inside Omega (vertices, edge midpoints and a 9-point hull sample all have
/// phi <= -eps). Throws MeshError if the kept region is empty or disconnected.
Mesh build_immersed_mesh(const DomainGeometry& g, int n);

/// Boundary-closeness metrics from the transfer paths (which carry the
/// per-quadrature-point and endpoint lengths). Throws PreconditionError if
/// paths are missing for some boundary edge.
MeshMetrics compute_mesh_metrics(const Mesh& m, const TransferPathSet& paths);

/// Line-oriented text format:
///   nv nc ne
///   nv lines "x y", nc lines "i j k" (0-based, CCW),
///   ne lines "a b leftcell rightcell" (rightcell = -1 on the boundary).
/// Floats are printed with 17 significant digits.
void write_mesh(const Mesh& m, std::ostream& os);
void write_mesh_file(const Mesh& m, const std::string& path);
Mesh read_mesh(std::istream& is);
Mesh read_mesh_file(const std::string& path);

/// Uniform-grid accelerator for point-in-mesh queries.
class CellLocator {
  public:
    explicit CellLocator(const Mesh& m);
    /// index of a cell whose closed hull contains p (barycentric tolerance),
    /// or -1
    int find_cell(const Vec2& p, double tol = 1e-10) const;
    bool contains(const Vec2& p, double tol = 1e-10) const { return find_cell(p, tol) >= 0; }

  private:
    const Mesh* mesh_;
    BBox box_;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> bins_;
};

} // namespace uhdg
