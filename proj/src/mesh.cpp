// SPDX-License-Identifier: Apache-2.0
#include "uhdg/mesh.hpp"

#include "uhdg/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>

namespace uhdg {

namespace {

// face i is opposite vertex i; traversal (first -> second) is the CCW order
inline std::pair<int, int> face_vertices(const std::array<int, 3>& cell, int face) {
    switch (face) {
        case 0: return {cell[1], cell[2]};
        case 1: return {cell[2], cell[0]};
        default: return {cell[0], cell[1]};
    }
}

void finalize_mesh(Mesh& m) {
    m.edges.clear();
    m.cell_edges.assign(m.cells.size(), {-1, -1, -1});
    m.h_K.resize(m.cells.size());
    m.rho_K.resize(m.cells.size());
    m.h = 0.0;

    std::map<std::pair<int, int>, int> edge_of;
    for (int c = 0; c < m.n_cells(); ++c) {
        const PhysTriangle tri = m.cell_triangle(c);
        if (tri.det_jacobian() <= 0.0)
            throw MeshError("mesh: cell " + std::to_string(c) +
                            " is degenerate or not counterclockwise");
        m.h_K[c] = tri.diameter();
        m.rho_K[c] = tri.inradius();
        m.h = std::max(m.h, m.h_K[c]);

        for (int f = 0; f < 3; ++f) {
            auto [vi, vj] = face_vertices(m.cells[c], f);
            const std::pair<int, int> key{std::min(vi, vj), std::max(vi, vj)};
            auto it = edge_of.find(key);
            if (it == edge_of.end()) {
                Edge e;
                e.a = key.first;
                e.b = key.second;
                e.left = c;
                m.edges.push_back(e);
                edge_of.emplace(key, m.n_edges() - 1);
                m.cell_edges[c][f] = m.n_edges() - 1;
            } else {
                Edge& e = m.edges[it->second];
                if (e.right >= 0)
                    throw MeshError("mesh: edge shared by more than two cells");
                e.right = c;
                m.cell_edges[c][f] = it->second;
            }
        }
    }

    // boundary normals from the owning cell's CCW traversal
    for (Edge& e : m.edges) {
        if (!e.is_boundary()) continue;
        const auto& cell = m.cells[e.left];
        for (int f = 0; f < 3; ++f) {
            auto [vi, vj] = face_vertices(cell, f);
            if (std::min(vi, vj) == e.a && std::max(vi, vj) == e.b) {
                const Vec2 t = m.vertices[vj] - m.vertices[vi];
                e.normal = Vec2{t.y, -t.x}.normalized();
                break;
            }
        }
    }
}

} // namespace

double Mesh::gamma() const {
    double g = 0.0;
    for (int c = 0; c < n_cells(); ++c) g = std::max(g, h_K[c] / rho_K[c]);
    return g;
}

double Mesh::area() const {
    double a = 0.0;
    for (int c = 0; c < n_cells(); ++c) a += cell_triangle(c).area();
    return a;
}

double Mesh::boundary_loop_area() const {
    // Green's theorem over the CCW-traversed boundary edges
    double a = 0.0;
    for (const Edge& e : edges) {
        if (!e.is_boundary()) continue;
        const auto& cell = cells[e.left];
        for (int f = 0; f < 3; ++f) {
            auto [vi, vj] = face_vertices(cell, f);
            if (std::min(vi, vj) == e.a && std::max(vi, vj) == e.b) {
                a += 0.5 * vertices[vi].cross(vertices[vj]);
                break;
            }
        }
    }
    return a;
}

Mesh build_square_mesh(int n) {
    if (n < 1) throw MeshError("build_square_mesh: n must be >= 1");
    Mesh m;
    m.vertices.reserve((n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            m.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    auto vid = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j);
            const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            m.cells.push_back({v00, v10, v11});
            m.cells.push_back({v00, v11, v01});
        }
    }
    finalize_mesh(m);
    return m;
}

Mesh build_fitted_disk_mesh(int rings) {
    if (rings < 1) throw MeshError("build_fitted_disk_mesh: rings must be >= 1");
    Mesh m;
    m.vertices.push_back({0.0, 0.0});
    std::vector<int> ring_start(rings + 1, 0);
    for (int j = 1; j <= rings; ++j) {
        ring_start[j] = m.n_vertices();
        const int nj = 6 * j;
        const double r = static_cast<double>(j) / rings;
        for (int i = 0; i < nj; ++i) {
            const double th = 2.0 * M_PI * i / nj;
            m.vertices.push_back({r * std::cos(th), r * std::sin(th)});
        }
    }
    // core fan
    for (int i = 0; i < 6; ++i)
        m.cells.push_back({0, ring_start[1] + i, ring_start[1] + (i + 1) % 6});
    // annuli: two-pointer stitch by angle
    for (int j = 1; j < rings; ++j) {
        const int ni = 6 * j, no = 6 * (j + 1);
        const int si = ring_start[j], so = ring_start[j + 1];
        int i = 0, o = 0;
        while (i < ni || o < no) {
            const double next_inner = 2.0 * M_PI * (i + 1) / ni;
            const double next_outer = 2.0 * M_PI * (o + 1) / no;
            const bool advance_outer = (i == ni) || (o < no && next_outer <= next_inner);
            if (advance_outer) {
                m.cells.push_back({si + i % ni, so + o % no, so + (o + 1) % no});
                ++o;
            } else {
                m.cells.push_back({si + i % ni, so + o % no, si + (i + 1) % ni});
                ++i;
            }
        }
    }
    finalize_mesh(m);
    return m;
}

Mesh build_immersed_mesh(const DomainGeometry& g, int n) {
    if (n < 1) throw MeshError("build_immersed_mesh: n must be >= 1");
    const double eps_in = 1e-12;
    const BBox box = g.bbox.inflated(0.1);
    const double Lx = box.hi.x - box.lo.x;
    const double Ly = box.hi.y - box.lo.y;
    const int nx = n;
    const int ny = std::max(1, static_cast<int>(std::lround(n * Ly / Lx)));

    auto inside = [&](const Vec2& p) { return g.phi(p) <= -eps_in; };
    auto keep = [&](const Vec2& a, const Vec2& b, const Vec2& c) {
        const Vec2 pts6[6] = {a, b, c, (a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5};
        for (const Vec2& p : pts6)
            if (!inside(p)) return false;
        // 9-point hull certificate: vertices, edge midpoints, half-medians
        const Vec2 bary = (a + b + c) / 3.0;
        const Vec2 extra[3] = {(a + bary) * 0.5, (b + bary) * 0.5, (c + bary) * 0.5};
        for (const Vec2& p : extra)
            if (!inside(p)) return false;
        return true;
    };

    auto grid_v = [&](int i, int j) {
        return Vec2{box.lo.x + Lx * i / nx, box.lo.y + Ly * j / ny};
    };

    std::vector<std::array<int, 3>> kept;       // in grid-vertex ids
    auto gid = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Vec2 v00 = grid_v(i, j), v10 = grid_v(i + 1, j);
            const Vec2 v01 = grid_v(i, j + 1), v11 = grid_v(i + 1, j + 1);
            if (keep(v00, v10, v11))
                kept.push_back({gid(i, j), gid(i + 1, j), gid(i + 1, j + 1)});
            if (keep(v00, v11, v01))
                kept.push_back({gid(i, j), gid(i + 1, j + 1), gid(i, j + 1)});
        }
    }
    if (kept.empty())
        throw MeshError("build_immersed_mesh: no background cell lies inside Omega");

    // renumber vertices
    std::map<int, int> remap;
    Mesh m;
    for (auto& cell : kept) {
        for (int& v : cell) {
            auto it = remap.find(v);
            if (it == remap.end()) {
                const int i = v % (nx + 1), j = v / (nx + 1);
                remap.emplace(v, m.n_vertices());
                m.vertices.push_back(grid_v(i, j));
                v = m.n_vertices() - 1;
            } else {
                v = it->second;
            }
        }
        m.cells.push_back(cell);
    }
    finalize_mesh(m);

    // connectivity over shared edges
    std::vector<char> seen(m.n_cells(), 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int count = 1;
    while (!queue.empty()) {
        const int c = queue.front();
        queue.pop_front();
        for (int f = 0; f < 3; ++f) {
            const Edge& e = m.edges[m.cell_edges[c][f]];
            const int other = (e.left == c) ? e.right : e.left;
            if (other >= 0 && !seen[other]) {
                seen[other] = 1;
                ++count;
                queue.push_back(other);
            }
        }
    }
    if (count != m.n_cells())
        throw MeshError("build_immersed_mesh: kept region is disconnected");
    return m;
}

MeshMetrics compute_mesh_metrics(const Mesh& m, const TransferPathSet& paths) {
    MeshMetrics out;
    for (int e = 0; e < m.n_edges(); ++e) {
        if (!m.edges[e].is_boundary()) continue;
        out.boundary_edges.push_back(e);
        const auto* family = paths.find_edge(e);
        if (family == nullptr)
            throw PreconditionError("compute_mesh_metrics: missing transfer paths for edge " +
                                    std::to_string(e));
        // h_e_perp: distance from the opposite vertex to the edge line
        const Edge& ed = m.edges[e];
        const auto& cell = m.cells[ed.left];
        int opp = cell[0];
        for (int v : cell)
            if (v != ed.a && v != ed.b) opp = v;
        const Vec2 ta = m.vertices[ed.a], tb = m.vertices[ed.b];
        const Vec2 dir = (tb - ta).normalized();
        const Vec2 d = m.vertices[opp] - ta;
        const double h_perp = std::abs(d.cross(dir));

        double H = 0.0;
        for (const TransferPath& p : *family) H = std::max(H, p.l);
        const auto& el = paths.endpoint_lengths(e);
        H = std::max({H, el[0], el[1]});

        out.h_perp.push_back(h_perp);
        out.H_perp.push_back(H);
        out.r_e.push_back(H / h_perp);
        out.R = std::max(out.R, H / h_perp);
        out.dist_estimate = std::max(out.dist_estimate, H);
    }
    return out;
}

void write_mesh(const Mesh& m, std::ostream& os) {
    char buf[128];
    os << m.n_vertices() << ' ' << m.n_cells() << ' ' << m.n_edges() << '\n';
    for (const Vec2& v : m.vertices) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g", v.x, v.y);
        os << buf << '\n';
    }
    for (const auto& c : m.cells)
        os << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
    for (const Edge& e : m.edges)
        os << e.a << ' ' << e.b << ' ' << e.left << ' ' << e.right << '\n';
}

void write_mesh_file(const Mesh& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("write_mesh_file: cannot open " + path);
    write_mesh(m, os);
}

Mesh read_mesh(std::istream& is) {
    int nv = 0, nc = 0, ne = 0;
    if (!(is >> nv >> nc >> ne))
        throw MeshError("read_mesh: malformed header");
    Mesh m;
    m.vertices.resize(nv);
    for (auto& v : m.vertices)
        if (!(is >> v.x >> v.y)) throw MeshError("read_mesh: malformed vertex line");
    m.cells.resize(nc);
    for (auto& c : m.cells)
        if (!(is >> c[0] >> c[1] >> c[2])) throw MeshError("read_mesh: malformed cell line");
    finalize_mesh(m);
    if (m.n_edges() != ne)
        throw MeshError("read_mesh: edge count mismatch with connectivity");
    for (int e = 0; e < ne; ++e) {
        int a, b, l, r;
        if (!(is >> a >> b >> l >> r)) throw MeshError("read_mesh: malformed edge line");
        const Edge& ed = m.edges[e];
        if (ed.a != a || ed.b != b || ed.left != l || ed.right != r)
            throw MeshError("read_mesh: edge " + std::to_string(e) +
                            " inconsistent with cell connectivity");
    }
    return m;
}

Mesh read_mesh_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("read_mesh_file: cannot open " + path);
    return read_mesh(is);
}

CellLocator::CellLocator(const Mesh& m) : mesh_(&m) {
    box_ = {m.vertices[0], m.vertices[0]};
    for (const Vec2& v : m.vertices) {
        box_.lo.x = std::min(box_.lo.x, v.x);
        box_.lo.y = std::min(box_.lo.y, v.y);
        box_.hi.x = std::max(box_.hi.x, v.x);
        box_.hi.y = std::max(box_.hi.y, v.y);
    }
    const int target = std::max(1, static_cast<int>(std::sqrt(m.n_cells())));
    nx_ = target;
    ny_ = target;
    bins_.assign(nx_ * ny_, {});
    const double lx = (box_.hi.x - box_.lo.x) / nx_;
    const double ly = (box_.hi.y - box_.lo.y) / ny_;
    for (int c = 0; c < m.n_cells(); ++c) {
        const PhysTriangle t = m.cell_triangle(c);
        double x0 = std::min({t.v0.x, t.v1.x, t.v2.x}), x1 = std::max({t.v0.x, t.v1.x, t.v2.x});
        double y0 = std::min({t.v0.y, t.v1.y, t.v2.y}), y1 = std::max({t.v0.y, t.v1.y, t.v2.y});
        const int i0 = std::clamp(static_cast<int>((x0 - box_.lo.x) / lx), 0, nx_ - 1);
        const int i1 = std::clamp(static_cast<int>((x1 - box_.lo.x) / lx), 0, nx_ - 1);
        const int j0 = std::clamp(static_cast<int>((y0 - box_.lo.y) / ly), 0, ny_ - 1);
        const int j1 = std::clamp(static_cast<int>((y1 - box_.lo.y) / ly), 0, ny_ - 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) bins_[j * nx_ + i].push_back(c);
    }
}

int CellLocator::find_cell(const Vec2& p, double tol) const {
    if (p.x < box_.lo.x - tol || p.x > box_.hi.x + tol || p.y < box_.lo.y - tol ||
        p.y > box_.hi.y + tol)
        return -1;
    const double lx = (box_.hi.x - box_.lo.x) / nx_;
    const double ly = (box_.hi.y - box_.lo.y) / ny_;
    const int i = std::clamp(static_cast<int>((p.x - box_.lo.x) / lx), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>((p.y - box_.lo.y) / ly), 0, ny_ - 1);
    for (int c : bins_[j * nx_ + i]) {
        const auto lam = mesh_->cell_triangle(c).barycentric(p);
        if (lam[0] >= -tol && lam[1] >= -tol && lam[2] >= -tol) return c;
    }
    return -1;
}

} // namespace uhdg
