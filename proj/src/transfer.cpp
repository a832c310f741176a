// SPDX-License-Identifier: Apache-2.0
#include "uhdg/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace uhdg {

namespace {

constexpr double kOnGamma = 1e-10;    // |phi(xbar)| tolerance
constexpr double kInOmega = 1e-12;    // phi(sample) <= kInOmega along the segment
constexpr int kSegmentSamples = 16;

// proper (interior) crossing of two segments; touching endpoints do not count
bool segments_cross(const Vec2& p1, const Vec2& q1, const Vec2& p2, const Vec2& q2) {
    const Vec2 r = q1 - p1, s = q2 - p2;
    const double len = r.norm() * s.norm();
    if (len == 0.0) return false;
    const double tol = 1e-12 * len;
    const double d1 = s.cross(p1 - p2);
    const double d2 = s.cross(q1 - p2);
    const double d3 = r.cross(p2 - p1);
    const double d4 = r.cross(q2 - p1);
    return (d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)
               ? ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
               : false;
}

struct PathBuilder {
    const Mesh& mesh;
    const DomainGeometry& geo;
    const CellLocator locator;
    // boundary-edge neighbors (sharing a vertex)
    std::map<int, std::array<int, 2>> neighbors;

    PathBuilder(const Mesh& m, const DomainGeometry& g) : mesh(m), geo(g), locator(m) {
        std::map<int, std::vector<int>> at_vertex;
        for (int e = 0; e < m.n_edges(); ++e) {
            if (!m.edges[e].is_boundary()) continue;
            at_vertex[m.edges[e].a].push_back(e);
            at_vertex[m.edges[e].b].push_back(e);
        }
        for (int e = 0; e < m.n_edges(); ++e) {
            if (!m.edges[e].is_boundary()) continue;
            std::array<int, 2> nb{-1, -1};
            int slot = 0;
            for (int v : {m.edges[e].a, m.edges[e].b})
                for (int o : at_vertex[v])
                    if (o != e && slot < 2) nb[slot++] = o;
            neighbors[e] = nb;
        }
    }

    bool segment_valid(const Vec2& x, const Vec2& xbar, double l) const {
        if (std::abs(geo.phi(xbar)) > kOnGamma) return false;
        const Vec2 t = (xbar - x) / l;
        for (int i = 1; i <= kSegmentSamples; ++i) {
            const Vec2 p = x + (l * i / (kSegmentSamples + 1.0)) * t;
            if (geo.phi(p) > kInOmega) return false;
            if (locator.contains(p)) return false;
        }
        return true;
    }

    bool crosses_accepted(const TransferPathSet& set, int edge, const Vec2& x,
                          const Vec2& xbar) const {
        auto check_family = [&](int e) {
            const auto* fam = set.find_edge(e);
            if (fam == nullptr) return false;
            for (const TransferPath& p : *fam) {
                if (p.l <= 0.0) continue;
                if (segments_cross(x, xbar, p.x, p.xbar)) return true;
            }
            return false;
        };
        if (check_family(edge)) return true;
        const auto nb = neighbors.at(edge);
        return (nb[0] >= 0 && check_family(nb[0])) || (nb[1] >= 0 && check_family(nb[1]));
    }
};

} // namespace

double TransferPathSet::max_length() const {
    double l = 0.0;
    for (const auto& fam : paths)
        for (const auto& p : fam) l = std::max(l, p.l);
    return l;
}

void TransferPathSet::rebuild_index() {
    edge_index_.clear();
    for (size_t i = 0; i < boundary_edges.size(); ++i)
        edge_index_[boundary_edges[i]] = static_cast<int>(i);
}

TransferPathSet build_paths(const Mesh& m, const DomainGeometry& g, const SpaceTables& tables) {
    PathBuilder builder(m, g);
    TransferPathSet set;
    for (int e = 0; e < m.n_edges(); ++e)
        if (m.edges[e].is_boundary()) set.boundary_edges.push_back(e);
    set.paths.resize(set.boundary_edges.size());
    set.endpoint_l.resize(set.boundary_edges.size());
    set.rebuild_index();

    // outward direction at each boundary vertex: bisector of the adjacent
    // boundary-edge normals; adjacent fans share it, so interpolated fans of
    // neighboring edges cannot cross each other
    std::map<int, Vec2> vertex_dir;
    for (int e : set.boundary_edges) {
        for (int v : {m.edges[e].a, m.edges[e].b}) {
            auto [it, inserted] = vertex_dir.try_emplace(v, Vec2{0.0, 0.0});
            it->second += m.edges[e].normal;
        }
    }
    for (auto& [v, d] : vertex_dir) d = d.normalized();

    // candidate chain per quadrature point: closest point, interpolated
    // direction ray, edge-normal ray; crossing conflicts demote a whole
    // family away from the closest-point rule (deterministically)
    auto build_family = [&](size_t bi, bool allow_closest) {
        const int e = set.boundary_edges[bi];
        const Edge& ed = m.edges[e];
        const double s_max = 10.0 * m.h_K[ed.left];
        const Vec2 da = vertex_dir.at(ed.a), db = vertex_dir.at(ed.b);
        auto& family = set.paths[bi];
        family.clear();

        for (int q = 0; q < tables.seg.size(); ++q) {
            const double s = tables.seg.points[q];
            const Vec2 x = m.edge_point(e, s);
            TransferPath path;
            path.edge = e;
            path.qp = q;
            path.x = x;
            path.owner_cell = ed.left;

            if (std::abs(g.phi(x)) <= 1e-12) {
                path.xbar = x;
                path.l = 0.0;
                path.t = ed.normal;
                family.push_back(path);
                continue;
            }

            auto try_candidate = [&](const Vec2& xbar) {
                const double l = (xbar - x).norm();
                if (l <= 1e-14) {
                    path.xbar = x;
                    path.l = 0.0;
                    path.t = ed.normal;
                    return true;
                }
                if (!builder.segment_valid(x, xbar, l)) return false;
                path.xbar = xbar;
                path.l = l;
                path.t = (xbar - x) / l;
                return true;
            };

            bool ok = false;
            if (allow_closest) {
                try {
                    ok = try_candidate(closest_point(g, x));
                } catch (const GeometryError&) {
                    ok = false;
                }
            }
            if (!ok) {
                const Vec2 d = ((1.0 - s) * da + s * db).normalized();
                try {
                    ok = try_candidate(ray_boundary_intersection(g, x, d, s_max).second);
                } catch (const GeometryError&) {
                    ok = false;
                }
            }
            if (!ok) {
                try {
                    ok = try_candidate(ray_boundary_intersection(g, x, ed.normal, s_max).second);
                } catch (const GeometryError&) {
                    ok = false;
                }
            }
            if (!ok)
                throw PathConstructionError(
                    "build_paths: no valid transferring path for edge " + std::to_string(e) +
                        " quadrature point " + std::to_string(q),
                    e, q);
            family.push_back(path);
        }
    };

    for (size_t bi = 0; bi < set.boundary_edges.size(); ++bi) {
        build_family(bi, true);

        // endpoint distances feed H_e_perp
        const int e = set.boundary_edges[bi];
        const Edge& ed = m.edges[e];
        for (int end = 0; end < 2; ++end) {
            const Vec2 v = m.vertices[end == 0 ? ed.a : ed.b];
            if (std::abs(g.phi(v)) <= 1e-12) {
                set.endpoint_l[bi][end] = 0.0;
                continue;
            }
            try {
                set.endpoint_l[bi][end] = (closest_point(g, v) - v).norm();
            } catch (const GeometryError&) {
                set.endpoint_l[bi][end] =
                    ray_boundary_intersection(g, v, vertex_dir.at(end == 0 ? ed.a : ed.b),
                                              10.0 * m.h_K[ed.left])
                        .first;
            }
        }
    }

    // crossing resolution within each family and its two edge-neighbors
    std::vector<char> demoted(set.boundary_edges.size(), 0);
    auto find_crossing = [&](size_t bi, size_t& other_out) {
        const int e = set.boundary_edges[bi];
        const auto nb = builder.neighbors.at(e);
        for (int fe : {e, nb[0], nb[1]}) {
            if (fe < e) continue; // each unordered pair once, by smaller edge id
            if (fe < 0) continue;
            const auto* fam = set.find_edge(fe);
            if (fam == nullptr) continue;
            size_t fbi = bi;
            for (size_t i = 0; i < set.boundary_edges.size(); ++i)
                if (set.boundary_edges[i] == fe) fbi = i;
            for (const auto& p1 : set.paths[bi]) {
                if (p1.l <= 0.0) continue;
                for (const auto& p2 : *fam) {
                    if (p2.l <= 0.0) continue;
                    if (fe == e && p2.qp <= p1.qp) continue;
                    if (segments_cross(p1.x, p1.xbar, p2.x, p2.xbar)) {
                        other_out = fbi;
                        return true;
                    }
                }
            }
        }
        return false;
    };

    for (int round = 0; round < 64; ++round) {
        bool any = false;
        for (size_t bi = 0; bi < set.boundary_edges.size() && !any; ++bi) {
            size_t other = bi;
            if (find_crossing(bi, other)) {
                any = true;
                const size_t victim = std::max(bi, other);
                const size_t alt = std::min(bi, other);
                if (!demoted[victim]) {
                    demoted[victim] = 1;
                    build_family(victim, false);
                } else if (!demoted[alt]) {
                    demoted[alt] = 1;
                    build_family(alt, false);
                } else {
                    throw PathConstructionError(
                        "build_paths: crossing paths persist near edge " +
                            std::to_string(set.boundary_edges[bi]),
                        set.boundary_edges[bi], 0);
                }
            }
        }
        if (!any) break;
        if (round == 63)
            throw PathConstructionError("build_paths: crossing resolution did not terminate",
                                        set.boundary_edges.front(), 0);
    }

    // certification pass
    for (size_t bi = 0; bi < set.boundary_edges.size(); ++bi) {
        size_t other = bi;
        if (find_crossing(bi, other))
            throw PathConstructionError("build_paths: crossing paths near edge " +
                                            std::to_string(set.boundary_edges[bi]),
                                        set.boundary_edges[bi], 0);
    }
    set.non_crossing_certified = true;
    return set;
}

Vec2 segment_moment(const TransferPath& path, std::span<const double> sigma_coeffs,
                    std::span<const double> rho_coeffs, const MaterialParams& m,
                    const SpaceTables& tables, const Mesh& mesh) {
    if (path.l <= 0.0) return {0.0, 0.0};
    const PhysTriangle tri = mesh.cell_triangle(path.owner_cell);
    Vec2 acc{0.0, 0.0};
    for (int i = 0; i < tables.seg.size(); ++i) {
        const Vec2 p = path.x + (tables.seg.points[i] * path.l) * path.t;
        const Tensor2 sig = eval_stress_coeffs(tables.k, tri, sigma_coeffs, p);
        const double q = eval_scalar_coeffs(tables.k, tri, rho_coeffs, p);
        Tensor2 integrand = apply_A(sig, m);
        integrand(0, 1) += q;
        integrand(1, 0) -= q;
        acc += (tables.seg.weights[i] * path.l) * integrand.apply(path.t);
    }
    return acc;
}

void transfer_row_blocks(const TransferPath& path, const Mesh& mesh, const SpaceTables& tables,
                         const MaterialParams& m, Eigen::MatrixXd& B_sigma,
                         Eigen::MatrixXd& B_rho) {
    const int k = tables.k;
    const int d_s = tables.d_s();
    const auto dofs = tables.dofs();
    B_sigma.setZero(2, dofs.n_sigma);
    B_rho.setZero(2, dofs.n_rho);
    if (path.l <= 0.0) return;

    // A applied to the four unit tensors, contracted with t
    Vec2 At[4];
    for (int c = 0; c < 4; ++c) {
        Tensor2 E;
        E.m[c] = 1.0;
        At[c] = apply_A(E, m).apply(path.t);
    }
    const Vec2 Jt{path.t.y, -path.t.x};

    ElementBasis eb(k, mesh.cell_triangle(path.owner_cell));
    ScalarBasisPoint sb;
    std::vector<BubbleValue> bub;
    for (int i = 0; i < tables.seg.size(); ++i) {
        const Vec2 p = path.x + (tables.seg.points[i] * path.l) * path.t;
        const double w = tables.seg.weights[i] * path.l;
        eb.eval(p, 0, sb);
        bubble_basis(k, eb.tri, p, bub);
        for (int c = 0; c < 4; ++c) {
            for (int b = 0; b < d_s; ++b) {
                const double v = w * sb.val[b];
                B_sigma(0, c * d_s + b) += v * At[c].x;
                B_sigma(1, c * d_s + b) += v * At[c].y;
            }
        }
        for (int q = 0; q <= k; ++q) {
            const Vec2 a = apply_A(bub[q].value, m).apply(path.t);
            B_sigma(0, 4 * d_s + q) += w * a.x;
            B_sigma(1, 4 * d_s + q) += w * a.y;
        }
        for (int b = 0; b < d_s; ++b) {
            B_rho(0, b) += w * sb.val[b] * Jt.x;
            B_rho(1, b) += w * sb.val[b] * Jt.y;
        }
    }
}

void dump_paths_csv(const TransferPathSet& set, std::ostream& os) {
    os << "edge,qp,x0,y0,x1,y1,l\n";
    char buf[256];
    for (const auto& fam : set.paths) {
        for (const TransferPath& p : fam) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g", p.edge, p.qp,
                          p.x.x, p.x.y, p.xbar.x, p.xbar.y, p.l);
            os << buf << '\n';
        }
    }
}

} // namespace uhdg
