// SPDX-License-Identifier: Apache-2.0
#include "uhdg/hdg.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

namespace uhdg {

namespace {

void parallel_for(int n, const std::function<void(int)>& body) {
    const int hw = std::max(1u, std::thread::hardware_concurrency());
    const int n_threads = std::min(hw, std::max(1, n));
    if (n_threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    std::atomic<int> next{0};
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

// outward normal of cell `c` on local face f (CCW traversal rotated -90 deg)
Vec2 face_outward_normal(const Mesh& m, int c, int f) {
    const auto& cell = m.cells[c];
    const int vi = cell[(f + 1) % 3];
    const int vj = cell[(f + 2) % 3];
    const Vec2 t = m.vertices[vj] - m.vertices[vi];
    return Vec2{t.y, -t.x}.normalized();
}

struct EdgeQuadPoint {
    Vec2 x;
    double w;      // physical weight
    double s;      // parameter on the (a -> b) parametrization
};

std::vector<EdgeQuadPoint> edge_quadrature(const Mesh& m, int e, const QuadratureRule1D& seg) {
    std::vector<EdgeQuadPoint> pts(seg.size());
    const double len = m.edge_length(e);
    for (int q = 0; q < seg.size(); ++q)
        pts[q] = {m.edge_point(e, seg.points[q]), seg.weights[q] * len, seg.points[q]};
    return pts;
}

} // namespace

Vec2 SolutionFields::uhat_at(int edge, double s) const {
    const int nk = k + 1;
    std::vector<double> L(nk);
    edge_basis_values(k, s, L.data());
    const int base = edge * 2 * nk;
    Vec2 v{0.0, 0.0};
    for (int mdeg = 0; mdeg < nk; ++mdeg) {
        v.x += uhat[base + mdeg] * L[mdeg];
        v.y += uhat[base + nk + mdeg] * L[mdeg];
    }
    return v;
}

Vec2 SolutionFields::sigma_hat_n(const Mesh& m, int cell, int edge, double s) const {
    int fidx = -1;
    for (int f = 0; f < 3; ++f)
        if (m.cell_edges[cell][f] == edge) fidx = f;
    if (fidx < 0)
        throw PreconditionError("sigma_hat_n: edge does not belong to the cell");
    const Vec2 n = face_outward_normal(m, cell, fidx);
    const Vec2 x = m.edge_point(edge, s);
    const PhysTriangle tri = m.cell_triangle(cell);
    const Tensor2 sg = eval_stress_coeffs(k, tri, sigma_coeffs(cell), x);
    const Vec2 uv = eval_vector_coeffs(k, tri, u_coeffs(cell), x);
    return sg.apply(n) - tau * (uv - uhat_at(edge, s));
}

LocalSystem assemble_local(const Mesh& m, int cell, const SpaceTables& tables,
                           const MaterialParams& mat, const HdgConfig& cfg,
                           const VectorField& f) {
    const int k = tables.k;
    const int d_s = tables.d_s();
    const auto dofs = tables.dofs();
    const int n_sigma = dofs.n_sigma, n_u = dofs.n_u, n_rho = dofs.n_rho;
    const int n_loc = n_sigma + n_u + n_rho;
    const int n_tr = 2 * (k + 1);
    const int off_u = n_sigma, off_r = n_sigma + n_u;

    const PhysTriangle tri = m.cell_triangle(cell);
    if (tri.det_jacobian() <= 0.0)
        throw GeometryError("assemble_local: degenerate cell");
    const ElementBasis eb(k, tri);
    const double detJ = tri.det_jacobian();

    LocalSystem ls;
    ls.cell = cell;
    ls.Axx.setZero(n_loc, n_loc);
    ls.Axu.setZero(n_loc, 3 * n_tr);
    ls.bx.setZero(n_loc);
    ls.Cux.setZero(3 * n_tr, n_loc);
    ls.Muu.setZero(3 * n_tr, 3 * n_tr);
    ls.ru.setZero(3 * n_tr);

    // A applied to the four unit tensors
    Tensor2 AE[4];
    for (int c = 0; c < 4; ++c) {
        Tensor2 E;
        E.m[c] = 1.0;
        AE[c] = apply_A(E, mat);
    }

    ScalarBasisPoint sb;
    std::vector<BubbleValue> bub;

    // volume terms
    for (int ip = 0; ip < tables.tri.size(); ++ip) {
        const Vec2 x = tri.map(tables.tri.points[ip]);
        const double w = tables.tri.weights[ip] * detJ;
        eb.eval(x, 1, sb);
        bubble_basis(k, tri, x, bub);
        const Vec2 fval = f(x);

        for (int c = 0; c < 4; ++c) {
            const int r = c / 2, cc = c % 2;
            for (int b = 0; b < d_s; ++b) {
                const int row = c * d_s + b;
                const double psi = sb.val[b];
                // (A sigma, v): tensor-tensor columns
                for (int c2 = 0; c2 < 4; ++c2) {
                    const double a = AE[c2].m[c];
                    if (a == 0.0) continue;
                    for (int b2 = 0; b2 < d_s; ++b2)
                        ls.Axx(row, c2 * d_s + b2) += w * psi * sb.val[b2] * a;
                }
                // (A sigma, v): bubble columns
                for (int q = 0; q <= k; ++q)
                    ls.Axx(row, 4 * d_s + q) += w * psi * apply_A(bub[q].value, mat).m[c];
                // (u, div v): div(psi_b E_c) = (d_cc psi_b) e_r
                const double dpsi = (cc == 0) ? sb.dx[b] : sb.dy[b];
                for (int b2 = 0; b2 < d_s; ++b2)
                    ls.Axx(row, off_u + r * d_s + b2) += w * sb.val[b2] * dpsi;
                // (rho, v): J contracted with E_c
                const double jc = (c == 1) ? 1.0 : (c == 2 ? -1.0 : 0.0);
                if (jc != 0.0)
                    for (int b2 = 0; b2 < d_s; ++b2)
                        ls.Axx(row, off_r + b2) += w * psi * sb.val[b2] * jc;
            }
        }
        for (int q = 0; q <= k; ++q) {
            const int row = 4 * d_s + q;
            const Tensor2& T = bub[q].value;
            // (A sigma, v) rows for bubble tests
            for (int c2 = 0; c2 < 4; ++c2) {
                const double a = AE[c2].ddot(T);
                for (int b2 = 0; b2 < d_s; ++b2)
                    ls.Axx(row, c2 * d_s + b2) += w * sb.val[b2] * a;
            }
            for (int q2 = 0; q2 <= k; ++q2)
                ls.Axx(row, 4 * d_s + q2) += w * apply_A(bub[q2].value, mat).ddot(T);
            // (u, div v) with the numerically-evaluated bubble divergence
            for (int d = 0; d < 2; ++d) {
                const double dv = (d == 0) ? bub[q].divergence.x : bub[q].divergence.y;
                for (int b2 = 0; b2 < d_s; ++b2)
                    ls.Axx(row, off_u + d * d_s + b2) += w * sb.val[b2] * dv;
            }
            // (rho, v)
            const double jt = T(0, 1) - T(1, 0);
            for (int b2 = 0; b2 < d_s; ++b2)
                ls.Axx(row, off_r + b2) += w * sb.val[b2] * jt;
        }

        // (sigma, grad w) rows and the source moment
        for (int d = 0; d < 2; ++d) {
            for (int b = 0; b < d_s; ++b) {
                const int row = off_u + d * d_s + b;
                const double gx = sb.dx[b], gy = sb.dy[b];
                // tensor columns: [r==d] psi_b2 (grad psi_b)_cc
                for (int cc = 0; cc < 2; ++cc) {
                    const int c2 = 2 * d + cc;
                    const double g = (cc == 0) ? gx : gy;
                    for (int b2 = 0; b2 < d_s; ++b2)
                        ls.Axx(row, c2 * d_s + b2) += w * sb.val[b2] * g;
                }
                for (int q = 0; q <= k; ++q)
                    ls.Axx(row, 4 * d_s + q) +=
                        w * (bub[q].value(d, 0) * gx + bub[q].value(d, 1) * gy);
                ls.bx(row) -= w * sb.val[b] * (d == 0 ? fval.x : fval.y);
            }
        }

        // (sigma, eta) rows
        for (int b = 0; b < d_s; ++b) {
            const int row = off_r + b;
            const double psi = sb.val[b];
            for (int b2 = 0; b2 < d_s; ++b2) {
                ls.Axx(row, 1 * d_s + b2) += w * psi * sb.val[b2];
                ls.Axx(row, 2 * d_s + b2) -= w * psi * sb.val[b2];
            }
            for (int q = 0; q <= k; ++q)
                ls.Axx(row, 4 * d_s + q) += w * psi * (bub[q].value(0, 1) - bub[q].value(1, 0));
        }
    }

    // face terms
    std::vector<double> L(k + 1);
    for (int fidx = 0; fidx < 3; ++fidx) {
        const int e = m.cell_edges[cell][fidx];
        const Vec2 n = face_outward_normal(m, cell, fidx);
        const bool interior = !m.edges[e].is_boundary();
        const auto qpts = edge_quadrature(m, e, tables.seg);
        const int tr_base = fidx * n_tr;

        for (const auto& qp : qpts) {
            eb.eval(qp.x, 0, sb);
            bubble_basis(k, tri, qp.x, bub);
            edge_basis_values(k, qp.s, L.data());
            const double w = qp.w;

            // traces of the stress basis: (Phi n)_d
            // tensor: [r==d] psi_b n_cc ; bubble: (T n)_d
            for (int c = 0; c < 4; ++c) {
                const int r = c / 2, cc = c % 2;
                const double nc = (cc == 0) ? n.x : n.y;
                for (int b = 0; b < d_s; ++b) {
                    const double tr = sb.val[b] * nc; // component r of Phi n
                    const int col_s = c * d_s + b;
                    for (int mdeg = 0; mdeg <= k; ++mdeg) {
                        const double lm = L[mdeg];
                        // -<uhat, v n> in the constitutive rows
                        ls.Axu(col_s, tr_base + r * (k + 1) + mdeg) -= w * lm * tr;
                        // flux rows on interior faces: +<sigma n, mu>
                        if (interior)
                            ls.Cux(tr_base + r * (k + 1) + mdeg, col_s) += w * lm * tr;
                    }
                    // -<sigma n, w> in the equilibrium rows
                    for (int b2 = 0; b2 < d_s; ++b2)
                        ls.Axx(off_u + r * d_s + b2, col_s) -= w * sb.val[b2] * tr;
                }
            }
            for (int q = 0; q <= k; ++q) {
                const Vec2 Tn = bub[q].value.apply(n);
                const int col_s = 4 * d_s + q;
                for (int d = 0; d < 2; ++d) {
                    const double trd = (d == 0) ? Tn.x : Tn.y;
                    for (int mdeg = 0; mdeg <= k; ++mdeg) {
                        ls.Axu(col_s, tr_base + d * (k + 1) + mdeg) -= w * L[mdeg] * trd;
                        if (interior)
                            ls.Cux(tr_base + d * (k + 1) + mdeg, col_s) += w * L[mdeg] * trd;
                    }
                    for (int b2 = 0; b2 < d_s; ++b2)
                        ls.Axx(off_u + d * d_s + b2, col_s) -= w * sb.val[b2] * trd;
                }
            }

            // stabilization terms
            for (int d = 0; d < 2; ++d) {
                for (int b = 0; b < d_s; ++b) {
                    const int row_u = off_u + d * d_s + b;
                    for (int b2 = 0; b2 < d_s; ++b2)
                        ls.Axx(row_u, off_u + d * d_s + b2) += cfg.tau * w * sb.val[b] * sb.val[b2];
                    for (int mdeg = 0; mdeg <= k; ++mdeg)
                        ls.Axu(row_u, tr_base + d * (k + 1) + mdeg) -=
                            cfg.tau * w * sb.val[b] * L[mdeg];
                    if (interior) {
                        for (int mdeg = 0; mdeg <= k; ++mdeg)
                            ls.Cux(tr_base + d * (k + 1) + mdeg, off_u + d * d_s + b) -=
                                cfg.tau * w * L[mdeg] * sb.val[b];
                    }
                }
                if (interior) {
                    for (int mdeg = 0; mdeg <= k; ++mdeg)
                        for (int m2 = 0; m2 <= k; ++m2)
                            ls.Muu(tr_base + d * (k + 1) + mdeg, tr_base + d * (k + 1) + m2) +=
                                cfg.tau * w * L[mdeg] * L[m2];
                }
            }
        }
    }
    return ls;
}

BoundaryRow assemble_boundary_transfer(const Mesh& m, int edge, const TransferPathSet& paths,
                                       const SpaceTables& tables, const MaterialParams& mat,
                                       const VectorField& g) {
    const int k = tables.k;
    const auto dofs = tables.dofs();
    const int n_tr = 2 * (k + 1);
    const auto* family = paths.find_edge(edge);
    if (family == nullptr || static_cast<int>(family->size()) != tables.seg.size())
        throw PreconditionError("assemble_boundary_transfer: missing paths for edge " +
                                std::to_string(edge));

    BoundaryRow row;
    row.M.setZero(n_tr, n_tr);
    row.Q_sigma.setZero(n_tr, dofs.n_sigma);
    row.Q_rho.setZero(n_tr, dofs.n_rho);
    row.r.setZero(n_tr);

    const double len = m.edge_length(edge);
    std::vector<double> L(k + 1);
    Eigen::MatrixXd Bs, Br;
    for (int q = 0; q < tables.seg.size(); ++q) {
        const TransferPath& p = (*family)[q];
        const double s = tables.seg.points[q];
        const double w = tables.seg.weights[q] * len;
        edge_basis_values(k, s, L.data());
        transfer_row_blocks(p, m, tables, mat, Bs, Br);
        const Vec2 gval = g(p.xbar);
        for (int d = 0; d < 2; ++d) {
            for (int mdeg = 0; mdeg <= k; ++mdeg) {
                const int i = d * (k + 1) + mdeg;
                const double wl = w * L[mdeg];
                for (int m2 = 0; m2 <= k; ++m2)
                    row.M(i, d * (k + 1) + m2) += wl * L[m2];
                row.Q_sigma.row(i) += wl * Bs.row(d);
                row.Q_rho.row(i) += wl * Br.row(d);
                row.r(i) += wl * (d == 0 ? gval.x : gval.y);
            }
        }
    }
    return row;
}

SchurBlock condense(LocalSystem& local) {
    if (!local.factorized) {
        local.Axx_lu.compute(local.Axx);
        const double rc = local.Axx_lu.rcond();
        if (!(rc > 1e-14))
            throw AssemblyError("condense: singular local block on cell " +
                                    std::to_string(local.cell),
                                local.cell);
        local.factorized = true;
    }
    SchurBlock s;
    s.S = local.Muu - local.Cux * local.Axx_lu.solve(local.Axu);
    s.rhs = local.ru - local.Cux * local.Axx_lu.solve(local.bx);
    return s;
}

GlobalSystem assemble_global(const Mesh& m, const SpaceTables& tables, const MaterialParams& mat,
                             const HdgConfig& cfg, const VectorField& f, const VectorField& g,
                             const TransferPathSet& paths, std::vector<LocalSystem>& locals) {
    if (!(cfg.tau > 0.0))
        throw ConfigError("assemble_global: the stabilization parameter must be positive");
    if (cfg.k < 1 || cfg.k != tables.k)
        throw ConfigError("assemble_global: degree mismatch between config and tables");
    const int k = tables.k;
    const int n_tr = 2 * (k + 1);
    const int n_cells = m.n_cells();

    locals.clear();
    locals.resize(n_cells);
    std::vector<std::exception_ptr> errors(n_cells);
    parallel_for(n_cells, [&](int c) {
        try {
            locals[c] = assemble_local(m, c, tables, mat, cfg, f);
        } catch (...) {
            errors[c] = std::current_exception();
        }
    });
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    // boundary rows replace the flux rows on boundary faces
    for (int e = 0; e < m.n_edges(); ++e) {
        if (!m.edges[e].is_boundary()) continue;
        const int c = m.edges[e].left;
        int fidx = -1;
        for (int fcand = 0; fcand < 3; ++fcand)
            if (m.cell_edges[c][fcand] == e) fidx = fcand;
        const BoundaryRow row = assemble_boundary_transfer(m, e, paths, tables, mat, g);
        LocalSystem& ls = locals[c];
        const int base = fidx * n_tr;
        const auto dofs = tables.dofs();
        ls.Muu.block(base, base, n_tr, n_tr) = row.M;
        ls.Cux.block(base, 0, n_tr, dofs.n_sigma) = row.Q_sigma;
        ls.Cux.block(base, dofs.n_sigma + dofs.n_u, n_tr, dofs.n_rho) = row.Q_rho;
        ls.ru.segment(base, n_tr) = row.r;
    }

    std::vector<SchurBlock> schur(n_cells);
    parallel_for(n_cells, [&](int c) {
        try {
            schur[c] = condense(locals[c]);
        } catch (...) {
            errors[c] = std::current_exception();
        }
    });
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    GlobalSystem gs;
    gs.k = k;
    gs.n_edges = m.n_edges();
    const int n_dofs = n_tr * m.n_edges();
    gs.b.setZero(n_dofs);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(n_cells) * 9 * n_tr * n_tr);
    for (int c = 0; c < n_cells; ++c) {
        const auto& edges = m.cell_edges[c];
        for (int fi = 0; fi < 3; ++fi) {
            const int row0 = edges[fi] * n_tr;
            for (int i = 0; i < n_tr; ++i) {
                gs.b(row0 + i) += schur[c].rhs(fi * n_tr + i);
                for (int fj = 0; fj < 3; ++fj) {
                    const int col0 = edges[fj] * n_tr;
                    for (int j = 0; j < n_tr; ++j) {
                        const double v = schur[c].S(fi * n_tr + i, fj * n_tr + j);
                        if (v != 0.0) trip.emplace_back(row0 + i, col0 + j, v);
                    }
                }
            }
        }
    }
    gs.A.resize(n_dofs, n_dofs);
    gs.A.setFromTriplets(trip.begin(), trip.end());
    return gs;
}

Eigen::VectorXd solve(const GlobalSystem& gs, const HdgConfig& cfg) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(gs.A);
    lu.factorize(gs.A);
    if (lu.info() != Eigen::Success)
        throw SolverError("solve: sparse factorization failed", -1.0);
    Eigen::VectorXd x = lu.solve(gs.b);
    // one step of iterative refinement
    x += lu.solve(gs.b - gs.A * x);
    const double bn = gs.b.norm();
    const double res = (gs.A * x - gs.b).norm();
    const double rel = (bn > 0.0) ? res / bn : res;
    if (!(rel <= cfg.solver_tol))
        throw SolverError("solve: relative residual " + std::to_string(rel) +
                              " above tolerance",
                          rel);
    return x;
}

SolutionFields reconstruct(const Mesh& m, const SpaceTables& tables, const MaterialParams& mat,
                           const HdgConfig& cfg, std::vector<LocalSystem>& locals,
                           const Eigen::VectorXd& uhat, const TransferPathSet& paths,
                           const VectorField& g) {
    const int k = tables.k;
    const int n_tr = 2 * (k + 1);
    const auto dofs = tables.dofs();

    SolutionFields sol;
    sol.k = k;
    sol.tau = cfg.tau;
    sol.dofs = dofs;
    sol.uhat = uhat;
    sol.X.resize(m.n_cells());

    parallel_for(m.n_cells(), [&](int c) {
        Eigen::VectorXd ue(3 * n_tr);
        for (int fi = 0; fi < 3; ++fi)
            ue.segment(fi * n_tr, n_tr) = uhat.segment(m.cell_edges[c][fi] * n_tr, n_tr);
        if (!locals[c].factorized) condense(locals[c]);
        sol.X[c] = locals[c].Axx_lu.solve(locals[c].bx - locals[c].Axu * ue);
    });

    // certificates
    const double tiny = 1e-300;

    // (3.2c) weak symmetry
    double sigma_l2 = 0.0;
    double ws_num = 0.0;
    ScalarBasisPoint sb;
    for (int c = 0; c < m.n_cells(); ++c) {
        const PhysTriangle tri = m.cell_triangle(c);
        const ElementBasis eb(k, tri);
        const double detJ = tri.det_jacobian();
        std::vector<double> res(tables.d_s(), 0.0);
        double s2 = 0.0;
        for (int ip = 0; ip < tables.tri.size(); ++ip) {
            const Vec2 x = tri.map(tables.tri.points[ip]);
            const double w = tables.tri.weights[ip] * detJ;
            const Tensor2 sg = eval_stress_coeffs(k, tri, sol.sigma_coeffs(c), x);
            s2 += w * sg.ddot(sg);
            eb.eval(x, 0, sb);
            const double anti = sg(0, 1) - sg(1, 0);
            for (int b = 0; b < tables.d_s(); ++b) res[b] += w * sb.val[b] * anti;
        }
        sigma_l2 += s2;
        const double eta_norm = std::sqrt(2.0 * detJ);
        for (double r : res) ws_num = std::max(ws_num, std::abs(r) / eta_norm);
    }
    sigma_l2 = std::sqrt(sigma_l2);
    sol.weak_symmetry_residual = ws_num / (sigma_l2 + tiny);

    // interior flux continuity of sigma_hat n from the solved fields
    double flux_num = 0.0, flux_den = 0.0;
    std::vector<double> L(k + 1);
    for (int e = 0; e < m.n_edges(); ++e) {
        if (m.edges[e].is_boundary()) continue;
        const auto qpts = edge_quadrature(m, e, tables.seg);
        const double sq = std::sqrt(m.edge_length(e));
        const int cl = m.edges[e].left, cr = m.edges[e].right;
        std::vector<double> jump(n_tr, 0.0), one_side(n_tr, 0.0);
        for (const auto& qp : qpts) {
            const Vec2 a = sol.sigma_hat_n(m, cl, e, qp.s);
            const Vec2 b = sol.sigma_hat_n(m, cr, e, qp.s);
            edge_basis_values(k, qp.s, L.data());
            for (int d = 0; d < 2; ++d) {
                const double av = (d == 0) ? a.x : a.y;
                const double bv = (d == 0) ? b.x : b.y;
                for (int mdeg = 0; mdeg <= k; ++mdeg) {
                    jump[d * (k + 1) + mdeg] += qp.w * L[mdeg] * (av + bv);
                    one_side[d * (k + 1) + mdeg] += qp.w * L[mdeg] * av;
                }
            }
        }
        for (int i = 0; i < n_tr; ++i) {
            flux_num = std::max(flux_num, std::abs(jump[i]) / sq);
            flux_den = std::max(flux_den, std::abs(one_side[i]) / sq);
        }
    }
    sol.flux_residual = flux_num / (flux_den + tiny);

    // (3.2e) boundary rows with gtilde recomputed from the solved fields
    double bd_num = 0.0, bd_den = 0.0;
    for (int e = 0; e < m.n_edges(); ++e) {
        if (!m.edges[e].is_boundary()) continue;
        const auto* family = paths.find_edge(e);
        const auto qpts = edge_quadrature(m, e, tables.seg);
        const double sq = std::sqrt(m.edge_length(e));
        const int c = m.edges[e].left;
        std::vector<double> res(n_tr, 0.0), den(n_tr, 0.0);
        for (size_t q = 0; q < qpts.size(); ++q) {
            const TransferPath& p = (*family)[q];
            const Vec2 gt = g(p.xbar) - segment_moment(p, sol.sigma_coeffs(c),
                                                       sol.rho_coeffs(c), mat, tables, m);
            const Vec2 uh = sol.uhat_at(e, qpts[q].s);
            edge_basis_values(k, qpts[q].s, L.data());
            for (int d = 0; d < 2; ++d) {
                const double rv = (d == 0) ? (uh.x - gt.x) : (uh.y - gt.y);
                const double dv = (d == 0) ? gt.x : gt.y;
                for (int mdeg = 0; mdeg <= k; ++mdeg) {
                    res[d * (k + 1) + mdeg] += qpts[q].w * L[mdeg] * rv;
                    den[d * (k + 1) + mdeg] += qpts[q].w * L[mdeg] * dv;
                }
            }
        }
        for (int i = 0; i < n_tr; ++i) {
            bd_num = std::max(bd_num, std::abs(res[i]) / sq);
            bd_den = std::max(bd_den, std::abs(den[i]) / sq);
        }
    }
    const double uhat_scale = uhat.size() ? uhat.cwiseAbs().maxCoeff() : 0.0;
    sol.boundary_residual = bd_num / (std::max(bd_den, uhat_scale) + tiny);

    return sol;
}

void export_matrix_market(const GlobalSystem& gs, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("export_matrix_market: cannot open " + path);
    char buf[96];
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << gs.A.rows() << ' ' << gs.A.cols() << ' ' << gs.A.nonZeros() << '\n';
    for (int c = 0; c < gs.A.outerSize(); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(gs.A, c); it; ++it) {
            std::snprintf(buf, sizeof(buf), "%ld %ld %.17g", static_cast<long>(it.row()) + 1,
                          static_cast<long>(it.col()) + 1, it.value());
            os << buf << '\n';
        }
    }
    std::ofstream osr(path + ".rhs");
    if (!osr) throw Error("export_matrix_market: cannot open " + path + ".rhs");
    osr << "%%MatrixMarket matrix array real general\n";
    osr << gs.b.size() << " 1\n";
    for (Eigen::Index i = 0; i < gs.b.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", gs.b(i));
        osr << buf << '\n';
    }
}

} // namespace uhdg
