// SPDX-License-Identifier: Apache-2.0
#include "uhdg/diagnostics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace uhdg {

namespace {

// largest generalized eigenvalue of the pencil (G_num, G_den), G_den PSD with
// a possible nullspace: reduce to the regular subspace, then power iteration.
double pencil_sup(const Eigen::MatrixXd& G_num, const Eigen::MatrixXd& G_den) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G_den);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double emax = ev.maxCoeff();
    if (!(emax > 0.0)) return 0.0;
    std::vector<int> kept;
    for (int i = 0; i < ev.size(); ++i)
        if (ev(i) > 1e-11 * emax) kept.push_back(i);
    const int r = static_cast<int>(kept.size());
    Eigen::MatrixXd W(G_den.rows(), r);
    for (int i = 0; i < r; ++i)
        W.col(i) = es.eigenvectors().col(kept[i]) / std::sqrt(ev(kept[i]));
    const Eigen::MatrixXd B = W.transpose() * G_num * W;

    // shifted power iteration on the reduced symmetric form
    Eigen::VectorXd v = Eigen::VectorXd::Ones(r).normalized();
    double lambda = 0.0;
    const double shift = 0.0;
    for (int it = 0; it < 20000; ++it) {
        Eigen::VectorXd w = B * v + shift * v;
        const double n = w.norm();
        if (n == 0.0) return 0.0;
        v = w / n;
        const double next = v.dot(B * v);
        if (it > 2 && std::abs(next - lambda) <= 1e-12 * std::max(1.0, std::abs(next))) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return std::max(lambda, 0.0);
}

// Gram matrices of { Phi_j n } over the cell: values and normal derivatives
void stress_normal_grams(const Mesh& m, int cell, const Vec2& n, const SpaceTables& tables,
                         Eigen::MatrixXd& G_val, Eigen::MatrixXd& G_der) {
    const int k = tables.k;
    const int d_s = tables.d_s();
    const int n_sigma = tables.dofs().n_sigma;
    const PhysTriangle tri = m.cell_triangle(cell);
    const ElementBasis eb(k, tri);
    const double detJ = tri.det_jacobian();
    G_val.setZero(n_sigma, n_sigma);
    G_der.setZero(n_sigma, n_sigma);

    ScalarBasisPoint sb;
    std::vector<BubbleValue> bub;
    std::vector<Vec2> vals(n_sigma), ders(n_sigma);
    for (int ip = 0; ip < tables.tri.size(); ++ip) {
        const Vec2 x = tri.map(tables.tri.points[ip]);
        const double w = tables.tri.weights[ip] * detJ;
        eb.eval(x, 1, sb);
        bubble_basis(k, tri, x, bub);
        for (int c = 0; c < 4; ++c) {
            const int r = c / 2, cc = c % 2;
            const double nc = (cc == 0) ? n.x : n.y;
            for (int b = 0; b < d_s; ++b) {
                Vec2 v{0, 0}, d{0, 0};
                const double tr = sb.val[b] * nc;
                const double dn = (n.x * sb.dx[b] + n.y * sb.dy[b]) * nc;
                if (r == 0) {
                    v.x = tr;
                    d.x = dn;
                } else {
                    v.y = tr;
                    d.y = dn;
                }
                vals[c * d_s + b] = v;
                ders[c * d_s + b] = d;
            }
        }
        for (int q = 0; q <= k; ++q) {
            vals[4 * d_s + q] = bub[q].value.apply(n);
            const Vec2 dx = bub[q].grad_col_x.apply(n);
            const Vec2 dy = bub[q].grad_col_y.apply(n);
            ders[4 * d_s + q] = n.x * dx + n.y * dy;
        }
        for (int i = 0; i < n_sigma; ++i) {
            for (int j = i; j < n_sigma; ++j) {
                G_val(i, j) += w * vals[i].dot(vals[j]);
                G_der(i, j) += w * ders[i].dot(ders[j]);
            }
        }
    }
    G_val = G_val.selfadjointView<Eigen::Upper>();
    G_der = G_der.selfadjointView<Eigen::Upper>();
}

} // namespace

DiagnosticsReport diagnostics_constants(const Mesh& m, const TransferPathSet& paths,
                                        const SpaceTables& tables) {
    const int k = tables.k;
    const int d_s = tables.d_s();
    const MeshMetrics metrics = compute_mesh_metrics(m, paths);
    DiagnosticsReport report;
    report.R = metrics.R;

    ScalarBasisPoint sb;
    for (size_t bi = 0; bi < metrics.boundary_edges.size(); ++bi) {
        const int e = metrics.boundary_edges[bi];
        const Edge& ed = m.edges[e];
        const int cell = ed.left;
        const PhysTriangle tri = m.cell_triangle(cell);
        const ElementBasis eb(k, tri);
        const double detJ = tri.det_jacobian();
        const double len = m.edge_length(e);

        EdgeDiagnostics out;
        out.edge = e;
        out.r_e = metrics.r_e[bi];

        // C_tr: scalar P_k trace constant, ||p||_e <= C_tr h_e^{-1/2} ||p||_K
        Eigen::MatrixXd Ge = Eigen::MatrixXd::Zero(d_s, d_s);
        Eigen::MatrixXd Gk = Eigen::MatrixXd::Zero(d_s, d_s);
        for (int q = 0; q < tables.seg.size(); ++q) {
            const Vec2 x = m.edge_point(e, tables.seg.points[q]);
            const double w = tables.seg.weights[q] * len;
            eb.eval(x, 0, sb);
            for (int i = 0; i < d_s; ++i)
                for (int j = 0; j < d_s; ++j) Ge(i, j) += w * sb.val[i] * sb.val[j];
        }
        for (int ip = 0; ip < tables.tri.size(); ++ip) {
            const Vec2 x = tri.map(tables.tri.points[ip]);
            const double w = tables.tri.weights[ip] * detJ;
            eb.eval(x, 0, sb);
            for (int i = 0; i < d_s; ++i)
                for (int j = 0; j < d_s; ++j) Gk(i, j) += w * sb.val[i] * sb.val[j];
        }
        out.C_tr = std::sqrt(len * pencil_sup(Ge, Gk));

        // C_inv: h_e_perp * sup ||d_n (v n)|| / ||v n|| over V(K) n_e
        Eigen::MatrixXd Gv, Gd;
        stress_normal_grams(m, cell, ed.normal, tables, Gv, Gd);
        out.C_inv = metrics.h_perp[bi] * std::sqrt(pencil_sup(Gd, Gv));

        // C_ext over the swept extrapolation region, via the path geometry
        if (out.r_e <= 1e-14) {
            out.ext_skipped = true;
            out.C_ext = std::numeric_limits<double>::quiet_NaN();
        } else {
            const auto* family = paths.find_edge(e);
            const int n_sigma = tables.dofs().n_sigma;
            Eigen::MatrixXd Gext = Eigen::MatrixXd::Zero(n_sigma, n_sigma);
            std::vector<BubbleValue> bub;
            std::vector<Vec2> vals(n_sigma);
            for (int q = 0; q < tables.seg.size(); ++q) {
                const TransferPath& p = (*family)[q];
                if (p.l <= 0.0) continue;
                for (int s = 0; s < tables.seg.size(); ++s) {
                    const Vec2 x = p.x + (tables.seg.points[s] * p.l) * p.t;
                    const double w =
                        tables.seg.weights[q] * len * tables.seg.weights[s] * p.l;
                    eb.eval(x, 0, sb);
                    bubble_basis(k, tri, x, bub);
                    for (int c = 0; c < 4; ++c) {
                        const int r = c / 2, cc = c % 2;
                        const double nc = (cc == 0) ? ed.normal.x : ed.normal.y;
                        for (int b = 0; b < d_s; ++b) {
                            Vec2 v{0, 0};
                            if (r == 0)
                                v.x = sb.val[b] * nc;
                            else
                                v.y = sb.val[b] * nc;
                            vals[c * d_s + b] = v;
                        }
                    }
                    for (int qq = 0; qq <= k; ++qq)
                        vals[4 * d_s + qq] = bub[qq].value.apply(ed.normal);
                    for (int i = 0; i < n_sigma; ++i)
                        for (int j = i; j < n_sigma; ++j) Gext(i, j) += w * vals[i].dot(vals[j]);
                }
            }
            Gext = Gext.selfadjointView<Eigen::Upper>();
            out.C_ext = std::sqrt(pencil_sup(Gext, Gv)) / std::sqrt(out.r_e);
        }
        report.edges.push_back(out);
    }
    return report;
}

} // namespace uhdg
