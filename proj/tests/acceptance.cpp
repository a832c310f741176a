// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Each criterion prints one [PASS]/[FAIL] line; the exit
// code is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "uhdg/diagnostics.hpp"
#include "uhdg/hdg.hpp"
#include "uhdg/study.hpp"

#include "oracles.hpp"

using namespace uhdg;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    if (!pass) ++g_failures;
}

struct StudyOutcome {
    ErrorReport report;
    double worst_certificate = 0.0;
    bool paths_valid = true;
};

// convergence run that also collects certificates and path validity
StudyOutcome run_study(const std::string& domain, int k, double nu, int base, int levels,
                       const std::string& solution = "paper-trig") {
    StudyConfig cfg;
    cfg.domain = domain;
    cfg.k = k;
    cfg.nu = nu;
    cfg.base_resolution = base;
    cfg.levels = levels;
    cfg.solution = solution;
    cfg.out = "acceptance_" + domain + "_k" + std::to_string(k) + "_nu" + std::to_string(nu);

    StudyOutcome out;
    const DomainGeometry geo = domain_geometry(cfg);
    for (int level = 0; level < levels; ++level) {
        RunResult r = run_single(cfg, level);
        out.report.rows.push_back(r.errors);
        out.worst_certificate =
            std::max({out.worst_certificate, r.sol.weak_symmetry_residual, r.sol.flux_residual,
                      r.sol.boundary_residual});
        // transfer-path validity certificates
        if (!r.paths.non_crossing_certified) out.paths_valid = false;
        const CellLocator locator(r.mesh);
        for (const auto& fam : r.paths.paths) {
            for (const auto& path : fam) {
                if (std::abs(geo.phi(path.xbar)) > 1e-10) out.paths_valid = false;
                if (path.l <= 0.0) continue;
                for (int i = 1; i <= 16; ++i) {
                    const Vec2 q = path.x + (path.l * i / 17.0) * path.t;
                    if (locator.contains(q)) out.paths_valid = false;
                    if (geo.phi(q) > 1e-12) out.paths_valid = false;
                }
            }
        }
    }
    out.report.compute_eocs();
    return out;
}

bool in_window(double v, double lo, double hi) { return v >= lo && v <= hi; }

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), f, a, b, c);
    return buf;
}

std::vector<const StudyOutcome*> g_accepted_runs;
StudyOutcome g_square[3];
StudyOutcome g_immersed[4];

void criterion1() {
    bool pass = true;
    std::string detail = "fitted-square baseline EOC:";
    for (int k : {1, 2, 3}) {
        const auto t0 = std::chrono::steady_clock::now();
        StudyOutcome& out = g_square[k - 1];
        out = run_study("square", k, 0.3, 4, 4);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const auto& last = out.report.rows.back();
        const double lo = k + 0.7, hi = k + 1.3;
        const bool ok = last.eoc_sigma && in_window(*last.eoc_sigma, lo, hi) && last.eoc_u &&
                        in_window(*last.eoc_u, lo, hi) && last.eoc_rho &&
                        in_window(*last.eoc_rho, lo, hi) && secs <= 120.0;
        pass = pass && ok;
        detail += fmt(" k=%.0f(s=%.2f,u=%.2f", static_cast<double>(k), *last.eoc_sigma,
                      *last.eoc_u) +
                  fmt(",r=%.2f,t=%.1fs)", *last.eoc_rho, secs);
    }
    report(1, pass, detail);
    for (auto& r : g_square) g_accepted_runs.push_back(&r);
}

void criterion3() {
    bool pass = true;
    std::string detail = "immersed disk/kidney:";
    int idx = 0;
    for (const char* domain : {"disk-immersed", "kidney-immersed"}) {
        const int base = (std::string(domain) == "disk-immersed") ? 8 : 12;
        for (int k : {1, 2}) {
            StudyOutcome& out = g_immersed[idx++];
            out = run_study(domain, k, 0.3, base, 4);
            const auto& last = out.report.rows.back();
            const double lo = k + 0.6;
            const bool ok = last.eoc_sigma && *last.eoc_sigma >= lo && last.eoc_u &&
                            *last.eoc_u >= lo && last.eoc_rho && *last.eoc_rho >= lo &&
                            out.paths_valid;
            pass = pass && ok;
            detail += " " + std::string(1, domain[0]) + "-k" + std::to_string(k) +
                      fmt("(s=%.2f,u=%.2f,r=%.2f", *last.eoc_sigma, *last.eoc_u,
                          *last.eoc_rho) +
                      std::string(out.paths_valid ? ",paths-ok)" : ",paths-BAD)");
        }
    }
    report(3, pass, detail);
}

void criterion4() {
    bool pass = true;
    std::string detail = "zero-data uniqueness:";
    auto zero = [](Vec2) { return Vec2{0.0, 0.0}; };
    struct Dom {
        const char* name;
        int res;
    };
    for (const Dom d : {Dom{"square", 4}, Dom{"disk-fitted", 4}, Dom{"disk-immersed", 8},
                        Dom{"kidney-immersed", 12}}) {
        StudyConfig cfg;
        cfg.domain = d.name;
        cfg.k = 1;
        cfg.base_resolution = d.res;
        const DomainGeometry geo = domain_geometry(cfg);
        const SpaceTables tables = SpaceTables::build(1);
        const MaterialParams mat = lame_from_E_nu(1.0, 0.3);
        HdgConfig hcfg;
        hcfg.k = 1;
        const Mesh mesh = build_domain_mesh(cfg, geo, 0);
        const TransferPathSet paths = build_paths(mesh, geo, tables);
        std::vector<LocalSystem> locals;
        const GlobalSystem gs =
            assemble_global(mesh, tables, mat, hcfg, zero, zero, paths, locals);
        const Eigen::VectorXd uhat = solve(gs, hcfg);
        const SolutionFields sol =
            reconstruct(mesh, tables, mat, hcfg, locals, uhat, paths, zero);
        // L2 norms of all fields via the error machinery against zero
        ManufacturedSolution zero_ex;
        zero_ex.u = zero;
        zero_ex.sigma = [](Vec2) { return Tensor2{}; };
        zero_ex.rho_q = [](Vec2) { return 0.0; };
        const ErrorRow norms = error_norms(sol, zero_ex, mesh, tables);
        const double worst =
            std::max({norms.err_sigma, norms.err_u, norms.err_rho, norms.err_uhat});
        pass = pass && worst <= 1e-9;
        detail += " " + std::string(d.name) + fmt("=%.1e", worst);
    }
    report(4, pass, detail);
}

void criterion5() {
    double worst = 0.0;
    for (const auto* out : g_accepted_runs) worst = std::max(worst, out->worst_certificate);
    report(5, worst <= 1e-9,
           fmt("max residual certificate over all accepted runs = %.2e (limit 1e-9)", worst));
}

void criterion6() {
    std::mt19937 rng(20240601);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    double worst_div = 0.0, worst_trace = 0.0;
    for (int k : {1, 2, 3}) {
        const SpaceTables tables = SpaceTables::build(k);
        std::vector<BubbleValue> bub;
        int done = 0;
        while (done < 100) {
            // random unit-scale cells with a bounded inradius; the divergence
            // cancellation is algebraic, the residual is pure roundoff and
            // grows like the fourth power of the element anisotropy
            const PhysTriangle tri{{d(rng), d(rng)}, {d(rng), d(rng)}, {d(rng), d(rng)}};
            if (tri.det_jacobian() < 0.2 || tri.inradius() < 0.15) continue;
            ++done;
            for (int ip = 0; ip < tables.tri.size(); ++ip) {
                bubble_basis(k, tri, tri.map(tables.tri.points[ip]), bub);
                for (const auto& b : bub)
                    worst_div = std::max(worst_div, std::abs(b.divergence.x) +
                                                        std::abs(b.divergence.y));
            }
            const Vec2 verts[3] = {tri.v0, tri.v1, tri.v2};
            for (int e = 0; e < 3; ++e) {
                const Vec2 a = verts[e], b2 = verts[(e + 1) % 3];
                const Vec2 n = (Vec2{(b2 - a).y, -(b2 - a).x}).normalized() * -1.0;
                for (int q = 0; q < tables.seg.size(); ++q) {
                    const Vec2 x = a + tables.seg.points[q] * (b2 - a);
                    bubble_basis(k, tri, x, bub);
                    for (const auto& bb : bub)
                        worst_trace = std::max(worst_trace, bb.value.apply(n).norm());
                }
            }
        }
    }
    report(6, worst_div <= 1e-12 && worst_trace <= 1e-12,
           fmt("bubbles on 300 random cells: max |div| = %.2e, max |Tn| = %.2e", worst_div,
               worst_trace));
}

void criterion7() {
    bool pass = true;
    std::string detail;

    // (a) condensed vs monolithic on meshes <= 32 cells
    {
        double worst = 0.0;
        const MaterialParams mat = lame_from_E_nu(1.0, 0.3);
        const ManufacturedSolution ex = manufactured_catalog("paper-trig", mat);
        struct Case {
            const char* domain;
            int res;
            int k;
        };
        for (const Case c : {Case{"square", 2, 1}, Case{"square", 2, 2},
                             Case{"disk-fitted", 1, 2}, Case{"disk-fitted", 2, 1}}) {
            StudyConfig cfg;
            cfg.domain = c.domain;
            cfg.k = c.k;
            cfg.base_resolution = c.res;
            const DomainGeometry geo = domain_geometry(cfg);
            const SpaceTables tables = SpaceTables::build(c.k);
            HdgConfig hcfg;
            hcfg.k = c.k;
            const Mesh mesh = build_domain_mesh(cfg, geo, 0);
            if (mesh.n_cells() > 32) continue;
            const TransferPathSet paths = build_paths(mesh, geo, tables);
            std::vector<LocalSystem> locals;
            const GlobalSystem gs =
                assemble_global(mesh, tables, mat, hcfg, ex.f, ex.g, paths, locals);
            const Eigen::VectorXd uhat = solve(gs, hcfg);
            const SolutionFields sol =
                reconstruct(mesh, tables, mat, hcfg, locals, uhat, paths, ex.g);
            std::vector<Eigen::VectorXd> Xm;
            Eigen::VectorXd uhat_m;
            testing::monolithic_solve(mesh, tables, locals, Xm, uhat_m);
            worst = std::max(worst, (uhat_m - sol.uhat).cwiseAbs().maxCoeff() /
                                        (1.0 + uhat_m.cwiseAbs().maxCoeff()));
            for (int cc = 0; cc < mesh.n_cells(); ++cc)
                worst = std::max(worst, (Xm[cc] - sol.X[cc]).cwiseAbs().maxCoeff() /
                                            (1.0 + Xm[cc].cwiseAbs().maxCoeff()));
        }
        pass = pass && worst <= 1e-10;
        detail += fmt("monolithic=%.1e", worst);
    }

    // (b) segment moments vs 1e4-point midpoint rule
    {
        std::mt19937 rng(55);
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        const MaterialParams mat = lame_from_E_nu(1.0, 0.3);
        const DomainGeometry disk = geometry_from_name("unit-disk");
        double worst = 0.0;
        for (int k : {1, 2, 3}) {
            const SpaceTables tables = SpaceTables::build(k);
            const Mesh m = build_fitted_disk_mesh(2);
            const TransferPathSet set = build_paths(m, disk, tables);
            for (int trial = 0; trial < 3; ++trial) {
                const auto& fam = set.paths[trial % set.paths.size()];
                const TransferPath& p = fam.front();
                if (p.l <= 0.0) continue;
                std::vector<double> cs(tables.dofs().n_sigma), cr(tables.d_s());
                for (auto& v : cs) v = d(rng);
                for (auto& v : cr) v = d(rng);
                const Vec2 fast = segment_moment(p, cs, cr, mat, tables, m);
                const PhysTriangle tri = m.cell_triangle(p.owner_cell);
                Vec2 slow{0.0, 0.0};
                const int N = 10000;
                for (int i = 0; i < N; ++i) {
                    const double s = (i + 0.5) / N * p.l;
                    const Vec2 x = p.x + s * p.t;
                    Tensor2 integrand = apply_A(eval_stress_coeffs(k, tri, cs, x), mat);
                    const double q = eval_scalar_coeffs(k, tri, cr, x);
                    integrand(0, 1) += q;
                    integrand(1, 0) -= q;
                    slow += (p.l / N) * integrand.apply(p.t);
                }
                worst = std::max(worst, (fast - slow).norm() / (1.0 + fast.norm()));
            }
        }
        pass = pass && worst <= 1e-12;
        detail += fmt(", segment=%.1e", worst);
    }

    // (c) local assembly vs degree-(2k+10) over-integration
    {
        auto f = [](Vec2 p) {
            return Vec2{0.3 + p.x - 2.0 * p.y + p.x * p.x * p.x, p.x * p.y * p.y - 0.5};
        };
        const MaterialParams mat = lame_from_E_nu(1.0, 0.3);
        HdgConfig hcfg;
        double worst = 0.0;
        std::mt19937 rng(77);
        for (int k : {1, 2, 3}) {
            hcfg.k = k;
            const SpaceTables tables = SpaceTables::build(k);
            const Mesh mesh = build_fitted_disk_mesh(1);
            const int cell = std::uniform_int_distribution<int>(0, mesh.n_cells() - 1)(rng);
            const LocalSystem ls = assemble_local(mesh, cell, tables, mat, hcfg, f);
            const auto oracle =
                testing::over_integrated_local(mesh, cell, tables, mat, hcfg, f);
            const double scale = ls.Axx.cwiseAbs().maxCoeff();
            worst = std::max(worst, (oracle.Axx - ls.Axx).cwiseAbs().maxCoeff() / scale);
            worst = std::max(worst, (oracle.Axu - ls.Axu).cwiseAbs().maxCoeff() / scale);
            worst = std::max(worst, (oracle.bx - ls.bx).cwiseAbs().maxCoeff() /
                                        (1.0 + ls.bx.cwiseAbs().maxCoeff()));
        }
        pass = pass && worst <= 1e-12;
        detail += fmt(", over-integration=%.1e", worst);
    }
    report(7, pass, "oracle equivalence: " + detail);
}

void criterion8() {
    bool pass = true;
    std::string detail;
    const DomainGeometry disk = geometry_from_name("unit-disk");

    // (a) C_tr vs 1e4 random samples at k=1
    {
        const SpaceTables tables = SpaceTables::build(1);
        const Mesh m = build_fitted_disk_mesh(2);
        const TransferPathSet paths = build_paths(m, disk, tables);
        const DiagnosticsReport rep = diagnostics_constants(m, paths, tables);
        std::mt19937 rng(314159);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const TriangleRule vol = triangle_rule(8);
        const QuadratureRule1D edge_rule = gauss_rule_01(6);
        bool ok = true;
        double worst_gap = 0.0;
        int checked = 0;
        for (const auto& ed : rep.edges) {
            if (checked >= 6) break;
            ++checked;
            const int cell = m.edges[ed.edge].left;
            const PhysTriangle tri = m.cell_triangle(cell);
            const ElementBasis eb(1, tri);
            const double len = m.edge_length(ed.edge);
            Eigen::Matrix3d Ge = Eigen::Matrix3d::Zero(), Gk = Eigen::Matrix3d::Zero();
            ScalarBasisPoint sb;
            for (int q = 0; q < edge_rule.size(); ++q) {
                const Vec2 x = m.edge_point(ed.edge, edge_rule.points[q]);
                eb.eval(x, 0, sb);
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j)
                        Ge(i, j) += edge_rule.weights[q] * len * sb.val[i] * sb.val[j];
            }
            for (int ip = 0; ip < vol.size(); ++ip) {
                const Vec2 x = tri.map(vol.points[ip]);
                eb.eval(x, 0, sb);
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j)
                        Gk(i, j) +=
                            vol.weights[ip] * tri.det_jacobian() * sb.val[i] * sb.val[j];
            }
            double best = 0.0;
            for (int s = 0; s < 10000; ++s) {
                Eigen::Vector3d v{gauss(rng), gauss(rng), gauss(rng)};
                best = std::max(best, std::sqrt(len * v.dot(Ge * v) / v.dot(Gk * v)));
            }
            ok = ok && ed.C_tr >= best * (1.0 - 1e-9) && (ed.C_tr - best) <= 0.02 * ed.C_tr;
            worst_gap = std::max(worst_gap, (ed.C_tr - best) / ed.C_tr);
        }
        pass = pass && ok;
        detail += fmt("C_tr sample gap=%.4f%%", 100.0 * worst_gap);
    }

    // (b) C_inv invariance under uniform scaling
    {
        DomainGeometry disk2;
        disk2.bbox = {{-2.0, -2.0}, {2.0, 2.0}};
        disk2.phi = [](Vec2 p) { return p.x * p.x + p.y * p.y - 4.0; };
        disk2.grad = [](Vec2 p) { return Vec2{2.0 * p.x, 2.0 * p.y}; };
        disk2.hess = [](Vec2) { return std::array<double, 3>{2.0, 0.0, 2.0}; };
        register_level_set("acceptance-disk-r2", disk2);
        const SpaceTables tables = SpaceTables::build(2);
        const Mesh m1 = build_fitted_disk_mesh(2);
        Mesh m2 = m1;
        for (Vec2& v : m2.vertices) v = 2.0 * v;
        std::stringstream ss;
        write_mesh(m2, ss);
        m2 = read_mesh(ss);
        const TransferPathSet p1 = build_paths(m1, disk, tables);
        const TransferPathSet p2 =
            build_paths(m2, geometry_from_name("acceptance-disk-r2"), tables);
        const DiagnosticsReport r1 = diagnostics_constants(m1, p1, tables);
        const DiagnosticsReport r2 = diagnostics_constants(m2, p2, tables);
        double worst = 0.0;
        for (size_t i = 0; i < r1.edges.size(); ++i)
            worst = std::max(worst, std::abs(r1.edges[i].C_inv - r2.edges[i].C_inv) /
                                        std::abs(r1.edges[i].C_inv));
        pass = pass && worst <= 1e-8;
        detail += fmt(", C_inv scaling drift=%.1e", worst);
    }

    // (c) R decays like h on fitted-disk meshes
    {
        const SpaceTables tables = SpaceTables::build(1);
        double prev = -1.0;
        bool ok = true;
        for (int rings : {4, 8, 16, 32}) {
            const Mesh m = build_fitted_disk_mesh(rings);
            const TransferPathSet paths = build_paths(m, disk, tables);
            const MeshMetrics mm = compute_mesh_metrics(m, paths);
            if (prev > 0.0) {
                const double ratio = prev / mm.R;
                ok = ok && ratio >= 2.0 * 0.8 && ratio <= 2.0 * 1.2;
            }
            prev = mm.R;
        }
        pass = pass && ok;
        detail += std::string(", R ~ h ratio ") + (ok ? "within 20%" : "OUT OF BAND");
    }
    report(8, pass, detail);
}

} // namespace

int main() {
    std::printf("acceptance suite (tau = 1, E = 1)\n");

    criterion1();

    // criteria 2 and 3 collect the runs criterion 5 audits
    static StudyOutcome c2_runs[6];
    {
        // run criterion 2 and stash outcomes for the certificate audit
        int idx = 0;
        for (int k : {1, 2, 3}) {
            c2_runs[idx++] = run_study("disk-fitted", k, 0.3, 4, 4);
            c2_runs[idx++] = run_study("disk-fitted", k, 0.4999, 4, 4);
        }
        // evaluate criterion 2 from the stashed outcomes
        bool pass = true;
        std::string detail = "interpolated disk:";
        for (int k : {1, 2, 3}) {
            const StudyOutcome& a = c2_runs[2 * (k - 1)];
            const StudyOutcome& b = c2_runs[2 * (k - 1) + 1];
            const double lo = k + 0.7, hi = k + 1.3;
            const auto& ra = a.report.rows.back();
            const auto& rb = b.report.rows.back();
            bool ok = true;
            for (const auto* r : {&ra, &rb}) {
                ok = ok && r->eoc_sigma && in_window(*r->eoc_sigma, lo, hi);
                ok = ok && r->eoc_u && in_window(*r->eoc_u, lo, hi);
                ok = ok && r->eoc_rho && in_window(*r->eoc_rho, lo, hi);
                ok = ok && r->eoc_uhat && *r->eoc_uhat >= k + 0.8;
            }
            for (size_t lev = 0; lev < a.report.rows.size(); ++lev) {
                ok = ok && b.report.rows[lev].err_sigma >= a.report.rows[lev].err_sigma;
                ok = ok && b.report.rows[lev].err_u >= a.report.rows[lev].err_u;
                ok = ok && b.report.rows[lev].err_rho >= a.report.rows[lev].err_rho;
            }
            ok = ok && std::abs(*ra.eoc_sigma - *rb.eoc_sigma) <= 0.3;
            ok = ok && std::abs(*ra.eoc_u - *rb.eoc_u) <= 0.3;
            ok = ok && std::abs(*ra.eoc_rho - *rb.eoc_rho) <= 0.3;
            ok = ok && a.paths_valid && b.paths_valid;
            pass = pass && ok;
            detail += fmt(" k=%.0f(s=%.2f/%.2f", static_cast<double>(k), *ra.eoc_sigma,
                          *rb.eoc_sigma) +
                      fmt(",uhat=%.2f/%.2f)", *ra.eoc_uhat, *rb.eoc_uhat);
        }
        report(2, pass, detail);
        for (auto& r : c2_runs) g_accepted_runs.push_back(&r);
    }

    criterion3();
    for (auto& r : g_immersed) g_accepted_runs.push_back(&r);

    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();

    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return g_failures;
}
