// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "uhdg/transfer.hpp"

using namespace uhdg;

namespace {

// L2 projection of an analytic field component onto the cell's scalar basis
std::vector<double> project_scalar(const Mesh& m, int cell, int k,
                                   const std::function<double(Vec2)>& f) {
    const int d_s = scalar_space_dim(k);
    const TriangleRule rule = triangle_rule(2 * k + 10);
    const PhysTriangle tri = m.cell_triangle(cell);
    const ElementBasis eb(k, tri);
    std::vector<double> c(d_s, 0.0);
    ScalarBasisPoint sb;
    for (int ip = 0; ip < rule.size(); ++ip) {
        const Vec2 x = tri.map(rule.points[ip]);
        eb.eval(x, 0, sb);
        for (int i = 0; i < d_s; ++i) c[i] += rule.weights[ip] * f(x) * sb.val[i];
    }
    return c;
}

std::vector<double> project_stress(const Mesh& m, int cell, int k,
                                   const std::function<Tensor2(Vec2)>& f) {
    const int d_s = scalar_space_dim(k);
    std::vector<double> coeffs(4 * d_s + (k + 1), 0.0);
    for (int comp = 0; comp < 4; ++comp) {
        auto fc = [&](Vec2 p) { return f(p).m[comp]; };
        const auto c = project_scalar(m, cell, k, fc);
        for (int i = 0; i < d_s; ++i) coeffs[comp * d_s + i] = c[i];
    }
    return coeffs;
}

} // namespace

TEST_CASE("fitted square paths all have zero length") {
    const SpaceTables tables = SpaceTables::build(2);
    const DomainGeometry square = geometry_from_name("unit-square");
    const Mesh m = build_square_mesh(3);
    const TransferPathSet set = build_paths(m, square, tables);
    CHECK(set.non_crossing_certified);
    for (const auto& fam : set.paths) {
        CHECK(static_cast<int>(fam.size()) == tables.seg.size());
        for (const auto& p : fam) {
            CHECK(p.l == 0.0);
            CHECK(std::abs(p.t.dot(m.edges[p.edge].normal) - 1.0) <= 1e-12);
        }
    }

    std::stringstream ss;
    dump_paths_csv(set, ss);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "edge,qp,x0,y0,x1,y1,l");
}

TEST_CASE("fitted disk paths are radial with l = 1 - |x|") {
    const SpaceTables tables = SpaceTables::build(1);
    const DomainGeometry disk = geometry_from_name("unit-disk");
    const Mesh m = build_fitted_disk_mesh(4);
    const TransferPathSet set = build_paths(m, disk, tables);
    for (const auto& fam : set.paths) {
        for (const auto& p : fam) {
            CHECK(p.l == doctest::Approx(1.0 - p.x.norm()).epsilon(1e-10));
            CHECK(std::abs(p.xbar.norm() - 1.0) <= 1e-10);
            // path invariants
            CHECK(std::abs((p.xbar - p.x).norm() - p.l) <= 1e-13);
            CHECK(std::abs(p.t.dot(p.xbar - p.x) - p.l) <= 1e-13);
        }
    }

    // sagitta bound on H_perp
    const MeshMetrics mm = compute_mesh_metrics(m, set);
    double maxH = 0.0;
    for (double H : mm.H_perp) maxH = std::max(maxH, H);
    CHECK(maxH <= m.h * m.h / 8.0 * 1.2);
}

TEST_CASE("immersed disk paths: bounded length, valid endpoints") {
    const SpaceTables tables = SpaceTables::build(2);
    const DomainGeometry disk = geometry_from_name("unit-disk");
    const Mesh m = build_immersed_mesh(disk, 16);
    const TransferPathSet set = build_paths(m, disk, tables);
    CHECK(set.non_crossing_certified);
    const CellLocator locator(m);
    for (const auto& fam : set.paths) {
        for (const auto& p : fam) {
            CHECK(p.l <= m.h);
            CHECK(std::abs(disk.phi(p.xbar)) <= 1e-10);
            // open segment outside the closed mesh, inside Omega closure
            for (int i = 1; i <= 16; ++i) {
                const Vec2 q = p.x + (p.l * i / 17.0) * p.t;
                CHECK(!locator.contains(q));
                CHECK(disk.phi(q) <= 1e-12);
            }
        }
    }
}

TEST_CASE("fallback ray paths are never shorter than the closest point") {
    const DomainGeometry disk = geometry_from_name("unit-disk");
    const SpaceTables tables = SpaceTables::build(1);
    const Mesh m = build_immersed_mesh(disk, 12);
    for (const Edge& e : m.edges) {
        if (!e.is_boundary()) continue;
        for (int q = 0; q < tables.seg.size(); ++q) {
            const Vec2 x = m.edge_point(&e - m.edges.data(), tables.seg.points[q]);
            const Vec2 cp = closest_point(disk, x);
            const auto [s, hit] = ray_boundary_intersection(disk, x, e.normal, 1.0);
            CHECK(s >= (cp - x).norm() - 1e-12);
        }
    }
}

TEST_CASE("segment moment: degenerate and constant cases") {
    const SpaceTables tables = SpaceTables::build(1);
    const MaterialParams mat = lame_from_E_nu(1.0, 0.3);
    const DomainGeometry square = geometry_from_name("unit-square");
    const Mesh m = build_square_mesh(2);

    TransferPath p;
    p.edge = 0;
    p.qp = 0;
    p.owner_cell = 0;
    p.x = {0.25, 0.0};
    p.t = {1.0, 0.0};
    p.l = 0.0;
    p.xbar = p.x;

    const int n_sigma = tables.dofs().n_sigma;
    std::vector<double> czero(n_sigma, 0.0), rzero(tables.d_s(), 0.0);
    CHECK(segment_moment(p, czero, rzero, mat, tables, m).norm() == 0.0);

    // sigma = I, rho = 0, l = 0.1, t = (1,0) -> (0.1/(2 lambda + 2 mu), 0)
    p.l = 0.1;
    p.xbar = {0.35, 0.0};
    const auto cid = project_stress(m, 0, tables.k, [](Vec2) { return Tensor2::identity(); });
    const Vec2 mom = segment_moment(p, cid, rzero, mat, tables, m);
    CHECK(mom.x == doctest::Approx(0.1 / (2.0 * mat.lambda + 2.0 * mat.mu)).epsilon(1e-13));
    CHECK(std::abs(mom.y) <= 1e-15);
}

TEST_CASE("segment moment matches a brute-force midpoint rule") {
    std::mt19937 rng(4321);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const MaterialParams mat = lame_from_E_nu(1.0, 0.3);
    const DomainGeometry disk = geometry_from_name("unit-disk");

    for (int k : {1, 2, 3}) {
        const SpaceTables tables = SpaceTables::build(k);
        const Mesh m = build_fitted_disk_mesh(2);
        // any boundary edge's first path
        const TransferPathSet set = build_paths(m, disk, tables);
        const TransferPath& p = set.paths.front().front();
        REQUIRE(p.l > 0.0);

        const int n_sigma = tables.dofs().n_sigma;
        std::vector<double> cs(n_sigma), cr(tables.d_s());
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
        CHECK((fast - slow).norm() <= 1e-12 * (1.0 + fast.norm()));
    }
}

TEST_CASE("transfer row blocks are the linearization of the moment") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const MaterialParams mat = lame_from_E_nu(1.0, 0.4999);
    const DomainGeometry disk = geometry_from_name("unit-disk");
    const SpaceTables tables = SpaceTables::build(1);
    const Mesh m = build_fitted_disk_mesh(2);
    const TransferPathSet set = build_paths(m, disk, tables);
    const TransferPath& p = set.paths.front().front();

    Eigen::MatrixXd Bs, Br;
    transfer_row_blocks(p, m, tables, mat, Bs, Br);
    CHECK(Bs.rows() == 2);
    CHECK(Bs.cols() == 14);
    CHECK(Br.cols() == 3);

    const int n_sigma = tables.dofs().n_sigma;
    // one-hot columns reproduce the moment
    for (int j = 0; j < n_sigma; ++j) {
        std::vector<double> cs(n_sigma, 0.0), cr(tables.d_s(), 0.0);
        cs[j] = 1.0;
        const Vec2 mom = segment_moment(p, cs, cr, mat, tables, m);
        CHECK(std::abs(Bs(0, j) - mom.x) <= 1e-12);
        CHECK(std::abs(Bs(1, j) - mom.y) <= 1e-12);
    }
    // bilinearity on random coefficients
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> cs(n_sigma), cr(tables.d_s());
        for (auto& v : cs) v = d(rng);
        for (auto& v : cr) v = d(rng);
        const Vec2 mom = segment_moment(p, cs, cr, mat, tables, m);
        Eigen::VectorXd vs = Eigen::Map<Eigen::VectorXd>(cs.data(), n_sigma);
        Eigen::VectorXd vr = Eigen::Map<Eigen::VectorXd>(cr.data(), tables.d_s());
        const Eigen::Vector2d lin = Bs * vs + Br * vr;
        CHECK(std::abs(lin(0) - mom.x) <= 1e-12 * (1.0 + std::abs(mom.x)));
        CHECK(std::abs(lin(1) - mom.y) <= 1e-12 * (1.0 + std::abs(mom.y)));
    }

    // l = 0 gives zero blocks
    TransferPath p0 = p;
    p0.l = 0.0;
    transfer_row_blocks(p0, m, tables, mat, Bs, Br);
    CHECK(Bs.cwiseAbs().maxCoeff() == 0.0);
    CHECK(Br.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("transferred datum approximates u(x) for interpolated exact fields") {
    const MaterialParams mat = lame_from_E_nu(1.0, 0.3);
    const DomainGeometry disk = geometry_from_name("unit-disk");
    const int k = 1;
    const SpaceTables tables = SpaceTables::build(k);

    // smooth manufactured fields
    auto u = [](Vec2 p) { return Vec2{std::sin(p.x) * std::cos(p.y), std::exp(0.3 * p.x) * p.y}; };
    auto grad_u = [](Vec2 p) {
        return Tensor2{std::cos(p.x) * std::cos(p.y), -std::sin(p.x) * std::sin(p.y),
                       0.3 * std::exp(0.3 * p.x) * p.y, std::exp(0.3 * p.x)};
    };
    auto sigma = [&](Vec2 p) {
        const Tensor2 g = grad_u(p);
        const Tensor2 eps{g(0, 0), 0.5 * (g(0, 1) + g(1, 0)), 0.5 * (g(0, 1) + g(1, 0)), g(1, 1)};
        return apply_Ainv(eps, mat);
    };
    auto rho_q = [&](Vec2 p) {
        const Tensor2 g = grad_u(p);
        return 0.5 * (g(0, 1) - g(1, 0));
    };

    double prev = -1.0;
    for (int rings : {4, 8, 16}) {
        const Mesh m = build_fitted_disk_mesh(rings);
        const TransferPathSet set = build_paths(m, disk, tables);
        double worst = 0.0;
        for (const auto& fam : set.paths) {
            for (const auto& p : fam) {
                if (p.l <= 0.0) continue;
                const auto cs = project_stress(m, p.owner_cell, k, sigma);
                const auto cr = project_scalar(m, p.owner_cell, k, rho_q);
                const Vec2 approx =
                    u(p.xbar) - segment_moment(p, cs, cr, mat, tables, m);
                worst = std::max(worst, (approx - u(p.x)).norm());
            }
        }
        if (prev > 0.0) CHECK(worst < 0.7 * prev);
        prev = worst;
    }
}
