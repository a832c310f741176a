// SPDX-License-Identifier: Apache-2.0
#include "uhdg/spaces.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace uhdg {

LocalDofCounts local_dof_counts(int k) {
    if (k < 1 || k > 3)
        throw ConfigError("local_dof_counts: supported degrees are k in {1,2,3}");
    const int d_s = scalar_space_dim(k);
    return {4 * d_s + (k + 1), 2 * d_s, d_s, 2 * (k + 1)};
}

QuadratureRule1D gauss_rule_01(int npts) {
    // Golub-Welsch on the Legendre Jacobi matrix, mapped to [0,1].
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(npts, npts);
    for (int j = 1; j < npts; ++j) {
        const double b = j / std::sqrt(4.0 * j * j - 1.0);
        T(j, j - 1) = b;
        T(j - 1, j) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    QuadratureRule1D rule;
    rule.points.resize(npts);
    rule.weights.resize(npts);
    for (int i = 0; i < npts; ++i) {
        const double x = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        rule.points[i] = 0.5 * (x + 1.0);
        rule.weights[i] = v0 * v0; // 2*v0^2 on [-1,1], halved by the map
    }
    return rule;
}

TriangleRule triangle_rule(int exactness_degree) {
    const int d = exactness_degree;
    const int na = (d + 2) / 2;     // ceil((d+1)/2)
    const int nb = (d + 3) / 2;     // ceil((d+2)/2), absorbs the collapse Jacobian
    QuadratureRule1D ga = gauss_rule_01(na);
    QuadratureRule1D gb = gauss_rule_01(nb);

    TriangleRule rule;
    rule.degree = d;
    rule.points.reserve(na * nb);
    rule.weights.reserve(na * nb);
    for (int j = 0; j < nb; ++j) {
        const double b = 2.0 * gb.points[j] - 1.0;
        const double wb = 2.0 * gb.weights[j];
        for (int i = 0; i < na; ++i) {
            const double a = 2.0 * ga.points[i] - 1.0;
            const double wa = 2.0 * ga.weights[i];
            rule.points.push_back({0.25 * (1.0 + a) * (1.0 - b), 0.5 * (1.0 + b)});
            rule.weights.push_back(wa * wb * (1.0 - b) / 8.0);
        }
    }
    return rule;
}

namespace {

constexpr int kMaxDeg = 3;

// Derivative-slot layout for the scaled Legendre factor q_m(x, s):
// (a,c) = order in x, order in s.
// 0:(0,0) 1:(1,0) 2:(0,1) 3:(2,0) 4:(1,1) 5:(0,2) 6:(3,0) 7:(2,1) 8:(1,2) 9:(0,3)
struct Q10 {
    double d[10] = {};
};

inline int slot(int a, int c) {
    static constexpr int map[4][4] = {
        {0, 2, 5, 9}, {1, 4, 8, -1}, {3, 7, -1, -1}, {6, -1, -1, -1}};
    return map[a][c];
}

// q_0..q_kmax with derivatives up to total order `order`.
// Recurrence: (m+1) q_{m+1} = (2m+1)(2x - s) q_m - m s^2 q_{m-1}.
void scaled_legendre(double x, double s, int kmax, int order, Q10 q[kMaxDeg + 1]) {
    const double u = 2.0 * x - s;
    q[0] = Q10{};
    q[0].d[0] = 1.0;
    if (kmax == 0) return;
    q[1] = Q10{};
    q[1].d[0] = u;
    if (order >= 1) {
        q[1].d[slot(1, 0)] = 2.0;
        q[1].d[slot(0, 1)] = -1.0;
    }
    for (int m = 1; m < kmax; ++m) {
        Q10 next{};
        for (int a = 0; a <= order; ++a) {
            for (int c = 0; a + c <= order; ++c) {
                double t = u * q[m].d[slot(a, c)];
                if (a >= 1) t += 2.0 * a * q[m].d[slot(a - 1, c)];
                if (c >= 1) t -= c * q[m].d[slot(a, c - 1)];
                t *= (2.0 * m + 1.0);
                double t2 = s * s * q[m - 1].d[slot(a, c)];
                if (c >= 1) t2 += 2.0 * s * c * q[m - 1].d[slot(a, c - 1)];
                if (c >= 2) t2 += c * (c - 1.0) * q[m - 1].d[slot(a, c - 2)];
                next.d[slot(a, c)] = (t - m * t2) / (m + 1.0);
            }
        }
        q[m + 1] = next;
    }
}

// P_n^{(alpha,0)}(t) with d/dt derivatives up to order 3: out[n][j].
void jacobi_poly(int alpha, double t, int nmax, int order,
                 double out[kMaxDeg + 1][4]) {
    for (int n = 0; n <= nmax; ++n)
        for (int j = 0; j < 4; ++j) out[n][j] = 0.0;
    out[0][0] = 1.0;
    if (nmax == 0) return;
    out[1][0] = 0.5 * ((alpha + 2.0) * t + alpha);
    if (order >= 1) out[1][1] = 0.5 * (alpha + 2.0);
    for (int n = 2; n <= nmax; ++n) {
        const double A = 2.0 * n * (n + alpha) * (2.0 * n + alpha - 2.0);
        const double B = (2.0 * n + alpha - 1.0) * (2.0 * n + alpha) * (2.0 * n + alpha - 2.0);
        const double C = (2.0 * n + alpha - 1.0) * alpha * alpha;
        const double D = 2.0 * (n + alpha - 1.0) * (n - 1.0) * (2.0 * n + alpha);
        for (int j = 0; j <= order; ++j) {
            double v = B * t * out[n - 1][j] + C * out[n - 1][j];
            if (j >= 1) v += B * j * out[n - 1][j - 1];
            v -= D * out[n - 2][j];
            out[n][j] = v / A;
        }
    }
}

inline void resize_point(ScalarBasisPoint& p, int d_s, int order) {
    p.val.assign(d_s, 0.0);
    if (order >= 1) {
        p.dx.assign(d_s, 0.0);
        p.dy.assign(d_s, 0.0);
    }
    if (order >= 2) {
        p.dxx.assign(d_s, 0.0);
        p.dxy.assign(d_s, 0.0);
        p.dyy.assign(d_s, 0.0);
    }
    if (order >= 3) {
        p.dxxx.assign(d_s, 0.0);
        p.dxxy.assign(d_s, 0.0);
        p.dxyy.assign(d_s, 0.0);
        p.dyyy.assign(d_s, 0.0);
    }
}

} // namespace

void scalar_basis_reference(int k, const Vec2& xi, int order, ScalarBasisPoint& out) {
    if (k < 1 || k > kMaxDeg)
        throw ConfigError("scalar_basis_reference: supported degrees are k in {1,2,3}");
    const int d_s = scalar_space_dim(k);
    resize_point(out, d_s, order);

    const double x = xi.x;
    const double s = 1.0 - xi.y;   // collapse factor
    const double t = 2.0 * xi.y - 1.0;

    Q10 q[kMaxDeg + 1];
    scaled_legendre(x, s, k, order, q);

    for (int m = 0; m <= k; ++m) {
        double J[kMaxDeg + 1][4];
        jacobi_poly(2 * m + 1, t, k - m, order, J);
        const Q10& Q = q[m];
        for (int n = 0; m + n <= k; ++n) {
            const int d = m + n;
            const int idx = d * (d + 1) / 2 + m;
            const double N = std::sqrt(2.0 * (2.0 * m + 1.0) * (m + n + 1.0));
            const double P = J[n][0], P1 = J[n][1], P2 = J[n][2], P3 = J[n][3];
            out.val[idx] = N * Q.d[slot(0, 0)] * P;
            if (order >= 1) {
                out.dx[idx] = N * Q.d[slot(1, 0)] * P;
                out.dy[idx] = N * (-Q.d[slot(0, 1)] * P + 2.0 * Q.d[slot(0, 0)] * P1);
            }
            if (order >= 2) {
                out.dxx[idx] = N * Q.d[slot(2, 0)] * P;
                out.dxy[idx] = N * (-Q.d[slot(1, 1)] * P + 2.0 * Q.d[slot(1, 0)] * P1);
                out.dyy[idx] = N * (Q.d[slot(0, 2)] * P - 4.0 * Q.d[slot(0, 1)] * P1
                                    + 4.0 * Q.d[slot(0, 0)] * P2);
            }
            if (order >= 3) {
                out.dxxx[idx] = N * Q.d[slot(3, 0)] * P;
                out.dxxy[idx] = N * (-Q.d[slot(2, 1)] * P + 2.0 * Q.d[slot(2, 0)] * P1);
                out.dxyy[idx] = N * (Q.d[slot(1, 2)] * P - 4.0 * Q.d[slot(1, 1)] * P1
                                     + 4.0 * Q.d[slot(1, 0)] * P2);
                out.dyyy[idx] = N * (-Q.d[slot(0, 3)] * P + 6.0 * Q.d[slot(0, 2)] * P1
                                     - 12.0 * Q.d[slot(0, 1)] * P2
                                     + 8.0 * Q.d[slot(0, 0)] * P3);
            }
        }
    }
}

void edge_basis_values(int k, double s, double* out) {
    double J[kMaxDeg + 1][4];
    jacobi_poly(0, 2.0 * s - 1.0, k, 0, J);
    for (int m = 0; m <= k; ++m)
        out[m] = std::sqrt(2.0 * m + 1.0) * J[m][0];
}

Vec2 PhysTriangle::pullback(const Vec2& x) const {
    double inv[4];
    inverse_jacobian(inv);
    const Vec2 d = x - v0;
    return {inv[0] * d.x + inv[1] * d.y, inv[2] * d.x + inv[3] * d.y};
}

double PhysTriangle::diameter() const {
    return std::max({(v1 - v0).norm(), (v2 - v1).norm(), (v0 - v2).norm()});
}

double PhysTriangle::inradius() const {
    const double a = (v2 - v1).norm();
    const double b = (v0 - v2).norm();
    const double c = (v1 - v0).norm();
    return 2.0 * std::abs(area()) / (a + b + c);
}

void PhysTriangle::inverse_jacobian(double inv[4]) const {
    const double det = det_jacobian();
    inv[0] = (v2.y - v0.y) / det;
    inv[1] = -(v2.x - v0.x) / det;
    inv[2] = -(v1.y - v0.y) / det;
    inv[3] = (v1.x - v0.x) / det;
}

std::array<double, 3> PhysTriangle::barycentric(const Vec2& x) const {
    const Vec2 r = pullback(x);
    return {1.0 - r.x - r.y, r.x, r.y};
}

ElementBasis::ElementBasis(int k_, const PhysTriangle& t) : k(k_), tri(t) {
    tri.inverse_jacobian(jinv);
    if (tri.det_jacobian() <= 0.0)
        throw GeometryError("ElementBasis: degenerate or negatively oriented cell");
}

void ElementBasis::eval(const Vec2& x, int order, ScalarBasisPoint& out) const {
    thread_local ScalarBasisPoint ref;
    scalar_basis_reference(k, tri.pullback(x), order, ref);
    const int d_s = scalar_space_dim(k);
    resize_point(out, d_s, order);
    // d/dx = A dxi + B deta, d/dy = C dxi + D deta
    const double A = jinv[0], C = jinv[1], B = jinv[2], D = jinv[3];
    for (int i = 0; i < d_s; ++i) {
        out.val[i] = ref.val[i];
        if (order >= 1) {
            out.dx[i] = A * ref.dx[i] + B * ref.dy[i];
            out.dy[i] = C * ref.dx[i] + D * ref.dy[i];
        }
        if (order >= 2) {
            out.dxx[i] = A * A * ref.dxx[i] + 2.0 * A * B * ref.dxy[i] + B * B * ref.dyy[i];
            out.dxy[i] = A * C * ref.dxx[i] + (A * D + B * C) * ref.dxy[i] + B * D * ref.dyy[i];
            out.dyy[i] = C * C * ref.dxx[i] + 2.0 * C * D * ref.dxy[i] + D * D * ref.dyy[i];
        }
        if (order >= 3) {
            out.dxxx[i] = A * A * A * ref.dxxx[i] + 3.0 * A * A * B * ref.dxxy[i]
                          + 3.0 * A * B * B * ref.dxyy[i] + B * B * B * ref.dyyy[i];
            out.dxxy[i] = A * A * C * ref.dxxx[i] + (A * A * D + 2.0 * A * B * C) * ref.dxxy[i]
                          + (2.0 * A * B * D + B * B * C) * ref.dxyy[i] + B * B * D * ref.dyyy[i];
            out.dxyy[i] = A * C * C * ref.dxxx[i] + (2.0 * A * C * D + B * C * C) * ref.dxxy[i]
                          + (A * D * D + 2.0 * B * C * D) * ref.dxyy[i] + B * D * D * ref.dyyy[i];
            out.dyyy[i] = C * C * C * ref.dxxx[i] + 3.0 * C * C * D * ref.dxxy[i]
                          + 3.0 * C * D * D * ref.dxyy[i] + D * D * D * ref.dyyy[i];
        }
    }
}

namespace {

// third derivative lookup by number of y-indices
inline double third(const ScalarBasisPoint& p, int i, int ny) {
    switch (ny) {
        case 0: return p.dxxx[i];
        case 1: return p.dxxy[i];
        case 2: return p.dxyy[i];
        default: return p.dyyy[i];
    }
}

} // namespace

void bubble_basis(int k, const PhysTriangle& tri, const Vec2& x,
                  std::vector<BubbleValue>& out) {
    if (tri.det_jacobian() <= 0.0)
        throw GeometryError("bubble_basis: degenerate cell");
    ElementBasis eb(k, tri);
    ScalarBasisPoint q;
    eb.eval(x, 3, q);

    // barycentric bubble b = l0 l1 l2 and derivatives
    const double A = eb.jinv[0], C = eb.jinv[1], B = eb.jinv[2], D = eb.jinv[3];
    const Vec2 g1{A, C}, g2{B, D}, g0{-(A + B), -(C + D)};
    const auto lam = tri.barycentric(x);
    const Vec2 g[3] = {g0, g1, g2};
    const double l[3] = {lam[0], lam[1], lam[2]};

    const double b = l[0] * l[1] * l[2];
    const double bx = g[0].x * l[1] * l[2] + g[1].x * l[0] * l[2] + g[2].x * l[0] * l[1];
    const double by = g[0].y * l[1] * l[2] + g[1].y * l[0] * l[2] + g[2].y * l[0] * l[1];
    auto hess_b = [&](int a, int c) {
        auto comp = [&](const Vec2& v, int idx) { return idx == 0 ? v.x : v.y; };
        double h = 0.0;
        for (int i = 0; i < 3; ++i) {
            const int j = (i + 1) % 3, m = (i + 2) % 3;
            h += comp(g[i], a) * (comp(g[j], c) * l[m] + comp(g[m], c) * l[j]);
        }
        return h;
    };
    const double bxx = hess_b(0, 0), bxy = hess_b(0, 1), byy = hess_b(1, 1);

    const int d_s = scalar_space_dim(k);
    const int top = d_s - (k + 1);
    out.assign(k + 1, BubbleValue{});

    for (int j = 0; j <= k; ++j) {
        const int iq = top + j;
        const double qx = q.dx[iq], qy = q.dy[iq];
        const double qxx = q.dxx[iq], qxy = q.dxy[iq], qyy = q.dyy[iq];
        BubbleValue& bv = out[j];
        // rows are curls of w_i = b * dq/dx_i
        bv.value(0, 0) = -(by * qx + b * qxy);
        bv.value(0, 1) = bx * qx + b * qxx;
        bv.value(1, 0) = -(by * qy + b * qyy);
        bv.value(1, 1) = bx * qy + b * qxy;

        // entry derivatives: d_a T(i,0) = -(b_{ya} q_i + b_y q_{ia} + b_a q_{iy} + b q_{iya})
        //                    d_a T(i,1) =   b_{xa} q_i + b_x q_{ia} + b_a q_{ix} + b q_{ixa}
        const double q3[2][2][2] = {
            {{third(q, iq, 0), third(q, iq, 1)}, {third(q, iq, 1), third(q, iq, 2)}},
            {{third(q, iq, 1), third(q, iq, 2)}, {third(q, iq, 2), third(q, iq, 3)}}};
        const double qg[2] = {qx, qy};
        const double qh[2][2] = {{qxx, qxy}, {qxy, qyy}};
        const double bg[2] = {bx, by};
        const double bh[2][2] = {{bxx, bxy}, {bxy, byy}};
        for (int i = 0; i < 2; ++i) {
            for (int a = 0; a < 2; ++a) {
                const double d0 = -(bh[1][a] * qg[i] + bg[1] * qh[i][a]
                                    + bg[a] * qh[i][1] + b * q3[i][1][a]);
                const double d1 = bh[0][a] * qg[i] + bg[0] * qh[i][a]
                                  + bg[a] * qh[i][0] + b * q3[i][0][a];
                Tensor2& gcol = (a == 0) ? bv.grad_col_x : bv.grad_col_y;
                gcol(i, 0) = d0;
                gcol(i, 1) = d1;
            }
            bv.divergence = {bv.grad_col_x(0, 0) + bv.grad_col_y(0, 1),
                             bv.grad_col_x(1, 0) + bv.grad_col_y(1, 1)};
        }
    }
}

SpaceTables SpaceTables::build(int k) {
    if (k < 1 || k > kMaxDeg)
        throw ConfigError("SpaceTables: supported degrees are k in {1,2,3}");
    SpaceTables t;
    t.k = k;
    t.tri = triangle_rule(2 * k + 6);
    t.seg = gauss_rule_01(k + 3);
    return t;
}

Tensor2 eval_stress_coeffs(int k, const PhysTriangle& tri, std::span<const double> coeffs,
                           const Vec2& x) {
    const int d_s = scalar_space_dim(k);
    ElementBasis eb(k, tri);
    thread_local ScalarBasisPoint sb;
    eb.eval(x, 0, sb);
    Tensor2 s;
    for (int c = 0; c < 4; ++c) {
        double v = 0.0;
        for (int b = 0; b < d_s; ++b) v += coeffs[c * d_s + b] * sb.val[b];
        s.m[c] = v;
    }
    thread_local std::vector<BubbleValue> bub;
    bubble_basis(k, tri, x, bub);
    for (int q = 0; q <= k; ++q) s += coeffs[4 * d_s + q] * bub[q].value;
    return s;
}

Vec2 eval_vector_coeffs(int k, const PhysTriangle& tri, std::span<const double> coeffs,
                        const Vec2& x) {
    const int d_s = scalar_space_dim(k);
    ElementBasis eb(k, tri);
    thread_local ScalarBasisPoint sb;
    eb.eval(x, 0, sb);
    Vec2 v{0.0, 0.0};
    for (int b = 0; b < d_s; ++b) {
        v.x += coeffs[b] * sb.val[b];
        v.y += coeffs[d_s + b] * sb.val[b];
    }
    return v;
}

double eval_scalar_coeffs(int k, const PhysTriangle& tri, std::span<const double> coeffs,
                          const Vec2& x) {
    const int d_s = scalar_space_dim(k);
    ElementBasis eb(k, tri);
    thread_local ScalarBasisPoint sb;
    eb.eval(x, 0, sb);
    double v = 0.0;
    for (int b = 0; b < d_s; ++b) v += coeffs[b] * sb.val[b];
    return v;
}

} // namespace uhdg
