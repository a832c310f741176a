// SPDX-License-Identifier: Apache-2.0
#include "uhdg/geometry.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace uhdg {

namespace {

DomainGeometry make_unit_disk() {
    DomainGeometry g;
    g.kind = DomainKind::UnitDisk;
    g.name = "unit-disk";
    g.bbox = {{-1.0, -1.0}, {1.0, 1.0}};
    g.phi = [](Vec2 p) { return p.x * p.x + p.y * p.y - 1.0; };
    g.grad = [](Vec2 p) { return Vec2{2.0 * p.x, 2.0 * p.y}; };
    g.hess = [](Vec2) { return std::array<double, 3>{2.0, 0.0, 2.0}; };
    return g;
}

// Kidney shape of the immersed examples. The printed formula has unbalanced
// parentheses; the reading used here is
//   phi = 2*((x+1/2)^2 + y^2 - x - 1/2)^2 - ((x+1/2)^2 + y^2) + 0.1
// which simplifies with w = x^2 + y^2 - 1/4 to
//   phi = 2 w^2 - (x+1/2)^2 - y^2 + 0.1.
DomainGeometry make_kidney() {
    DomainGeometry g;
    g.kind = DomainKind::Kidney;
    g.name = "kidney";
    g.bbox = {{-0.60, -1.10}, {1.30, 1.10}};
    g.phi = [](Vec2 p) {
        const double w = p.x * p.x + p.y * p.y - 0.25;
        return 2.0 * w * w - (p.x + 0.5) * (p.x + 0.5) - p.y * p.y + 0.1;
    };
    g.grad = [](Vec2 p) {
        const double w = p.x * p.x + p.y * p.y - 0.25;
        return Vec2{8.0 * w * p.x - 2.0 * (p.x + 0.5), 8.0 * w * p.y - 2.0 * p.y};
    };
    g.hess = [](Vec2 p) {
        const double w = p.x * p.x + p.y * p.y - 0.25;
        return std::array<double, 3>{8.0 * w + 16.0 * p.x * p.x - 2.0,
                                     16.0 * p.x * p.y,
                                     8.0 * w + 16.0 * p.y * p.y - 2.0};
    };
    return g;
}

DomainGeometry make_unit_square() {
    DomainGeometry g;
    g.kind = DomainKind::UnitSquare;
    g.name = "unit-square";
    g.bbox = {{-0.05, -0.05}, {1.05, 1.05}};
    g.phi = [](Vec2 p) {
        return std::max(std::max(-p.x, p.x - 1.0), std::max(-p.y, p.y - 1.0));
    };
    g.grad = [](Vec2 p) {
        const double vals[4] = {-p.x, p.x - 1.0, -p.y, p.y - 1.0};
        const Vec2 grads[4] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
        int best = 0;
        for (int i = 1; i < 4; ++i)
            if (vals[i] > vals[best]) best = i;
        return grads[best];
    };
    g.hess = [](Vec2) { return std::array<double, 3>{0.0, 0.0, 0.0}; };
    return g;
}

std::map<std::string, DomainGeometry>& registry() {
    static std::map<std::string, DomainGeometry> reg = {
        {"unit-disk", make_unit_disk()},
        {"kidney", make_kidney()},
        {"unit-square", make_unit_square()},
    };
    return reg;
}

std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

std::pair<double, Vec2> level_set_eval(const DomainGeometry& g, const Vec2& x) {
    return {g.phi(x), g.grad(x)};
}

DomainGeometry geometry_from_name(const std::string& name) {
    std::lock_guard<std::mutex> lock(registry_mutex());
    auto it = registry().find(name);
    if (it == registry().end())
        throw ConfigError("geometry_from_name: unknown level set '" + name + "'");
    return it->second;
}

void register_level_set(const std::string& name, DomainGeometry geometry) {
    std::lock_guard<std::mutex> lock(registry_mutex());
    geometry.kind = DomainKind::CustomLevelSet;
    geometry.name = name;
    registry()[name] = std::move(geometry);
}

Vec2 closest_point(const DomainGeometry& g, const Vec2& x, double tol, int max_iter) {
    // KKT system for min |p-x|^2 s.t. phi(p)=0:
    //   p - x + mu*grad(p) = 0,  phi(p) = 0.
    Vec2 p = x;
    double mu = 0.0;
    {
        const Vec2 gr = g.grad(p);
        const double g2 = gr.squared_norm();
        if (g2 > 1e-16) mu = g.phi(p) / g2;
    }
    auto residual = [&](const Vec2& pp, double mm, Vec2& r, double& rphi) {
        const Vec2 gr = g.grad(pp);
        r = pp - x + mm * gr;
        rphi = g.phi(pp);
        return std::sqrt(r.squared_norm() + rphi * rphi);
    };

    Vec2 r;
    double rphi;
    double rnorm = residual(p, mu, r, rphi);
    const double scale = 1.0 + x.norm();

    for (int it = 0; it < max_iter; ++it) {
        if (rnorm <= tol * scale && std::abs(g.phi(p)) <= tol) return p;
        const Vec2 gr = g.grad(p);
        const auto H = g.hess(p);
        // [ I + mu H   grad ] [dp  ]   [ -r    ]
        // [ grad^T      0   ] [dmu ] = [ -rphi ]
        const double a11 = 1.0 + mu * H[0], a12 = mu * H[1];
        const double a21 = mu * H[1], a22 = 1.0 + mu * H[2];
        // solve the 3x3 by elimination
        const double M[3][4] = {{a11, a12, gr.x, -r.x},
                                {a21, a22, gr.y, -r.y},
                                {gr.x, gr.y, 0.0, -rphi}};
        double A[3][4];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 4; ++j) A[i][j] = M[i][j];
        // partial pivoting
        for (int c = 0; c < 3; ++c) {
            int piv = c;
            for (int rr = c + 1; rr < 3; ++rr)
                if (std::abs(A[rr][c]) > std::abs(A[piv][c])) piv = rr;
            if (std::abs(A[piv][c]) < 1e-300)
                throw GeometryError("closest_point: singular Newton system", p);
            if (piv != c)
                for (int j = 0; j < 4; ++j) std::swap(A[c][j], A[piv][j]);
            for (int rr = c + 1; rr < 3; ++rr) {
                const double f = A[rr][c] / A[c][c];
                for (int j = c; j < 4; ++j) A[rr][j] -= f * A[c][j];
            }
        }
        double sol[3];
        for (int c = 2; c >= 0; --c) {
            double v = A[c][3];
            for (int j = c + 1; j < 3; ++j) v -= A[c][j] * sol[j];
            sol[c] = v / A[c][c];
        }
        const Vec2 dp{sol[0], sol[1]};
        const double dmu = sol[2];

        // damped step halving
        double alpha = 1.0;
        Vec2 pn;
        double mun, rn = rnorm;
        Vec2 rtmp;
        double rphitmp;
        bool accepted = false;
        for (int h = 0; h < 30; ++h) {
            pn = p + alpha * dp;
            mun = mu + alpha * dmu;
            rn = residual(pn, mun, rtmp, rphitmp);
            if (rn < rnorm * (1.0 - 1e-4 * alpha) || rn <= tol * scale) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted)
            throw GeometryError("closest_point: line search stalled", p);
        p = pn;
        mu = mun;
        rnorm = rn;
        r = rtmp;
        rphi = rphitmp;
    }
    if (rnorm <= tol * scale && std::abs(g.phi(p)) <= tol) return p;
    throw GeometryError("closest_point: no convergence within max_iter", p);
}

std::pair<double, Vec2> ray_boundary_intersection(const DomainGeometry& g, const Vec2& x,
                                                  const Vec2& d, double s_max) {
    if (g.phi(x) > 1e-12)
        throw GeometryError("ray_boundary_intersection: ray origin outside Omega", x);

    const int n_march = 256;
    double s_lo = 0.0, s_hi = -1.0;
    double phi_lo = g.phi(x);
    for (int i = 1; i <= n_march; ++i) {
        const double s = s_max * i / n_march;
        const double v = g.phi(x + s * d);
        if (v > 0.0) {
            s_hi = s;
            break;
        }
        s_lo = s;
        phi_lo = v;
    }
    if (s_hi < 0.0) {
        // accept s_max itself if the ray ends exactly on Gamma
        if (std::abs(g.phi(x + s_max * d)) <= 1e-12) return {s_max, x + s_max * d};
        throw GeometryError("ray_boundary_intersection: no sign change on (0, s_max]",
                            x + s_max * d);
    }
    (void)phi_lo;

    // bisection with a Newton polish
    double s = 0.5 * (s_lo + s_hi);
    for (int it = 0; it < 200; ++it) {
        const Vec2 p = x + s * d;
        const double v = g.phi(p);
        if (std::abs(v) <= 1e-12) return {s, p};
        if (v > 0.0)
            s_hi = s;
        else
            s_lo = s;
        const double dv = g.grad(p).dot(d);
        double sn = (std::abs(dv) > 1e-14) ? s - v / dv : 0.5 * (s_lo + s_hi);
        if (!(sn > s_lo && sn < s_hi)) sn = 0.5 * (s_lo + s_hi);
        s = sn;
    }
    const Vec2 p = x + s * d;
    if (std::abs(g.phi(p)) <= 1e-12) return {s, p};
    throw GeometryError("ray_boundary_intersection: root polish failed", p);
}

} // namespace uhdg
