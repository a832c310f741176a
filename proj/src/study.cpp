// SPDX-License-Identifier: Apache-2.0
#include "uhdg/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace uhdg {

ManufacturedSolution manufactured_catalog(const std::string& name, const MaterialParams& m) {
    ManufacturedSolution s;
    s.name = name;
    if (name == "paper-trig") {
        const double pi = M_PI;
        s.u = [pi](Vec2 p) {
            return Vec2{std::sin(pi * p.x) * std::cos(pi * p.y),
                        std::cos(pi * p.x) * std::sin(pi * p.y)};
        };
        s.grad_u = [pi](Vec2 p) {
            const double cc = pi * std::cos(pi * p.x) * std::cos(pi * p.y);
            const double ss = -pi * std::sin(pi * p.x) * std::sin(pi * p.y);
            return Tensor2{cc, ss, ss, cc};
        };
        s.sigma = [m, grad = s.grad_u](Vec2 p) { return apply_Ainv(grad(p), m); };
        s.rho_q = [](Vec2) { return 0.0; };
        const double c = -2.0 * pi * pi * (m.lambda + 2.0 * m.mu);
        s.f = [c, u = s.u](Vec2 p) { return c * u(p); };
    } else if (name == "rotational") {
        s.u = [](Vec2 p) { return Vec2{-p.y * p.y * p.y, p.x * p.x * p.x}; };
        s.grad_u = [](Vec2 p) {
            return Tensor2{0.0, -3.0 * p.y * p.y, 3.0 * p.x * p.x, 0.0};
        };
        s.sigma = [m](Vec2 p) {
            const double v = 3.0 * m.mu * (p.x * p.x - p.y * p.y);
            return Tensor2{0.0, v, v, 0.0};
        };
        s.rho_q = [](Vec2 p) { return -1.5 * (p.x * p.x + p.y * p.y); };
        s.f = [m](Vec2 p) { return Vec2{-6.0 * m.mu * p.y, 6.0 * m.mu * p.x}; };
    } else {
        throw ConfigError("manufactured_catalog: unknown solution '" + name + "'");
    }
    s.g = s.u;
    return s;
}

ErrorRow error_norms(const SolutionFields& sol, const ManufacturedSolution& ex, const Mesh& m,
                     const SpaceTables& tables) {
    const int k = tables.k;
    const TriangleRule over = triangle_rule(2 * k + 10);
    const QuadratureRule1D over1d = gauss_rule_01(k + 6);

    double e_sigma = 0.0, e_rho = 0.0, e_u = 0.0;
    for (int c = 0; c < m.n_cells(); ++c) {
        const PhysTriangle tri = m.cell_triangle(c);
        const double detJ = tri.det_jacobian();
        for (int ip = 0; ip < over.size(); ++ip) {
            const Vec2 x = tri.map(over.points[ip]);
            const double w = over.weights[ip] * detJ;
            const Tensor2 ds = eval_stress_coeffs(k, tri, sol.sigma_coeffs(c), x) - ex.sigma(x);
            const Vec2 du = eval_vector_coeffs(k, tri, sol.u_coeffs(c), x) - ex.u(x);
            const double dq = eval_scalar_coeffs(k, tri, sol.rho_coeffs(c), x) - ex.rho_q(x);
            e_sigma += w * ds.ddot(ds);
            e_u += w * du.squared_norm();
            e_rho += w * 2.0 * dq * dq;
        }
    }

    // trace error ||P_M u - uhat||_h = (sum_K h_K ||.||_{dK}^2)^{1/2}
    const int nk = k + 1;
    std::vector<double> L(nk);
    std::vector<std::array<std::vector<double>, 2>> proj(m.n_edges());
    for (int e = 0; e < m.n_edges(); ++e) {
        proj[e][0].assign(nk, 0.0);
        proj[e][1].assign(nk, 0.0);
        for (int q = 0; q < over1d.size(); ++q) {
            const double s = over1d.points[q];
            const Vec2 uv = ex.u(m.edge_point(e, s));
            edge_basis_values(k, s, L.data());
            for (int mm = 0; mm < nk; ++mm) {
                proj[e][0][mm] += over1d.weights[q] * L[mm] * uv.x;
                proj[e][1][mm] += over1d.weights[q] * L[mm] * uv.y;
            }
        }
    }
    double e_uhat = 0.0;
    for (int c = 0; c < m.n_cells(); ++c) {
        for (int f = 0; f < 3; ++f) {
            const int e = m.cell_edges[c][f];
            const double len = m.edge_length(e);
            double acc = 0.0;
            for (int q = 0; q < over1d.size(); ++q) {
                const double s = over1d.points[q];
                edge_basis_values(k, s, L.data());
                Vec2 pm{0.0, 0.0};
                for (int mm = 0; mm < nk; ++mm) {
                    pm.x += proj[e][0][mm] * L[mm];
                    pm.y += proj[e][1][mm] * L[mm];
                }
                const Vec2 d = pm - sol.uhat_at(e, s);
                acc += over1d.weights[q] * len * d.squared_norm();
            }
            e_uhat += m.h_K[c] * acc;
        }
    }

    ErrorRow row;
    row.n_elem = m.n_cells();
    row.h = m.h;
    row.err_sigma = std::sqrt(e_sigma);
    row.err_rho = std::sqrt(e_rho);
    row.err_u = std::sqrt(e_u);
    row.err_uhat = std::sqrt(e_uhat);
    return row;
}

void ErrorReport::compute_eocs() {
    auto scale_of = [&](auto get) {
        double s = 0.0;
        for (const auto& r : rows) s = std::max(s, get(r));
        return s;
    };
    auto eoc_col = [&](auto get, auto set) {
        const double floor = 100.0 * std::numeric_limits<double>::epsilon() *
                             std::max(scale_of(get), 1e-300);
        for (size_t i = 1; i < rows.size(); ++i) {
            const double e0 = get(rows[i - 1]), e1 = get(rows[i]);
            if (e0 > floor && e1 > floor) {
                const double ratio =
                    std::sqrt(static_cast<double>(rows[i].n_elem) / rows[i - 1].n_elem);
                set(rows[i], std::log(e0 / e1) / std::log(ratio));
            }
        }
    };
    eoc_col([](const ErrorRow& r) { return r.err_sigma; },
            [](ErrorRow& r, double v) { r.eoc_sigma = v; });
    eoc_col([](const ErrorRow& r) { return r.err_rho; },
            [](ErrorRow& r, double v) { r.eoc_rho = v; });
    eoc_col([](const ErrorRow& r) { return r.err_u; },
            [](ErrorRow& r, double v) { r.eoc_u = v; });
    eoc_col([](const ErrorRow& r) { return r.err_uhat; },
            [](ErrorRow& r, double v) { r.eoc_uhat = v; });
}

void ErrorReport::write_csv(std::ostream& os) const {
    os << "level,N_elem,h,R,err_sigma,err_rho,err_u,err_uhat,"
          "eoc_sigma,eoc_rho,eoc_u,eoc_uhat\n";
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
    for (const auto& r : rows) {
        os << r.level << ',' << r.n_elem << ',' << num(r.h) << ',' << num(r.R) << ','
           << num(r.err_sigma) << ',' << num(r.err_rho) << ',' << num(r.err_u) << ','
           << num(r.err_uhat) << ',' << opt(r.eoc_sigma) << ',' << opt(r.eoc_rho) << ','
           << opt(r.eoc_u) << ',' << opt(r.eoc_uhat) << '\n';
    }
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

StudyConfig parse_config(std::istream& is) {
    StudyConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        try {
            if (key == "domain")
                cfg.domain = val;
            else if (key == "k")
                cfg.k = std::stoi(val);
            else if (key == "nu")
                cfg.nu = std::stod(val);
            else if (key == "E")
                cfg.E = std::stod(val);
            else if (key == "tau")
                cfg.tau = std::stod(val);
            else if (key == "levels")
                cfg.levels = std::stoi(val);
            else if (key == "base_resolution")
                cfg.base_resolution = std::stoi(val);
            else if (key == "solution")
                cfg.solution = val;
            else if (key == "out")
                cfg.out = val;
            else
                throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" +
                                  key + "'");
        } catch (const std::invalid_argument&) {
            throw ConfigError("config line " + std::to_string(lineno) + ": bad value for '" +
                              key + "'");
        }
    }
    if (cfg.domain != "square" && cfg.domain != "disk-fitted" && cfg.domain != "disk-immersed" &&
        cfg.domain != "kidney-immersed")
        throw ConfigError("config: unknown domain '" + cfg.domain + "'");
    if (cfg.k < 1 || cfg.k > 3) throw ConfigError("config: k must be in {1,2,3}");
    if (!(cfg.tau > 0.0)) throw ConfigError("config: tau must be positive");
    if (cfg.levels < 1 || cfg.base_resolution < 1)
        throw ConfigError("config: levels and base_resolution must be >= 1");
    return cfg;
}

StudyConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    return parse_config(is);
}

DomainGeometry domain_geometry(const StudyConfig& cfg) {
    if (cfg.domain == "square") return geometry_from_name("unit-square");
    if (cfg.domain == "kidney-immersed") return geometry_from_name("kidney");
    return geometry_from_name("unit-disk");
}

Mesh build_domain_mesh(const StudyConfig& cfg, const DomainGeometry& g, int level) {
    const int res = cfg.base_resolution << level;
    if (cfg.domain == "square") return build_square_mesh(res);
    if (cfg.domain == "disk-fitted") return build_fitted_disk_mesh(res);
    return build_immersed_mesh(g, res);
}

RunResult run_single(const StudyConfig& cfg, int level) {
    const MaterialParams mat = lame_from_E_nu(cfg.E, cfg.nu);
    const SpaceTables tables = SpaceTables::build(cfg.k);
    const DomainGeometry geo = domain_geometry(cfg);
    const ManufacturedSolution ex = manufactured_catalog(cfg.solution, mat);
    HdgConfig hcfg;
    hcfg.k = cfg.k;
    hcfg.tau = cfg.tau;

    RunResult out;
    out.mesh = build_domain_mesh(cfg, geo, level);
    out.paths = build_paths(out.mesh, geo, tables);
    out.metrics = compute_mesh_metrics(out.mesh, out.paths);

    std::vector<LocalSystem> locals;
    const GlobalSystem gs =
        assemble_global(out.mesh, tables, mat, hcfg, ex.f, ex.g, out.paths, locals);
    const Eigen::VectorXd uhat = solve(gs, hcfg);
    out.sol = reconstruct(out.mesh, tables, mat, hcfg, locals, uhat, out.paths, ex.g);
    out.errors = error_norms(out.sol, ex, out.mesh, tables);
    out.errors.level = level;
    out.errors.R = out.metrics.R;
    return out;
}

ErrorReport run_convergence(const StudyConfig& cfg) {
    ErrorReport report;
    for (int level = 0; level < cfg.levels; ++level) {
        RunResult r = run_single(cfg, level);
        report.rows.push_back(r.errors);
    }
    report.compute_eocs();
    std::ofstream os(cfg.out + ".csv");
    if (!os) throw Error("run_convergence: cannot open " + cfg.out + ".csv");
    report.write_csv(os);
    return report;
}

} // namespace uhdg
