// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "uhdg/diagnostics.hpp"
#include "uhdg/hdg.hpp"
#include "uhdg/study.hpp"

namespace {

void print_row(const uhdg::ErrorRow& r) {
    std::printf("level %d: N_elem=%d h=%.4g R=%.4g\n", r.level, r.n_elem, r.h, r.R);
    std::printf("  err_sigma=%.6e err_rho=%.6e err_u=%.6e err_uhat=%.6e\n", r.err_sigma,
                r.err_rho, r.err_u, r.err_uhat);
}

int cmd_run(const std::string& config_path, int level, const std::string& mesh_out,
            const std::string& matrix_out) {
    const uhdg::StudyConfig cfg = uhdg::parse_config_file(config_path);
    uhdg::RunResult r = uhdg::run_single(cfg, level);
    print_row(r.errors);
    std::printf("  certificates: weak_symmetry=%.3e flux=%.3e boundary=%.3e\n",
                r.sol.weak_symmetry_residual, r.sol.flux_residual, r.sol.boundary_residual);
    if (!mesh_out.empty()) {
        uhdg::write_mesh_file(r.mesh, mesh_out);
        std::printf("  mesh written to %s\n", mesh_out.c_str());
    }
    if (!matrix_out.empty()) {
        const uhdg::MaterialParams mat = uhdg::lame_from_E_nu(cfg.E, cfg.nu);
        const uhdg::SpaceTables tables = uhdg::SpaceTables::build(cfg.k);
        const uhdg::ManufacturedSolution ex = uhdg::manufactured_catalog(cfg.solution, mat);
        uhdg::HdgConfig hcfg;
        hcfg.k = cfg.k;
        hcfg.tau = cfg.tau;
        std::vector<uhdg::LocalSystem> locals;
        const uhdg::GlobalSystem gs =
            uhdg::assemble_global(r.mesh, tables, mat, hcfg, ex.f, ex.g, r.paths, locals);
        uhdg::export_matrix_market(gs, matrix_out);
        std::printf("  condensed system written to %s\n", matrix_out.c_str());
    }
    return 0;
}

int cmd_convergence(const std::string& config_path) {
    const uhdg::StudyConfig cfg = uhdg::parse_config_file(config_path);
    const uhdg::ErrorReport report = uhdg::run_convergence(cfg);
    for (const auto& r : report.rows) print_row(r);
    const auto& last = report.rows.back();
    auto show = [](const char* name, const std::optional<double>& v) {
        if (v)
            std::printf("  final EOC %s = %.3f\n", name, *v);
        else
            std::printf("  final EOC %s = (undefined)\n", name);
    };
    std::printf("summary (%s, k=%d, nu=%g):\n", cfg.domain.c_str(), cfg.k, cfg.nu);
    show("sigma", last.eoc_sigma);
    show("rho", last.eoc_rho);
    show("u", last.eoc_u);
    show("uhat", last.eoc_uhat);
    std::printf("csv written to %s.csv\n", cfg.out.c_str());
    return 0;
}

int cmd_diagnostics(const std::string& config_path, int level) {
    const uhdg::StudyConfig cfg = uhdg::parse_config_file(config_path);
    const uhdg::DomainGeometry geo = uhdg::domain_geometry(cfg);
    const uhdg::SpaceTables tables = uhdg::SpaceTables::build(cfg.k);
    const uhdg::Mesh mesh = uhdg::build_domain_mesh(cfg, geo, level);
    const uhdg::TransferPathSet paths = uhdg::build_paths(mesh, geo, tables);
    const uhdg::DiagnosticsReport rep = uhdg::diagnostics_constants(mesh, paths, tables);

    const std::string path = cfg.out + "_diagnostics.csv";
    std::ofstream os(path);
    if (!os) {
        std::fprintf(stderr, "cannot open %s\n", path.c_str());
        return 1;
    }
    os << "edge,r_e,C_ext,C_inv,C_tr\n";
    char buf[160];
    for (const auto& e : rep.edges) {
        std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g", e.edge, e.r_e, e.C_ext,
                      e.C_inv, e.C_tr);
        os << buf << '\n';
    }
    std::printf("R = %.6g over %zu boundary edges; csv written to %s\n", rep.R,
                rep.edges.size(), path.c_str());
    return 0;
}

int cmd_paths(const std::string& config_path, int level) {
    const uhdg::StudyConfig cfg = uhdg::parse_config_file(config_path);
    const uhdg::DomainGeometry geo = uhdg::domain_geometry(cfg);
    const uhdg::SpaceTables tables = uhdg::SpaceTables::build(cfg.k);
    const uhdg::Mesh mesh = uhdg::build_domain_mesh(cfg, geo, level);
    const uhdg::TransferPathSet paths = uhdg::build_paths(mesh, geo, tables);
    const std::string path = cfg.out + "_paths.csv";
    std::ofstream os(path);
    if (!os) {
        std::fprintf(stderr, "cannot open %s\n", path.c_str());
        return 1;
    }
    uhdg::dump_paths_csv(paths, os);
    std::printf("%zu boundary edges, max path length %.6g; csv written to %s\n",
                paths.boundary_edges.size(), paths.max_length(), path.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unfitted HDG solver for 2D linear elasticity with weak stress symmetry"};
    app.require_subcommand(1);

    std::string config_path;
    int level = 0;
    std::string mesh_out, matrix_out;

    auto* run = app.add_subcommand("run", "single solve + error/certificate report");
    run->add_option("--config", config_path, "config file")->required();
    run->add_option("--level", level, "refinement level (default 0)");
    run->add_option("--mesh-out", mesh_out, "write the mesh in the text format");
    run->add_option("--matrix-out", matrix_out, "write the condensed system (Matrix Market)");

    auto* conv = app.add_subcommand("convergence", "refinement study + EOC summary");
    conv->add_option("--config", config_path, "config file")->required();

    auto* diag = app.add_subcommand("diagnostics", "per-edge constants r_e, C_ext, C_inv, C_tr");
    diag->add_option("--config", config_path, "config file")->required();
    diag->add_option("--level", level, "refinement level (default 0)");

    auto* pth = app.add_subcommand("paths", "transfer-path dump for plotting");
    pth->add_option("--config", config_path, "config file")->required();
    pth->add_option("--level", level, "refinement level (default 0)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, level, mesh_out, matrix_out);
        if (conv->parsed()) return cmd_convergence(config_path);
        if (diag->parsed()) return cmd_diagnostics(config_path, level);
        if (pth->parsed()) return cmd_paths(config_path, level);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
