// SPDX-License-Identifier: Apache-2.0
//
// Manufactured solutions, error norms and the convergence-study drivers for
// the four experiment domains. Rates are measured against N_elem^{-1/2}.
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "uhdg/diagnostics.hpp"
#include "uhdg/hdg.hpp"
#include "uhdg/material.hpp"
#include "uhdg/mesh.hpp"

namespace uhdg {

struct ManufacturedSolution {
    std::string name;
    VectorField u;
    std::function<Tensor2(Vec2)> grad_u;
    std::function<Tensor2(Vec2)> sigma;
    std::function<double(Vec2)> rho_q;  // rho = q [[0,1],[-1,0]]
    VectorField f;
    VectorField g;                      // boundary datum, = u on Gamma
};

/// name in {"paper-trig", "rotational"}; throws ConfigError otherwise.
ManufacturedSolution manufactured_catalog(const std::string& name, const MaterialParams& m);

struct ErrorRow {
    int level = 0;
    int n_elem = 0;
    double h = 0.0;
    double R = 0.0;
    double err_sigma = 0.0, err_rho = 0.0, err_u = 0.0, err_uhat = 0.0;
    std::optional<double> eoc_sigma, eoc_rho, eoc_u, eoc_uhat;
};

struct ErrorReport {
    std::vector<ErrorRow> rows;
    void compute_eocs();
    void write_csv(std::ostream& os) const;
};

/// Volume L2 errors by over-integrated quadrature (degree 2k+10) and the
/// trace error ||P_M u - uhat||_h, with P_M the edgewise L2 projection.
ErrorRow error_norms(const SolutionFields& sol, const ManufacturedSolution& ex, const Mesh& m,
                     const SpaceTables& tables);

/// Line-oriented key=value configuration (see README for the keys).
struct StudyConfig {
    std::string domain = "square";  // square | disk-fitted | disk-immersed | kidney-immersed
    int k = 1;
    double nu = 0.3;
    double E = 1.0;
    double tau = 1.0;
    int levels = 4;
    int base_resolution = 4;
    std::string solution = "paper-trig";
    std::string out = "out";
};
StudyConfig parse_config(std::istream& is);
StudyConfig parse_config_file(const std::string& path);

DomainGeometry domain_geometry(const StudyConfig& cfg);
Mesh build_domain_mesh(const StudyConfig& cfg, const DomainGeometry& g, int level);

struct RunResult {
    Mesh mesh;
    TransferPathSet paths;
    MeshMetrics metrics;
    SolutionFields sol;
    ErrorRow errors;
};

/// Solves one refinement level of the configured problem.
RunResult run_single(const StudyConfig& cfg, int level);

/// Loops the refinement levels, collects the error report and writes
/// "<out>.csv"; deterministic given the config.
ErrorReport run_convergence(const StudyConfig& cfg);

} // namespace uhdg
