// SPDX-License-Identifier: Apache-2.0
//
// Assembly and solution of the discrete scheme: per-cell blocks for the
// constitutive, equilibrium and weak-symmetry equations, the numerical trace
//   sigma_hat n = sigma n - tau (u - uhat),
// flux continuity on interior faces, boundary rows carrying the transferred
// datum gtilde, static condensation to the trace unknowns, sparse solve and
// back-substitution with post-solve residual certificates.
#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "uhdg/material.hpp"
#include "uhdg/mesh.hpp"
#include "uhdg/spaces.hpp"
#include "uhdg/transfer.hpp"

namespace uhdg {

using VectorField = std::function<Vec2(Vec2)>;

struct HdgConfig {
    double tau = 1.0;         // positive stabilization parameter, constant per face
    int k = 1;                // k >= 1
    double solver_tol = 1e-12;
};

/// Per-cell blocks. X = [sigma; u; rho] in the layouts of spaces.hpp;
/// the cell's trace unknowns are its three edges' dofs in local face order.
struct LocalSystem {
    int cell = -1;
    Eigen::MatrixXd Axx;  // (3.2a)-(3.2c) rows over X
    Eigen::MatrixXd Axu;  // coupling of those rows to the cell's trace dofs
    Eigen::VectorXd bx;
    Eigen::MatrixXd Cux;  // per-face row functionals applied to X
    Eigen::MatrixXd Muu;  // per-face row coupling to trace dofs (block diagonal)
    Eigen::VectorXd ru;
    Eigen::PartialPivLU<Eigen::MatrixXd> Axx_lu;
    bool factorized = false;
};

/// Rows of one boundary edge: M uhat_e + Q_sigma sigma + Q_rho rho = r.
struct BoundaryRow {
    Eigen::MatrixXd M;
    Eigen::MatrixXd Q_sigma;
    Eigen::MatrixXd Q_rho;
    Eigen::VectorXd r;
};

struct SchurBlock {
    Eigen::MatrixXd S;
    Eigen::VectorXd rhs;
};

struct GlobalSystem {
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b;
    int k = 1;
    int n_edges = 0;
    int trace_dofs_per_edge() const { return 2 * (k + 1); }
};

struct SolutionFields {
    int k = 1;
    double tau = 1.0;
    LocalDofCounts dofs{};
    std::vector<Eigen::VectorXd> X;  // per cell [sigma; u; rho]
    Eigen::VectorXd uhat;            // all edges, 2(k+1) per edge

    // post-solve certificates, relative residuals
    double weak_symmetry_residual = 0.0;
    double flux_residual = 0.0;
    double boundary_residual = 0.0;

    std::span<const double> sigma_coeffs(int cell) const {
        return {X[cell].data(), static_cast<size_t>(dofs.n_sigma)};
    }
    std::span<const double> u_coeffs(int cell) const {
        return {X[cell].data() + dofs.n_sigma, static_cast<size_t>(dofs.n_u)};
    }
    std::span<const double> rho_coeffs(int cell) const {
        return {X[cell].data() + dofs.n_sigma + dofs.n_u, static_cast<size_t>(dofs.n_rho)};
    }
    /// trace value on an edge at parameter s of the (a -> b) parametrization
    Vec2 uhat_at(int edge, double s) const;
    /// numerical trace sigma_hat n = sigma n - tau (u - uhat) seen from `cell`
    Vec2 sigma_hat_n(const Mesh& m, int cell, int edge, double s) const;
};

/// Cell blocks for the constitutive/equilibrium/weak-symmetry rows plus the
/// interior-face flux rows; boundary faces are left for the transfer rows.
LocalSystem assemble_local(const Mesh& m, int cell, const SpaceTables& tables,
                           const MaterialParams& mat, const HdgConfig& cfg,
                           const VectorField& f);

/// Boundary rows of edge `edge` from its transfer paths and the datum g on
/// Gamma. Throws PreconditionError when paths are missing.
BoundaryRow assemble_boundary_transfer(const Mesh& m, int edge, const TransferPathSet& paths,
                                       const SpaceTables& tables, const MaterialParams& mat,
                                       const VectorField& g);

/// Eliminates X; the boundary-row transfer blocks ride through the same local
/// solve. Throws AssemblyError (naming the cell) on a singular local block.
SchurBlock condense(LocalSystem& local);

/// Full pipeline up to the condensed global system. The returned locals are
/// kept (factorized) for reconstruction.
GlobalSystem assemble_global(const Mesh& m, const SpaceTables& tables, const MaterialParams& mat,
                             const HdgConfig& cfg, const VectorField& f, const VectorField& g,
                             const TransferPathSet& paths, std::vector<LocalSystem>& locals);

/// Sparse direct solve with a relative-residual check; throws SolverError
/// (carrying the attained residual) on failure.
Eigen::VectorXd solve(const GlobalSystem& gs, const HdgConfig& cfg);

/// Back-substitution plus the weak-symmetry / flux-continuity / boundary-row
/// certificates evaluated from the solved fields.
SolutionFields reconstruct(const Mesh& m, const SpaceTables& tables, const MaterialParams& mat,
                           const HdgConfig& cfg, std::vector<LocalSystem>& locals,
                           const Eigen::VectorXd& uhat, const TransferPathSet& paths,
                           const VectorField& g);

/// Condensed system in Matrix Market coordinate format; the right-hand side
/// goes to `path` + ".rhs" as a dense array.
void export_matrix_market(const GlobalSystem& gs, const std::string& path);

} // namespace uhdg
