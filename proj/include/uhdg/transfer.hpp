// SPDX-License-Identifier: Apache-2.0
//
// Transferring paths from boundary-edge quadrature points x on Gamma_h to
// points xbar on Gamma, and the line-integral moments of extrapolated cell
// polynomials entering the boundary data
//   gtilde(x) = g(xbar) - int_0^l (A sigma + rho)(x + s t) t ds.
#pragma once

#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "uhdg/geometry.hpp"
#include "uhdg/material.hpp"
#include "uhdg/mesh.hpp"
#include "uhdg/spaces.hpp"

namespace uhdg {

struct TransferPath {
    int edge = -1;
    int qp = -1;
    Vec2 x;          // on Gamma_h
    Vec2 xbar;       // on Gamma
    double l = 0.0;  // |xbar - x|
    Vec2 t;          // unit tangent from x to xbar (n_e when l = 0)
    int owner_cell = -1;
};

struct TransferPathSet {
    std::vector<int> boundary_edges;
    std::vector<std::vector<TransferPath>> paths;          // per boundary edge
    std::vector<std::array<double, 2>> endpoint_l;         // endpoint distances to Gamma
    bool non_crossing_certified = false;

    const std::vector<TransferPath>* find_edge(int edge_id) const {
        auto it = edge_index_.find(edge_id);
        return it == edge_index_.end() ? nullptr : &paths[it->second];
    }
    const std::array<double, 2>& endpoint_lengths(int edge_id) const {
        return endpoint_l[edge_index_.at(edge_id)];
    }
    double max_length() const;
    void rebuild_index();

  private:
    std::unordered_map<int, int> edge_index_;
};

/// Builds one path per boundary-edge quadrature point. Primary candidate:
/// closest-point projection; fallback: ray along the edge normal. Candidates
/// must end on Gamma, keep the open segment outside the closed Omega_h and
/// inside the closure of Omega, and not cross paths of the same or adjacent
/// edge families. Throws PathConstructionError naming edge and point when
/// both candidates fail.
TransferPathSet build_paths(const Mesh& m, const DomainGeometry& g, const SpaceTables& tables);

/// Integral term of gtilde along one path, for the owner cell's coefficient
/// blocks (layouts documented in spaces.hpp). Gauss quadrature on [0, l];
/// exact for the polynomial integrand.
Vec2 segment_moment(const TransferPath& path, std::span<const double> sigma_coeffs,
                    std::span<const double> rho_coeffs, const MaterialParams& m,
                    const SpaceTables& tables, const Mesh& mesh);

/// Linear-in-coefficients form of segment_moment:
/// B_sigma * sigma + B_rho * rho = segment_moment(...).
void transfer_row_blocks(const TransferPath& path, const Mesh& mesh, const SpaceTables& tables,
                         const MaterialParams& m, Eigen::MatrixXd& B_sigma,
                         Eigen::MatrixXd& B_rho);

/// Debug dump, one line per path: edge,qp,x0,y0,x1,y1,l
void dump_paths_csv(const TransferPathSet& set, std::ostream& os);

} // namespace uhdg
