// SPDX-License-Identifier: Apache-2.0
//
// Computable per-edge constants of the closeness assumptions: the
// extrapolation ratio C_ext, the directional inverse-inequality constant
// C_inv and the discrete trace constant C_tr, each as the largest
// generalized eigenvalue of a pair of Gram matrices.
#pragma once

#include <vector>

#include "uhdg/mesh.hpp"
#include "uhdg/spaces.hpp"
#include "uhdg/transfer.hpp"

namespace uhdg {

struct EdgeDiagnostics {
    int edge = -1;
    double r_e = 0.0;
    double C_ext = 0.0;   // NaN when skipped (r_e ~ 0)
    double C_inv = 0.0;
    double C_tr = 0.0;
    bool ext_skipped = false;
};

struct DiagnosticsReport {
    std::vector<EdgeDiagnostics> edges;
    double R = 0.0;
};

DiagnosticsReport diagnostics_constants(const Mesh& m, const TransferPathSet& paths,
                                        const SpaceTables& tables);

} // namespace uhdg
