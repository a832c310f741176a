// SPDX-License-Identifier: Apache-2.0
//
// Reference-element polynomial bases and quadrature.
//
// The scalar basis is the orthonormal Dubiner basis on the reference triangle
// {(x,y): x,y >= 0, x+y <= 1}, ordered by total degree (the degree-exactly-k
// slice is the trailing k+1 entries). Stress bubbles are built per physical
// cell as row-wise curls of b*grad(q), b the cubic barycentric bubble and q a
// degree-exactly-k scalar polynomial.
//
// Coefficient layout contracts used by every downstream module:
//   sigma: [s11 (d_s)][s12 (d_s)][s21 (d_s)][s22 (d_s)][bubbles (k+1)]
//   u:     [u_x (d_s)][u_y (d_s)]
//   rho:   [q (d_s)]            with rho = q * [[0,1],[-1,0]]
//   uhat:  per edge [x (k+1)][y (k+1)] in the orthonormal Legendre basis of
//          the edge parametrized from the lower to the higher vertex index.
#pragma once

#include <span>
#include <vector>

#include "uhdg/errors.hpp"
#include "uhdg/types.hpp"

namespace uhdg {

inline int scalar_space_dim(int k) { return (k + 1) * (k + 2) / 2; }

struct LocalDofCounts {
    int n_sigma;
    int n_u;
    int n_rho;
    int n_uhat_per_edge;
};

/// Sizes of the per-cell spaces V(K), W(K), A(K) and the per-edge trace space.
LocalDofCounts local_dof_counts(int k);

/// Gauss-Legendre rule on [0,1], exact for polynomials of degree 2n-1.
struct QuadratureRule1D {
    std::vector<double> points;
    std::vector<double> weights;
    int size() const { return static_cast<int>(points.size()); }
};
QuadratureRule1D gauss_rule_01(int npts);

/// Positive-weight rule on the reference triangle, exact to the requested
/// total degree (collapsed tensor-product Gauss construction).
struct TriangleRule {
    std::vector<Vec2> points;
    std::vector<double> weights;
    int degree = 0;
    int size() const { return static_cast<int>(points.size()); }
};
TriangleRule triangle_rule(int exactness_degree);

/// Scalar basis derivatives at one reference point, arrays of size d_s.
/// Orders above the requested one are left empty.
struct ScalarBasisPoint {
    std::vector<double> val;
    std::vector<double> dx, dy;
    std::vector<double> dxx, dxy, dyy;
    std::vector<double> dxxx, dxxy, dxyy, dyyy;
};

/// Evaluates the orthonormal scalar P_k basis at a reference point with
/// derivatives up to `order` (0..3). Supported degrees k in {1,2,3}.
void scalar_basis_reference(int k, const Vec2& xi, int order, ScalarBasisPoint& out);

/// Orthonormal Legendre basis of degree <= k on [0,1]; out must hold k+1 values.
void edge_basis_values(int k, double s, double* out);

/// Affine geometry of a physical triangle.
struct PhysTriangle {
    Vec2 v0, v1, v2;

    Vec2 map(const Vec2& ref) const {
        return v0 + (v1 - v0) * ref.x + (v2 - v0) * ref.y;
    }
    Vec2 pullback(const Vec2& x) const;
    double det_jacobian() const { return (v1 - v0).cross(v2 - v0); }
    double area() const { return 0.5 * det_jacobian(); }
    double diameter() const;
    double inradius() const;
    // columns of inverse(J)
    void inverse_jacobian(double inv[4]) const;
    std::array<double, 3> barycentric(const Vec2& x) const;
};

/// Scalar basis bound to a physical cell: values and physical-space
/// derivatives at arbitrary physical points (inside or extrapolated).
struct ElementBasis {
    int k = 1;
    PhysTriangle tri;
    double jinv[4] = {1, 0, 0, 1};

    ElementBasis() = default;
    ElementBasis(int k_, const PhysTriangle& t);

    /// derivatives up to `order` pushed forward to physical coordinates
    void eval(const Vec2& x, int order, ScalarBasisPoint& out) const;
};

/// One stress-bubble tensor with enough derivative data for assembly,
/// traces and the inverse-inequality diagnostics.
struct BubbleValue {
    Tensor2 value;
    Vec2 divergence;          // row-wise divergence (vanishes analytically)
    Tensor2 grad_col_x;       // d/dx of each entry, row-major
    Tensor2 grad_col_y;       // d/dy of each entry
};

/// Evaluates the k+1 bubble tensors of B(K) at a physical point.
void bubble_basis(int k, const PhysTriangle& tri, const Vec2& x,
                  std::vector<BubbleValue>& out);

/// Immutable tables shared by assembly, transfer and error evaluation.
struct SpaceTables {
    int k = 1;
    TriangleRule tri;        // exact to >= 2k+6
    QuadratureRule1D seg;    // k+3 points, exact to 2k+5; edges and segments

    static SpaceTables build(int k);
    int d_s() const { return scalar_space_dim(k); }
    LocalDofCounts dofs() const { return local_dof_counts(k); }
};

/// Field evaluation from coefficient blocks (layouts in the header comment).
/// Valid at any physical point, including extrapolation outside the cell.
Tensor2 eval_stress_coeffs(int k, const PhysTriangle& tri, std::span<const double> coeffs,
                           const Vec2& x);
Vec2 eval_vector_coeffs(int k, const PhysTriangle& tri, std::span<const double> coeffs,
                        const Vec2& x);
double eval_scalar_coeffs(int k, const PhysTriangle& tri, std::span<const double> coeffs,
                          const Vec2& x);

} // namespace uhdg
