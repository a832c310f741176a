// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "uhdg/errors.hpp"
#include "uhdg/types.hpp"

namespace uhdg {

/// Isotropic material data: Young's modulus E, Poisson ratio nu and the
/// Lame parameters mu = E/(2(1+nu)), lambda = E nu/((1+nu)(1-2nu)).
struct MaterialParams {
    double E = 0.0;
    double nu = 0.0;
    double mu = 0.0;
    double lambda = 0.0;
};

/// Requires E > 0 and nu in (0, 1/2); throws InvalidParameterError otherwise.
MaterialParams lame_from_E_nu(double E, double nu);

/// Compliance tensor: A(xi) = xi/(2 mu) - lambda tr(xi) I / (2 mu (2 lambda + 2 mu)).
Tensor2 apply_A(const Tensor2& xi, const MaterialParams& m);

/// Stiffness tensor: A^{-1}(xi) = 2 mu xi + lambda tr(xi) I.
Tensor2 apply_Ainv(const Tensor2& xi, const MaterialParams& m);

} // namespace uhdg
