// SPDX-License-Identifier: Apache-2.0
#include "uhdg/material.hpp"

namespace uhdg {

MaterialParams lame_from_E_nu(double E, double nu) {
    if (!(E > 0.0))
        throw InvalidParameterError("lame_from_E_nu: Young's modulus must be positive");
    if (!(nu > 0.0 && nu < 0.5))
        throw InvalidParameterError("lame_from_E_nu: Poisson ratio must lie in (0, 1/2)");
    MaterialParams m;
    m.E = E;
    m.nu = nu;
    m.mu = E / (2.0 * (1.0 + nu));
    m.lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    return m;
}

Tensor2 apply_A(const Tensor2& xi, const MaterialParams& m) {
    const double n = 2.0;
    const double c = m.lambda / (2.0 * m.mu * (n * m.lambda + 2.0 * m.mu));
    const double t = xi.trace();
    Tensor2 r = xi * (1.0 / (2.0 * m.mu));
    r.m[0] -= c * t;
    r.m[3] -= c * t;
    return r;
}

Tensor2 apply_Ainv(const Tensor2& xi, const MaterialParams& m) {
    const double t = xi.trace();
    Tensor2 r = xi * (2.0 * m.mu);
    r.m[0] += m.lambda * t;
    r.m[3] += m.lambda * t;
    return r;
}

} // namespace uhdg
