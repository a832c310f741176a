// SPDX-License-Identifier: Apache-2.0
//
// Level-set descriptions of the physical domain Omega and boundary Gamma,
// with the closest-point and ray queries used by meshing and path building.
// Convention: phi < 0 inside Omega, phi = 0 on Gamma.
#pragma once

#include <functional>
#include <string>

#include "uhdg/errors.hpp"
#include "uhdg/types.hpp"

namespace uhdg {

enum class DomainKind { UnitDisk, Kidney, UnitSquare, CustomLevelSet };

struct DomainGeometry {
    DomainKind kind = DomainKind::UnitDisk;
    std::string name;
    BBox bbox;
    std::function<double(Vec2)> phi;
    std::function<Vec2(Vec2)> grad;
    // Hessian (hxx, hxy, hyy); used by the closest-point Newton solve
    std::function<std::array<double, 3>(Vec2)> hess;
};

/// phi(x) and grad phi(x) in one call.
std::pair<double, Vec2> level_set_eval(const DomainGeometry& g, const Vec2& x);

/// Looks up a geometry by name: "unit-disk", "kidney", "unit-square", or any
/// name previously added with register_level_set. Throws ConfigError on an
/// unknown name.
DomainGeometry geometry_from_name(const std::string& name);

/// Adds a custom level set to the registry (config files reference it by name;
/// there is no runtime expression parsing).
void register_level_set(const std::string& name, DomainGeometry geometry);

/// Closest point projection of x onto Gamma = {phi = 0}. Newton iteration on
/// the constrained distance problem, seeded at x, with damped step halving.
/// Throws GeometryError (carrying the last iterate) on non-convergence.
Vec2 closest_point(const DomainGeometry& g, const Vec2& x, double tol = 1e-12,
                   int max_iter = 50);

/// Smallest s in (0, s_max] with phi(x + s d) = 0, for phi(x) <= 0 and |d| = 1.
/// Bracketing march plus bisection/Newton polish to |phi| <= 1e-12.
/// Throws GeometryError if the ray never leaves Omega on (0, s_max].
std::pair<double, Vec2> ray_boundary_intersection(const DomainGeometry& g, const Vec2& x,
                                                  const Vec2& d, double s_max);

} // namespace uhdg
