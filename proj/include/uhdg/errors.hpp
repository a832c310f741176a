// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

#include "uhdg/types.hpp"

namespace uhdg {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParameterError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

/// Geometry query failure; carries the last iterate so callers can fall back.
struct GeometryError : Error {
    Vec2 last_iterate;
    GeometryError(const std::string& msg, Vec2 last = {}) : Error(msg), last_iterate(last) {}
};

struct MeshError : Error {
    using Error::Error;
};

struct PathConstructionError : Error {
    int edge = -1;
    int qp = -1;
    PathConstructionError(const std::string& msg, int edge_, int qp_)
        : Error(msg), edge(edge_), qp(qp_) {}
};

struct AssemblyError : Error {
    int cell = -1;
    AssemblyError(const std::string& msg, int cell_) : Error(msg), cell(cell_) {}
};

struct SolverError : Error {
    double residual = 0.0;
    SolverError(const std::string& msg, double res) : Error(msg), residual(res) {}
};

struct PreconditionError : Error {
    using Error::Error;
};

} // namespace uhdg
