// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>

namespace uhdg {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }
    Vec2 normalized() const { double n = norm(); return {x / n, y / n}; }
    // +90 degree rotation
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// 2x2 tensor stored as 4 reals in row-major (m11, m12, m21, m22) order.
/// This ordering is the contract for all tensor-valued coefficient blocks.
struct Tensor2 {
    std::array<double, 4> m{0.0, 0.0, 0.0, 0.0};

    Tensor2() = default;
    Tensor2(double a11, double a12, double a21, double a22) : m{a11, a12, a21, a22} {}

    static Tensor2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    // J = [[0,1],[-1,0]], the antisymmetric generator
    static Tensor2 rotation_generator() { return {0.0, 1.0, -1.0, 0.0}; }
    static Tensor2 outer(const Vec2& a, const Vec2& b) {
        return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y};
    }

    double& operator()(int i, int j) { return m[2 * i + j]; }
    double operator()(int i, int j) const { return m[2 * i + j]; }

    Tensor2 operator+(const Tensor2& o) const {
        return {m[0] + o.m[0], m[1] + o.m[1], m[2] + o.m[2], m[3] + o.m[3]};
    }
    Tensor2 operator-(const Tensor2& o) const {
        return {m[0] - o.m[0], m[1] - o.m[1], m[2] - o.m[2], m[3] - o.m[3]};
    }
    Tensor2 operator*(double s) const { return {m[0] * s, m[1] * s, m[2] * s, m[3] * s}; }
    Tensor2& operator+=(const Tensor2& o) {
        for (int i = 0; i < 4; ++i) m[i] += o.m[i];
        return *this;
    }

    double trace() const { return m[0] + m[3]; }
    Tensor2 transpose() const { return {m[0], m[2], m[1], m[3]}; }
    Vec2 apply(const Vec2& v) const {
        return {m[0] * v.x + m[1] * v.y, m[2] * v.x + m[3] * v.y};
    }
    // Frobenius pairing
    double ddot(const Tensor2& o) const {
        return m[0] * o.m[0] + m[1] * o.m[1] + m[2] * o.m[2] + m[3] * o.m[3];
    }
    double frobenius_norm() const { return std::sqrt(ddot(*this)); }
};

inline Tensor2 operator*(double s, const Tensor2& t) { return t * s; }

struct BBox {
    Vec2 lo;
    Vec2 hi;

    bool contains(const Vec2& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    }
    BBox inflated(double rel) const {
        Vec2 c = (lo + hi) * 0.5;
        Vec2 half = (hi - lo) * (0.5 * (1.0 + rel));
        return {c - half, c + half};
    }
};

} // namespace uhdg
