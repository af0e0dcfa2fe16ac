#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace gfcsim {

/// Two-axis quantity: stationary-frame (alpha, beta) or rotating-frame (d, q).
struct Vec2 {
    double a{0.0};
    double b{0.0};

    constexpr Vec2 operator+(Vec2 o) const { return {a + o.a, b + o.b}; }
    constexpr Vec2 operator-(Vec2 o) const { return {a - o.a, b - o.b}; }
    constexpr Vec2 operator*(double s) const { return {a * s, b * s}; }
    constexpr Vec2 operator/(double s) const { return {a / s, b / s}; }
    constexpr Vec2& operator+=(Vec2 o) { a += o.a; b += o.b; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { a -= o.a; b -= o.b; return *this; }

    double norm() const { return std::hypot(a, b); }
    constexpr double norm2() const { return a * a + b * b; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.a, s * v.b}; }
constexpr double dot(Vec2 u, Vec2 v) { return u.a * v.a + u.b * v.b; }

/// Rotation by +90 degrees (multiplication by j for a rotating vector).
constexpr Vec2 rot90(Vec2 v) { return {-v.b, v.a}; }

/// Bad or inconsistent configuration (scenario files, overrides, topology).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A model left its validity domain during evaluation.
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gfcsim
