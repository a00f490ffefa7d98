#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace magscatter {

template <std::size_t N>
using Vec = std::array<double, N>;

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

template <std::size_t N>
constexpr Vec<N> operator+(const Vec<N>& a, const Vec<N>& b) {
    Vec<N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + b[i];
    return r;
}

template <std::size_t N>
constexpr Vec<N> operator-(const Vec<N>& a, const Vec<N>& b) {
    Vec<N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] - b[i];
    return r;
}

template <std::size_t N>
constexpr Vec<N> operator-(const Vec<N>& a) {
    Vec<N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = -a[i];
    return r;
}

template <std::size_t N>
constexpr Vec<N> operator*(double s, const Vec<N>& a) {
    Vec<N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = s * a[i];
    return r;
}

template <std::size_t N>
constexpr Vec<N> operator*(const Vec<N>& a, double s) {
    return s * a;
}

template <std::size_t N>
constexpr Vec<N> operator/(const Vec<N>& a, double s) {
    return (1.0 / s) * a;
}

template <std::size_t N>
constexpr Vec<N>& operator+=(Vec<N>& a, const Vec<N>& b) {
    for (std::size_t i = 0; i < N; ++i) a[i] += b[i];
    return a;
}

template <std::size_t N>
constexpr double dot(const Vec<N>& a, const Vec<N>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
    return s;
}

template <std::size_t N>
inline double norm(const Vec<N>& a) {
    if constexpr (N == 2) return std::hypot(a[0], a[1]);
    else if constexpr (N == 3) return std::hypot(a[0], a[1], a[2]);
    else return std::sqrt(dot(a, a));
}

template <std::size_t N>
inline Vec<N> normalized(const Vec<N>& a) {
    return a / norm(a);
}

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// 2x2 determinant det[a b] with a, b as columns.
constexpr double det2(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

// Counterclockwise rotation by pi/2.
constexpr Vec2 perp(const Vec2& a) { return {-a[1], a[0]}; }

inline Vec2 unit_from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }

template <std::size_t N>
inline double max_abs(const Vec<N>& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace magscatter
