#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "magscatter/error.hpp"
#include "magscatter/fields.hpp"
#include "magscatter/gauge.hpp"
#include "magscatter/numerics.hpp"
#include "magscatter/vec.hpp"

namespace magscatter {

// A point (omega, z) of the unit cotangent bundle of the sphere.
template <std::size_t N>
struct TangentPair {
    Vec<N> omega;
    Vec<N> z;

    static TangentPair make(const Vec<N>& omega, const Vec<N>& z, double tol = 1e-10) {
        if (std::abs(norm(omega) - 1.0) > tol || std::abs(norm(z) - 1.0) > tol)
            throw Error(ErrorCode::InvalidArgument, "tangent pair vectors must be unit");
        if (std::abs(dot(omega, z)) > tol)
            throw Error(ErrorCode::NotOrthogonal, "tangent pair vectors must be orthogonal",
                        "<omega,z>=" + std::to_string(dot(omega, z)));
        return {omega, z};
    }
};

// I(x, xi) = int <A(x + t xi), xi> dt over the whole line.
// Evaluated with t = (|x|/|xi|) tan(psi), which maps the O(t^-2) integrand of a transversal
// potential to a bounded one on (-pi/2, pi/2).
template <std::size_t N, typename A>
double line_circulation_I(A&& a_inf, const Vec<N>& x, const Vec<N>& xi, const QuadratureConfig& cfg = {}) {
    const double nx = norm(x), nxi = norm(xi);
    if (nx == 0.0 || nxi == 0.0) throw Error(ErrorCode::InvalidArgument, "I(x, xi) needs x != 0 and xi != 0");
    if (std::abs(dot(x, xi)) > 1e-10 * nx * nxi)
        throw Error(ErrorCode::NotOrthogonal, "I(x, xi) needs <x, xi> = 0",
                    "<x,xi>/(|x||xi|)=" + std::to_string(dot(x, xi) / (nx * nxi)));
    const double L = nx / nxi;
    auto g = [&](double psi) {
        const double c = std::cos(psi);
        return dot(a_inf(x + (L * std::tan(psi)) * xi), xi) * L / (c * c);
    };
    // Size of the mapped integrand before cancellation in the inner product; its rounding
    // error is the floor below which growth near the endpoints is noise.
    auto g_scale = [&](double psi) {
        const double c = std::cos(psi);
        return norm(a_inf(x + (L * std::tan(psi)) * xi)) * nxi * L / (c * c);
    };
    constexpr double half = std::numbers::pi / 2.0;
    const double scale = std::abs(g(0.0));
    for (double side : {-1.0, 1.0}) {
        const double near = std::abs(g(side * (half - 1e-3)));
        const double far = std::abs(g(side * (half - 1e-7)));
        const double noise = 1e6 * std::numeric_limits<double>::epsilon() * g_scale(side * (half - 1e-7));
        if (far > 100.0 * std::max(near, scale) && far > 1e-12 && far > noise)
            throw Error(ErrorCode::DecayTooSlow, "circulation integrand decays slower than t^-2",
                        "mapped integrand grows from " + std::to_string(near) + " to " + std::to_string(far));
    }
    std::vector<double> breaks;
    if constexpr (requires { a_inf.line_breaks(x, xi); }) {
        for (double t : a_inf.line_breaks(x, xi)) {
            const double psi = std::atan(t / L);
            if (std::abs(psi) < half) breaks.push_back(psi);
        }
        std::sort(breaks.begin(), breaks.end());
    }
    return integrate_1d(g, -half, half, breaks, cfg).value;
}

// (omega^+, omega^-): rotations of omega by +pi/2 and -pi/2.
inline std::pair<Vec2, Vec2> rotate_perp(const Vec2& omega) {
    const Vec2 plus = perp(omega);
    return {plus, -plus};
}

// f(omega) = flux through the half-plane <x, omega> >= 0.
inline double half_plane_flux_f(const FieldSpec& spec, const Vec2& omega, const QuadratureConfig& cfg = {}) {
    detail::require_dimension(spec, 2, "half_plane_flux_f");
    if (spec.family() == FieldFamily::ab_point_flux_2d) return -std::numbers::pi * spec.ab_alpha();
    const double t = std::atan2(omega[1], omega[0]);
    constexpr double half = std::numbers::pi / 2.0;
    return integrate_polar_sector([&](const Vec2& x) { return spec.eval2(x); }, t - half, t + half, 0.0,
                                  quadrature_radius(spec, cfg), cfg)
        .value;
}

// Integral of a over the half-circle from omega^- to omega^+ (counterclockwise, through omega).
template <typename F>
double arc_integral_f(F&& a_func, const Vec2& omega, const QuadratureConfig& cfg = {}) {
    const double t = std::atan2(omega[1], omega[0]);
    constexpr double half = std::numbers::pi / 2.0;
    return integrate_1d([&](double s) { return a_func(unit_from_angle(s)); }, t - half, t + half, cfg).value;
}

}  // namespace magscatter
