#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "magscatter/amplitude.hpp"
#include "magscatter/error.hpp"
#include "magscatter/fields.hpp"
#include "magscatter/gauge.hpp"
#include "magscatter/numerics.hpp"
#include "magscatter/section.hpp"
#include "magscatter/vec.hpp"

namespace magscatter {

// Axially symmetric solenoid: B = alpha (x2, -x1, 0) / rho^2 inside the torus swept by `shape`.
struct SolenoidGeometry {
    double alpha = 1.0;
    SectionShape shape;
    double z1 = 0.0;
    double z2 = 0.0;

    static SolenoidGeometry make(double alpha, SectionShape shape) {
        const double z1 = shape.z1(), z2 = shape.z2();
        return {alpha, std::move(shape), z1, z2};
    }
    static SolenoidGeometry disc(double l, double r, double alpha) { return make(alpha, SectionShape::disc(l, r)); }
    static SolenoidGeometry from_spec(const FieldSpec& spec) {
        if (spec.family() != FieldFamily::toroidal_solenoid_3d)
            throw Error(ErrorCode::InvalidSpec, "solenoid geometry needs a toroidal_solenoid_3d field");
        return make(spec.param("alpha"), spec.section());
    }
};

// z(x) = x3 / rho: slope of the ray from the origin through x in its meridian half-plane.
inline double solenoid_slope(const Vec3& x) { return x[2] / std::hypot(x[0], x[1]); }

// Distances along the unit ray (1, z)/sqrt(1+z^2) at which it enters and leaves the section.
inline std::pair<double, double> torus_kappa(double z, const SectionShape& shape) {
    const double tol = 1e-12 * std::max(1.0, std::abs(z));
    if (z < shape.z1() - tol || z > shape.z2() + tol)
        throw Error(ErrorCode::OutsideTangencyRange, "ray slope outside the tangency range",
                    "z=" + format_number(z) + ", range [" + format_number(shape.z1()) + ", " +
                        format_number(shape.z2()) + "]");
    if (shape.kind() == SectionShape::Kind::disc) {
        const double l = shape.disc_l(), r = shape.disc_r();
        const double c = 1.0 / std::sqrt(1.0 + z * z);
        const double sq = std::sqrt(std::max(0.0, r * r - (l * l - r * r) * z * z));
        return {c * (l - sq), c * (l + sq)};
    }
    if (auto hits = shape.ray_hits(z)) return *hits;
    // Numerically at tangency: move toward the interior slope until the ray meets the section.
    const double zc = shape.center()[1] / shape.center()[0];
    double inside = zc, outside = z;
    for (int i = 0; i < 200 && std::abs(inside - outside) > 1e-15 * std::max(1.0, std::abs(z)); ++i) {
        const double mid = 0.5 * (inside + outside);
        if (mid == inside || mid == outside) break;
        (shape.ray_hits(mid) ? inside : outside) = mid;
    }
    const auto hits = shape.ray_hits(inside);
    if (!hits) throw Error(ErrorCode::NonConvergence, "could not locate the tangent ray");
    const double mean = 0.5 * (hits->first + hits->second);
    return {mean, mean};
}

// g(z) = -alpha (kappa_+ - kappa_-), zero outside (z1, z2).
inline double torus_g(double z, const SolenoidGeometry& geom) {
    if (z <= geom.z1 || z >= geom.z2) return 0.0;
    const auto [km, kp] = torus_kappa(z, geom.shape);
    return -geom.alpha * (kp - km);
}

// G(z) = -int_{z1}^{z} g(t) (t^2+1)^{-1/2} dt.
inline double torus_G(double z, const SolenoidGeometry& geom, const QuadratureConfig& cfg = {}) {
    if (z <= geom.z1) return 0.0;
    const double top = std::min(z, geom.z2);
    return integrate_1d([&](double t) { return -torus_g(t, geom) / std::sqrt(1.0 + t * t); }, geom.z1, top, cfg)
        .value;
}

inline double torus_U0(const SolenoidGeometry& geom, const QuadratureConfig& cfg = {}) {
    return torus_G(geom.z2, geom, cfg);
}

// U(x) = G(z(x)); constant along rays and on circles about the axis.
inline double torus_U(const Vec3& x, const SolenoidGeometry& geom, const QuadratureConfig& cfg = {}) {
    const double rho = std::hypot(x[0], x[1]);
    if (rho == 0.0) return x[2] > 0.0 ? torus_U0(geom, cfg) : 0.0;
    return torus_G(x[2] / rho, geom, cfg);
}

// u(omega) = U(omega) - U(-omega) = q(z(omega)) with q(z) = G(z) - G(-z).
inline double torus_u(const Vec3& omega, const SolenoidGeometry& geom, const QuadratureConfig& cfg = {}) {
    const double n = std::hypot(omega[0], omega[1]);
    if (n == 0.0) {
        const double q0 = torus_U0(geom, cfg);
        return omega[2] > 0.0 ? q0 : -q0;
    }
    const double z = omega[2] / n;
    return torus_G(z, geom, cfg) - torus_G(-z, geom, cfg);
}

struct SectionFlux {
    double quadrature = 0.0;  // flux of B through {x2 = 0, x1 > 0} with normal +e2
    double minus_U0 = 0.0;
    double defect = 0.0;  // |quadrature + U0|
};

// Both sides of the flux identity Phi_s = -U0.
inline SectionFlux torus_flux_section(const SolenoidGeometry& geom, const QuadratureConfig& cfg = {}) {
    const Vec2 c = geom.shape.center();
    SurfacePatch patch;
    patch.u0 = 0.0;
    patch.u1 = 1.0;
    patch.v0 = 0.0;
    patch.v1 = kTwoPi;
    patch.area_element = [&](double t, double phi) {
        const double R = geom.shape.boundary_radius(phi);
        return t * R * R;
    };
    // On x2 = 0, x1 = rho > 0 the field is (0, -alpha/rho, 0).
    auto integrand = [&](double t, double phi) {
        const double rho = c[0] + t * geom.shape.boundary_radius(phi) * std::cos(phi);
        return -geom.alpha / rho;
    };
    SectionFlux out;
    out.quadrature = integrate_surface_patch(integrand, patch, cfg).value;
    out.minus_U0 = -torus_U0(geom, cfg);
    out.defect = std::abs(out.quadrature - out.minus_U0);
    return out;
}

// Image of exp(i u(omega)) over the sphere: the arc [-|Phi_s|, |Phi_s|], or the full circle.
inline SpectralSet spectrum_from_section_flux(double phi_s) {
    const double a = std::abs(phi_s);
    if (a >= std::numbers::pi) return SpectralSet::full();
    return SpectralSet::from_arcs({{-a, a}});
}

inline SpectralSet torus_spectrum(const SolenoidGeometry& geom) {
    return spectrum_from_section_flux(torus_flux_section(geom).quadrature);
}

// Closed forms of the transversal potential, by region.
enum class SolenoidRegion { outside_cone, interior_shadow, inside_torus, exterior_shadow };

inline SolenoidRegion solenoid_region(const Vec3& x, const SolenoidGeometry& geom) {
    const double rho = std::hypot(x[0], x[1]);
    if (rho == 0.0) return SolenoidRegion::outside_cone;
    const double z = x[2] / rho;
    if (z <= geom.z1 || z >= geom.z2) return SolenoidRegion::outside_cone;
    const auto [km, kp] = torus_kappa(z, geom.shape);
    const double r = norm(x);
    if (r <= km) return SolenoidRegion::interior_shadow;
    if (r < kp) return SolenoidRegion::inside_torus;
    return SolenoidRegion::exterior_shadow;
}

namespace detail {

inline Vec3 solenoid_direction(const Vec3& x) {
    const double rho2 = x[0] * x[0] + x[1] * x[1];
    return {x[0] * x[2] / rho2, x[1] * x[2] / rho2, -1.0};
}

}  // namespace detail

// A^(inf)(x) = g(z(x)) / |x| (x1 x3 / rho^2, x2 x3 / rho^2, -1).
inline Vec3 solenoid_a_inf(const Vec3& x, const SolenoidGeometry& geom) {
    const double rho = std::hypot(x[0], x[1]);
    if (rho == 0.0) return {0.0, 0.0, 0.0};
    return (torus_g(x[2] / rho, geom) / norm(x)) * detail::solenoid_direction(x);
}

// solenoid_a_inf with the cone crossings attached for line integrals.
inline AInfField solenoid_a_inf_field(const SolenoidGeometry& geom) {
    return {[geom](const Vec3& x) { return solenoid_a_inf(x, geom); },
            [z1 = geom.z1, z2 = geom.z2](const Vec3& x, const Vec3& xi) { return cone_pair_breaks(z1, z2, x, xi); }};
}

// A^(tr) by region: 0 before the torus, -alpha (1 - kappa_-/|x|)(...) inside, A^(inf) beyond.
inline Vec3 solenoid_transversal_closed_form(const Vec3& x, const SolenoidGeometry& geom) {
    switch (solenoid_region(x, geom)) {
        case SolenoidRegion::outside_cone:
        case SolenoidRegion::interior_shadow: return {0.0, 0.0, 0.0};
        case SolenoidRegion::inside_torus: {
            const double km = torus_kappa(solenoid_slope(x), geom.shape).first;
            return (-geom.alpha * (1.0 - km / norm(x))) * detail::solenoid_direction(x);
        }
        case SolenoidRegion::exterior_shadow: return solenoid_a_inf(x, geom);
    }
    return {0.0, 0.0, 0.0};
}

}  // namespace magscatter
