#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "magscatter/amplitude.hpp"
#include "magscatter/circulation.hpp"
#include "magscatter/error.hpp"
#include "magscatter/fields.hpp"
#include "magscatter/gauge.hpp"
#include "magscatter/solenoid.hpp"

namespace magscatter {

struct InvariantResult {
    std::string suite;
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

namespace detail::verify {

using std::numbers::pi;

inline InvariantResult below(std::string suite, std::string name, double measured, double threshold) {
    return {std::move(suite), std::move(name), measured, threshold, measured < threshold};
}

inline FieldSpec dipole_spec() { return FieldSpec::make(FieldFamily::radial_plus_dipole_2d); }
inline FieldSpec gaussian_spec() { return FieldSpec::make(FieldFamily::gaussian2d); }
inline FieldSpec bump_spec() { return FieldSpec::make(FieldFamily::bump_3d); }
inline FieldSpec solenoid_spec() { return FieldSpec::make(FieldFamily::toroidal_solenoid_3d); }

inline Vec3 random_unit(std::mt19937& gen) {
    std::normal_distribution<double> n;
    return normalized(Vec3{n(gen), n(gen), n(gen)});
}

inline Vec3 random_tangent(std::mt19937& gen, const Vec3& w) {
    const Vec3 v = random_unit(gen);
    return normalized(v - dot(v, w) * w);
}

// Point with slope z = x3/rho at distance s from the origin, azimuth phi.
inline Vec3 ray_point(double z, double s, double phi) {
    const double c = 1.0 / std::sqrt(1.0 + z * z);
    return {s * c * std::cos(phi), s * c * std::sin(phi), s * c * z};
}

// Max |<A(x), x>| over random points in both dimensions.
inline double transversality_defect(int n_points, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double worst = 0.0;
    const auto g = gaussian_spec(), d = dipole_spec(), b = bump_spec(), s = solenoid_spec();
    for (int i = 0; i < n_points; ++i) {
        const Vec2 y{u(gen), u(gen)};
        const Vec3 x{2.0 * u(gen), 2.0 * u(gen), u(gen)};
        const auto& s2 = (i % 2 == 0) ? g : d;
        const auto& s3 = (i % 2 == 0) ? b : s;
        worst = std::max(worst, std::abs(dot(transversal_potential_2d(s2, y), y)));
        worst = std::max(worst, std::abs(dot(transversal_potential_3d(s3, x), x)));
    }
    return worst;
}

// max |curl A - B| / max |B| over random points; solenoid points keep 100 steps from the boundary.
inline double reconstruction_defect(const FieldSpec& spec, int n_points, unsigned seed) {
    std::mt19937 gen(seed);
    const double R = std::isfinite(spec.support_radius()) ? 1.1 * spec.support_radius() : 2.5;
    std::uniform_real_distribution<double> u(-R, R);
    double worst = 0.0, bmax = 0.0;
    int accepted = 0;
    while (accepted < n_points) {
        if (spec.dimension() == 2) {
            const Vec2 x{u(gen), u(gen)};
            auto A = [&spec](const Vec2& y) { return transversal_potential_2d(spec, y); };
            const double b = spec.eval2(x);
            bmax = std::max(bmax, std::abs(b));
            worst = std::max(worst, std::abs(fd_curl_2d(A, x, default_fd_step(norm(x))) - b));
        } else {
            const Vec3 x{u(gen), u(gen), u(gen)};
            const double h = default_fd_step(norm(x));
            if (spec.family() == FieldFamily::toroidal_solenoid_3d) {
                const auto& shape = spec.section();
                auto inside = [&shape](const Vec3& y) { return shape.contains({std::hypot(y[0], y[1]), y[2]}); };
                bool near_boundary = false;
                for (int k = 0; k < 3 && !near_boundary; ++k)
                    for (double sgn : {-1.0, 1.0}) {
                        Vec3 y = x;
                        y[k] += sgn * 100.0 * h;
                        if (inside(y) != inside(x)) near_boundary = true;
                    }
                if (near_boundary) continue;
            }
            auto A = [&spec](const Vec3& y) { return transversal_potential_3d(spec, y); };
            const Vec3 b = spec.eval3(x);
            bmax = std::max(bmax, norm(b));
            worst = std::max(worst, norm(fd_curl_3d(A, x, h) - b));
        }
        ++accepted;
    }
    return bmax > 0.0 ? worst / bmax : worst;
}

inline double homogeneity_defect() {
    std::mt19937 gen(21);
    double worst = 0.0;
    const auto d3 = decompose_potential<3>(bump_spec());
    const auto d2 = decompose_potential<2>(dipole_spec());
    for (int i = 0; i < 10; ++i) {
        const Vec3 x = (0.5 + i) * random_unit(gen);
        worst = std::max(worst, max_abs(d3.a_inf(2.0 * x) - 0.5 * d3.a_inf(x)));
        const Vec2 y{x[0], x[1]};
        worst = std::max(worst, max_abs(d2.a_inf(2.0 * y) - 0.5 * d2.a_inf(y)));
    }
    return worst;
}

inline double path_independence_defect(int n_points) {
    std::mt19937 gen(22);
    double worst = 0.0;
    for (const auto& spec : {bump_spec(), solenoid_spec()}) {
        const auto d = decompose_potential<3>(spec);
        for (int i = 0; i < n_points; ++i) {
            const Vec3 x = (0.5 + 2.0 * i / n_points) * random_unit(gen);
            const double a = gauge_scalar_U(d, x, kDefaultBasepoint, {}, Contour::radial_then_arc);
            const double b = gauge_scalar_U(d, x, kDefaultBasepoint, {}, Contour::arc_then_radial);
            worst = std::max(worst, std::abs(a - b));
        }
    }
    return worst;
}

// max |A| for the short-range potential of a compactly supported field outside max(R2, support).
inline double compact_support_defect(int n_points) {
    const auto spec = bump_spec();
    const auto cut = default_cutoff(spec);
    const ShortRangePotential A(spec, cut);
    std::mt19937 gen(23);
    const double R = std::max(cut.R2, spec.support_radius());
    double worst = 0.0;
    for (int i = 0; i < n_points; ++i) worst = std::max(worst, norm(A((R * (1.01 + 0.2 * i)) * random_unit(gen))));
    return worst;
}

// Coefficient change under a compactly supported gauge function.
inline double short_range_gauge_defect() {
    const auto spec = dipole_spec();
    VectorField<2> A = [spec](const Vec2& x) { return transversal_potential_2d(spec, x); };
    const Vec2 c{0.2, -0.1};
    auto phi = [c](const Vec2& x) { return 0.7 * bump(norm(x - c) / 1.2); };
    const auto shifted = apply_gauge<2>(A, {phi, nullptr});
    const double R = 3.0;
    const auto a = singular_amplitude_2d_from_potential(A, R);
    const auto b = singular_amplitude_2d_from_potential(shifted, R);
    double worst = std::max(std::abs(a.delta_coeff - b.delta_coeff), std::abs(a.pv_coeff - b.pv_coeff));
    for (int k = 0; k < 8; ++k) {
        const Vec2 w = unit_from_angle(2.0 * pi * k / 8.0);
        worst = std::max(worst, std::abs(a.phase(w) - b.phase(w)));
    }
    return worst;
}

inline std::vector<InvariantResult> gauge_suite() {
    std::vector<InvariantResult> out;
    out.push_back(below("gauge", "transversality max |<A,x>|", transversality_defect(200, 1), 1e-12));
    for (const auto& spec : {gaussian_spec(), dipole_spec(), bump_spec(), solenoid_spec()})
        out.push_back(below("gauge", "reconstruction " + std::string(family_name(spec.family())),
                            reconstruction_defect(spec, 100, 2), 1e-4));
    out.push_back(below("gauge", "homogeneity a_inf(2x) = a_inf(x)/2", homogeneity_defect(), 1e-10));
    out.push_back(below("gauge", "U path independence", path_independence_defect(10), 1e-8));
    out.push_back(below("gauge", "short-range potential compact support", compact_support_defect(10), 1e-12));
    out.push_back(below("gauge", "short-range gauge change leaves amplitude", short_range_gauge_defect(), 1e-8));
    return out;
}

inline double circulation_vs_flux_defect(const FieldSpec& spec, int n_dirs) {
    const auto d = decompose_potential<2>(spec);
    double worst = 0.0;
    for (int k = 0; k < n_dirs; ++k) {
        const Vec2 w = unit_from_angle(2.0 * pi * k / n_dirs);
        const double I = line_circulation_I<2>(d.a_inf, w, rotate_perp(w).first);
        worst = std::max(worst, std::abs(I - half_plane_flux_f(spec, w)));
    }
    return worst;
}

inline double flux_split_defect(const FieldSpec& spec, int n_dirs) {
    const double phi = total_flux_2d(spec, {}).value;
    double worst = 0.0;
    for (int k = 0; k < n_dirs; ++k) {
        const Vec2 w = unit_from_angle(2.0 * pi * k / n_dirs);
        worst = std::max(worst, std::abs(half_plane_flux_f(spec, w) + half_plane_flux_f(spec, -w) - phi));
    }
    return worst;
}

inline std::pair<double, double> circulation_symmetry_defects() {
    const auto d = decompose_potential<3>(bump_spec());
    std::mt19937 gen(31);
    double hom = 0.0, anti = 0.0;
    for (int i = 0; i < 8; ++i) {
        const Vec3 w = random_unit(gen), x = random_tangent(gen, w);
        const double I = line_circulation_I<3>(d.a_inf, x, w);
        hom = std::max(hom, std::abs(line_circulation_I<3>(d.a_inf, 2.0 * x, 3.0 * w) - I));
        anti = std::max(anti, std::abs(line_circulation_I<3>(d.a_inf, x, -1.0 * w) + I));
    }
    return {hom, anti};
}

// a_inf = grad U for a degree-0 U: spread of I over base points and distance from U(w) - U(-w).
inline std::pair<double, double> gradient_case_defects() {
    ScalarField<3> U = [](const Vec3& x) {
        const double r = norm(x);
        const double s = x[1] / r;
        return (x[0] + 2.0 * x[2]) / r + s * s * s;
    };
    auto a = [&U](const Vec3& x) { return fd_grad<3>(U, x, default_fd_step(norm(x))); };
    // Finite-difference noise limits the attainable line-integral accuracy.
    QuadratureConfig cfg;
    cfg.abs_tol = cfg.rel_tol = 1e-9;
    std::mt19937 gen(32);
    double spread = 0.0, value = 0.0;
    for (int k = 0; k < 4; ++k) {
        const Vec3 w = random_unit(gen);
        double lo = 1e300, hi = -1e300;
        for (int i = 0; i < 10; ++i) {
            const double I = line_circulation_I<3>(a, (0.3 + i) * random_tangent(gen, w), w, cfg);
            lo = std::min(lo, I);
            hi = std::max(hi, I);
        }
        spread = std::max(spread, hi - lo);
        value = std::max(value, std::abs(lo - (U(w) - U(-1.0 * w))));
    }
    return {spread, value};
}

inline std::vector<InvariantResult> circulation_suite() {
    std::vector<InvariantResult> out;
    for (const auto& spec : {gaussian_spec(), dipole_spec()}) {
        const std::string fam(family_name(spec.family()));
        out.push_back(below("circulation", "line circulation equals f, " + fam, circulation_vs_flux_defect(spec, 64), 1e-5));
        out.push_back(below("circulation", "flux split f(w) + f(-w) = flux, " + fam, flux_split_defect(spec, 64), 1e-6));
    }
    const auto [hom, anti] = circulation_symmetry_defects();
    out.push_back(below("circulation", "homogeneity I(2x, 3xi) = I(x, xi)", hom, 1e-8));
    out.push_back(below("circulation", "antisymmetry I(x, -xi) = -I(x, xi)", anti, 1e-8));
    const auto [spread, value] = gradient_case_defects();
    out.push_back(below("circulation", "gradient case independent of x", spread, 1e-5));
    out.push_back(below("circulation", "gradient case equals U(w) - U(-w)", value, 1e-5));
    return out;
}

inline double ab_partial_wave_defect() {
    double worst = 0.0;
    for (double alpha : {0.25, 0.5, 0.75})
        for (double delta : {0.5, 1.0, 2.0, pi, 4.0, 5.7}) {
            const auto k = ab_kernel_closed_form(delta, 0.0, alpha);
            worst = std::max(worst, std::abs(ab_partial_wave_sum(delta, 0.0, alpha, 4000, 0.999) - k.offdiag));
        }
    return worst;
}

inline std::vector<InvariantResult> amplitude_suite() {
    std::vector<InvariantResult> out;
    double trace = 0.0, ab = 0.0, integer = 0.0;
    for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0, 1.5}) {
        const auto s = singular_amplitude_2d(FieldSpec::make(FieldFamily::ab_point_flux_2d, {{"alpha", {alpha}}}));
        trace = std::max(trace, std::abs(s.delta_coeff * s.delta_coeff + pi * pi * s.pv_coeff * s.pv_coeff - 1.0));
        ab = std::max({ab, std::abs(s.delta_coeff - std::cos(pi * alpha)),
                       std::abs(std::abs(s.pv_coeff) - std::abs(std::sin(pi * alpha)) / pi)});
        if (alpha == 0.0 || alpha == 1.0) integer = std::max(integer, std::abs(s.pv_coeff));
    }
    out.push_back(below("amplitude", "unitarity trace delta^2 + (pi pv)^2 = 1", trace, 1e-14));
    out.push_back(below("amplitude", "point-flux coefficients match closed form", ab, 1e-10));
    out.push_back(below("amplitude", "partial waves match closed form", ab_partial_wave_defect(), 1e-2));
    out.push_back(below("amplitude", "integer flux has no principal-value part", integer, 1e-15));

    double qmax = 0.0, mean = 0.0;
    for (const auto& spec : {bump_spec(), solenoid_spec()}) {
        const auto d = decompose_potential<3>(spec);
        for (const Vec3& w : fibonacci_sphere(6)) {
            const auto sym = CircleSymbol::build(d.a_inf, w);
            mean = std::max(mean, std::abs(sym.sample_numerator_mean()));
            for (int k = 0; k < 4; ++k) {
                const double t = 2.0 * pi * k / 4.0;
                qmax = std::max(qmax, std::abs(sym.q(0.4 * (std::cos(t) * sym.u() + std::sin(t) * sym.v()), {}, {})));
            }
        }
    }
    out.push_back(below("amplitude", "3D short-range q kernel vanishes", qmax, 1e-3));
    out.push_back(below("amplitude", "q numerator has zero circle mean", mean, 1e-10));

    const auto sp = essential_spectrum_2d(dipole_spec(), 32);
    out.push_back({"amplitude", "2D spectrum is conjugation invariant", sp.set.approx_equal(sp.set.conjugate(), 1e-9) ? 0.0 : 1.0,
                   0.5, sp.set.approx_equal(sp.set.conjugate(), 1e-9)});

    const auto s = singular_amplitude_2d(dipole_spec());
    const auto t = gauge_covariance_transform(s, [](const Vec2& w) { return std::sin(3.0 * w[0]) + w[1]; });
    const double inv = std::max({std::abs(s.delta_coeff - t.delta_coeff), std::abs(s.pv_coeff - t.pv_coeff),
                                 std::abs(s.flux - t.flux)});
    out.push_back(below("amplitude", "gauge transform keeps delta, pv and flux", inv, 1e-12));
    return out;
}

// Transversal potential against its closed form before, inside and beyond the section, along rays.
inline double region_law_defect(const FieldSpec& spec, int n_rays, unsigned seed) {
    const auto geom = SolenoidGeometry::from_spec(spec);
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> uz(0.98 * geom.z1, 0.98 * geom.z2), uphi(0.0, 2.0 * pi), u01(0.02, 0.98);
    double worst = 0.0;
    for (int i = 0; i < n_rays; ++i) {
        const double z = uz(gen), phi = uphi(gen);
        const auto [km, kp] = torus_kappa(z, geom.shape);
        for (double r : {km * u01(gen), km + (kp - km) * u01(gen), kp * (1.0 + 2.0 * u01(gen))}) {
            const Vec3 x = ray_point(z, r, phi);
            worst = std::max(worst, max_abs(transversal_potential_3d(spec, x) - solenoid_transversal_closed_form(x, geom)));
        }
    }
    return worst;
}

inline std::vector<InvariantResult> solenoid_suite() {
    std::vector<InvariantResult> out;
    const auto spec = solenoid_spec();
    const auto geom = SolenoidGeometry::from_spec(spec);

    std::mt19937 gen(41);
    out.push_back(below("solenoid", "region law of the transversal potential", region_law_defect(spec, 50, 41), 1e-8));

    const auto cut = default_cutoff(spec);
    const ShortRangePotential A(spec, cut);
    const double U0 = torus_U0(geom);
    double vanish = 0.0;
    for (double r : {0.3 * cut.R1, 0.5 * (cut.R1 + cut.R2), 1.5 * cut.R2, 6.0}) {
        vanish = std::max(vanish, norm(A(ray_point(1.5 * geom.z1 - 0.5, r, 0.3))));
        const Vec3 x = ray_point(1.5 * geom.z2 + 0.5, r, 2.0);
        vanish = std::max(vanish, max_abs(A(x) - (-U0 * cut.eta_prime(r) / r) * x));
    }
    out.push_back(below("solenoid", "short-range potential outside the cone", vanish, 1e-8));

    double ring = 0.0;
    for (double w3 : {-0.45, -0.2, 0.1, 0.3, 0.5}) {
        double lo = 1e300, hi = -1e300;
        const double n = std::sqrt(1.0 - w3 * w3);
        for (int k = 0; k < 16; ++k) {
            const double t = 2.0 * pi * k / 16.0;
            const double u = torus_u({n * std::cos(t), n * std::sin(t), w3}, geom);
            lo = std::min(lo, u);
            hi = std::max(hi, u);
        }
        ring = std::max(ring, hi - lo);
    }
    out.push_back(below("solenoid", "u depends only on omega3", ring, 1e-10));

    // Largest decrease of q(z) on a grid, for alpha > 0.
    double drop = 0.0, prev = torus_u({std::sqrt(1.0 - 0.99 * 0.99), 0.0, -0.99}, geom);
    for (double w3 = -0.95; w3 <= 0.99; w3 += 0.02) {
        const double u = torus_u({std::sqrt(1.0 - w3 * w3), 0.0, w3}, geom);
        drop = std::max(drop, prev - u);
        prev = u;
    }
    out.push_back(below("solenoid", "q increasing for alpha > 0", drop, 1e-12));

    const auto a = solenoid_a_inf_field(geom);
    double collapse = 0.0;
    for (int i = 0; i < 6; ++i) {
        const Vec3 w = random_unit(gen);
        const double u = torus_u(w, geom);
        for (double s : {0.5, 3.0}) collapse = std::max(collapse, std::abs(line_circulation_I<3>(a, s * random_tangent(gen, w), w) - u));
    }
    out.push_back(below("solenoid", "line circulation equals u(omega)", collapse, 1e-5));

    const auto f = torus_flux_section(geom);
    out.push_back(below("solenoid", "section flux equals -U0", f.defect, 1e-6));
    return out;
}

}  // namespace detail::verify

inline constexpr std::string_view kVerifySuites[] = {"gauge", "circulation", "amplitude", "solenoid", "all"};

inline std::vector<InvariantResult> verify(std::string_view suite) {
    namespace v = detail::verify;
    if (suite == "gauge") return v::gauge_suite();
    if (suite == "circulation") return v::circulation_suite();
    if (suite == "amplitude") return v::amplitude_suite();
    if (suite == "solenoid") return v::solenoid_suite();
    if (suite == "all") {
        std::vector<InvariantResult> out;
        for (auto s : {"gauge", "circulation", "amplitude", "solenoid"}) {
            auto part = verify(s);
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown verify suite", std::string(suite));
}

}  // namespace magscatter
