#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "magscatter/error.hpp"
#include "magscatter/fields.hpp"
#include "magscatter/numerics.hpp"
#include "magscatter/vec.hpp"

namespace magscatter {

template <std::size_t N>
using VectorField = std::function<Vec<N>(const Vec<N>&)>;

template <std::size_t N>
using ScalarField = std::function<double(const Vec<N>&)>;

enum class GaugeTag { transversal, short_range_3d, custom };

inline constexpr std::string_view gauge_tag_name(GaugeTag t) {
    switch (t) {
        case GaugeTag::transversal: return "transversal";
        case GaugeTag::short_range_3d: return "short_range_3d";
        case GaugeTag::custom: return "custom";
    }
    return "";
}

// Homogeneous part of a 3D potential, optionally with the places along a line where it fails
// to be smooth. Line integrals use those as quadrature breakpoints; a field supported in a cone
// can otherwise fall between every node of a coarse panel.
struct AInfField {
    VectorField<3> field;
    // Parameters t at which x + t xi crosses a non-smooth set.
    std::function<std::vector<double>(const Vec3&, const Vec3&)> breaks;

    AInfField() = default;
    template <typename F>
        requires(!std::same_as<std::remove_cvref_t<F>, AInfField> && std::is_invocable_r_v<Vec3, F&, const Vec3&>)
    AInfField(F f) : field(std::move(f)) {}  // NOLINT(google-explicit-constructor)
    AInfField(VectorField<3> f, std::function<std::vector<double>(const Vec3&, const Vec3&)> b)
        : field(std::move(f)), breaks(std::move(b)) {}

    Vec3 operator()(const Vec3& x) const { return field(x); }
    explicit operator bool() const { return static_cast<bool>(field); }
    [[nodiscard]] std::vector<double> line_breaks(const Vec3& x, const Vec3& xi) const {
        return breaks ? breaks(x, xi) : std::vector<double>{};
    }
};

// Crossings of x + t xi with the cones z = z1 and z = z2 bounding the support of a solenoid.
inline std::vector<double> cone_pair_breaks(double z1, double z2, const Vec3& x, const Vec3& xi) {
    auto out = line_cone_crossings(x, xi, z1);
    const auto more = line_cone_crossings(x, xi, z2);
    out.insert(out.end(), more.begin(), more.end());
    return out;
}

// A = A^(inf) + A^(reg); a_inf is homogeneous of degree -1 and transversal.
template <std::size_t N>
struct PotentialDecomposition {
    std::conditional_t<N == 3, AInfField, VectorField<N>> a_inf;
    VectorField<N> a_reg;
    VectorField<N> full;
    GaugeTag gauge_tag = GaugeTag::transversal;
    double rho = std::numeric_limits<double>::infinity();
};

namespace detail {

inline void require_dimension(const FieldSpec& spec, int d, const char* op) {
    if (spec.dimension() != d)
        throw Error(ErrorCode::InvalidArgument, std::string(op) + " needs a " + std::to_string(d) + "D field",
                    std::string(family_name(spec.family())));
}

inline void require_short_range(const FieldSpec& spec) {
    if (!(spec.decay_exponent() > 2.0))
        throw Error(ErrorCode::DecayTooSlow, "field decay exponent must exceed 2",
                    "r=" + std::to_string(spec.decay_exponent()));
}

// int_{s0}^{s1} B(s u) s ds along the unit direction u (2D), s1 = inf allowed.
inline double radial_moment_2d(const FieldSpec& spec, const Vec2& u, double s0, double s1, const QuadratureConfig& cfg) {
    auto f = [&](double s) { return spec.eval2(s * u) * s; };
    const double Rq = quadrature_radius(spec, cfg);
    if (std::isfinite(spec.support_radius())) {
        const double hi = std::min(s1, Rq);
        return s0 < hi ? integrate_1d(f, s0, hi, cfg).value : 0.0;
    }
    if (std::isfinite(s1)) return s0 < s1 ? integrate_1d(f, s0, s1, cfg).value : 0.0;
    QuadratureConfig c = cfg;
    c.truncation_radius = Rq;
    return integrate_semi_infinite(f, s0, c).value;
}

// int_{s0}^{s1} s B(s u) ds along the unit direction u (3D), split at the field's ray breakpoints.
inline Vec3 radial_moment_3d(const FieldSpec& spec, const Vec3& u, double s0, double s1, const QuadratureConfig& cfg) {
    if (auto exact = spec.exact_radial_moment(u, s0, s1)) return *exact;
    auto f = [&](double s) { return s * spec.eval3(s * u); };
    const std::vector<double> br = spec.radial_breakpoints(u);
    const double Rq = quadrature_radius(spec, cfg);
    if (std::isfinite(spec.support_radius())) {
        const double hi = std::min(s1, Rq);
        return s0 < hi ? integrate_1d(f, s0, hi, br, cfg).value : Vec3{};
    }
    if (std::isfinite(s1)) return s0 < s1 ? integrate_1d(f, s0, s1, br, cfg).value : Vec3{};
    QuadratureConfig c = cfg;
    c.truncation_radius = Rq;
    return integrate_semi_infinite(f, s0, br, c).value;
}

inline Vec2 ab_potential(double alpha, const Vec2& x) {
    const double r2 = dot(x, x);
    if (r2 == 0.0) return {0.0, 0.0};
    return (-alpha / r2) * perp(x);
}

}  // namespace detail

inline Vec2 transversal_potential_2d(const FieldSpec& spec, const Vec2& x, const QuadratureConfig& cfg = {}) {
    detail::require_dimension(spec, 2, "transversal_potential_2d");
    if (spec.family() == FieldFamily::ab_point_flux_2d) return detail::ab_potential(spec.ab_alpha(), x);
    const double r = norm(x);
    if (r == 0.0) return {0.0, 0.0};
    const double m = detail::radial_moment_2d(spec, x / r, 0.0, r, cfg);
    return (m / (r * r)) * perp(x);
}

inline Vec3 transversal_potential_3d(const FieldSpec& spec, const Vec3& x, const QuadratureConfig& cfg = {}) {
    detail::require_dimension(spec, 3, "transversal_potential_3d");
    const double r = norm(x);
    if (r == 0.0) return {0.0, 0.0, 0.0};
    const Vec3 w = detail::radial_moment_3d(spec, x / r, 0.0, r, cfg);
    return cross(w, x) / (r * r);
}

// a(x^) = int_0^inf B(s x^) s ds
inline double asymptotic_coefficient_2d(const FieldSpec& spec, const Vec2& direction, const QuadratureConfig& cfg = {}) {
    detail::require_dimension(spec, 2, "asymptotic_coefficient_2d");
    if (spec.family() == FieldFamily::ab_point_flux_2d) return -spec.ab_alpha();
    detail::require_short_range(spec);
    const Vec2 u = normalized(direction);
    return detail::radial_moment_2d(spec, u, 0.0, std::numeric_limits<double>::infinity(), cfg);
}

// A^(inf) built from a coefficient function on the circle.
inline VectorField<2> a_inf_from_coefficient(std::function<double(const Vec2&)> a) {
    return [a = std::move(a)](const Vec2& x) -> Vec2 {
        const double r2 = dot(x, x);
        if (r2 == 0.0) return {0.0, 0.0};
        return (a(x / std::sqrt(r2)) / r2) * perp(x);
    };
}

template <std::size_t N>
PotentialDecomposition<N> decompose_potential(const FieldSpec& spec, const QuadratureConfig& cfg = {}) {
    static_assert(N == 2 || N == 3);
    detail::require_dimension(spec, static_cast<int>(N), "decompose_potential");
    PotentialDecomposition<N> d;
    d.gauge_tag = GaugeTag::transversal;
    d.rho = spec.decay_exponent() - 1.0;
    constexpr double inf = std::numeric_limits<double>::infinity();
    if constexpr (N == 2) {
        if (spec.family() == FieldFamily::ab_point_flux_2d) {
            const double alpha = spec.ab_alpha();
            d.a_inf = [alpha](const Vec2& x) { return detail::ab_potential(alpha, x); };
            d.a_reg = [](const Vec2&) { return Vec2{0.0, 0.0}; };
            d.full = d.a_inf;
            return d;
        }
        detail::require_short_range(spec);
        d.a_inf = a_inf_from_coefficient([spec, cfg](const Vec2& u) { return asymptotic_coefficient_2d(spec, u, cfg); });
        d.a_reg = [spec, cfg](const Vec2& x) -> Vec2 {
            const double r = norm(x);
            if (r == 0.0) return {0.0, 0.0};
            const double m = detail::radial_moment_2d(spec, x / r, r, inf, cfg);
            return (-m / (r * r)) * perp(x);
        };
        d.full = [spec, cfg](const Vec2& x) { return transversal_potential_2d(spec, x, cfg); };
    } else {
        detail::require_short_range(spec);
        d.a_inf.field = [spec, cfg](const Vec3& x) -> Vec3 {
            const double r = norm(x);
            if (r == 0.0) return {0.0, 0.0, 0.0};
            const Vec3 w = detail::radial_moment_3d(spec, x / r, 0.0, inf, cfg);
            return cross(w, x) / (r * r);
        };
        if (spec.family() == FieldFamily::toroidal_solenoid_3d) {
            const double z1 = spec.section().z1(), z2 = spec.section().z2();
            d.a_inf.breaks = [z1, z2](const Vec3& x, const Vec3& xi) { return cone_pair_breaks(z1, z2, x, xi); };
        }
        d.a_reg = [spec, cfg](const Vec3& x) -> Vec3 {
            const double r = norm(x);
            if (r == 0.0) return {0.0, 0.0, 0.0};
            const Vec3 w = detail::radial_moment_3d(spec, x / r, r, inf, cfg);
            return -(cross(w, x) / (r * r));
        };
        d.full = [spec, cfg](const Vec3& x) { return transversal_potential_3d(spec, x, cfg); };
    }
    return d;
}

// ---- gauge scalar U ---------------------------------------------------------

enum class Contour {
    radial_then_arc,  // x0 -> |x| x0^ radially, then the great-circle arc to x
    arc_then_radial,  // great-circle arc at radius |x0| to |x0| x^, then radially to x
};

namespace detail {

// Unit vector orthogonal to u.
inline Vec3 any_orthogonal(const Vec3& u) {
    const Vec3 e = std::abs(u[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    return normalized(e - dot(e, u) * u);
}

template <typename A>
double radial_leg(A& a, const Vec3& p, const Vec3& q, const QuadratureConfig& cfg) {
    const Vec3 d = q - p;
    if (norm(d) == 0.0) return 0.0;
    return integrate_1d([&](double t) { return dot(a(p + t * d), d); }, 0.0, 1.0, cfg).value;
}

// Great-circle arc of radius r from direction u to direction v.
template <typename A>
double arc_leg(A& a, double r, const Vec3& u, const Vec3& v, const QuadratureConfig& cfg) {
    const double c = std::clamp(dot(u, v), -1.0, 1.0);
    const Vec3 w0 = v - c * u;
    const double s = norm(w0);
    const double angle = std::atan2(s, c);
    if (angle == 0.0) return 0.0;
    const Vec3 w = s > 1e-12 ? w0 / s : any_orthogonal(u);
    return integrate_1d(
               [&](double phi) {
                   const double cp = std::cos(phi), sp = std::sin(phi);
                   return dot(a(r * (cp * u + sp * w)), r * (cp * w - sp * u));
               },
               0.0, angle, cfg)
        .value;
}

// Spot check that curl a vanishes near p (|curl| small against |a|/|p|).
template <typename A>
void check_curl_free(A& a, const Vec3& p) {
    const double r = norm(p);
    const Vec3 c = fd_curl_3d(a, p, default_fd_step(r));
    const double scale = norm(a(p)) / r;
    if (norm(c) > 1e-4 * scale + 1e-9 / (r * r))
        throw Error(ErrorCode::CurlNotZero, "curl of a_inf does not vanish; field is not short-range",
                    "|curl|=" + std::to_string(norm(c)) + " at |x|=" + std::to_string(r));
}

}  // namespace detail

// U(x) = contour integral of a_inf from x0 to x; U(x0) = 0.
inline double gauge_scalar_U(const PotentialDecomposition<3>& decomp, const Vec3& x, const Vec3& x0,
                             const QuadratureConfig& cfg = {}, Contour contour = Contour::radial_then_arc,
                             bool check_curl = true) {
    const double r = norm(x), r0 = norm(x0);
    if (r == 0.0 || r0 == 0.0)
        throw Error(ErrorCode::ContourThroughOrigin, "U contour endpoints must avoid the origin");
    const Vec3 u = x / r, u0 = x0 / r0;
    auto& a = decomp.a_inf;
    if (check_curl) {
        detail::check_curl_free(a, x);
        const Vec3 mid = u + u0;
        if (norm(mid) > 1e-6) detail::check_curl_free(a, r * normalized(mid));
    }
    if (contour == Contour::radial_then_arc)
        return detail::radial_leg(a, x0, r * u0, cfg) + detail::arc_leg(a, r, u0, u, cfg);
    return detail::arc_leg(a, r0, u0, u, cfg) + detail::radial_leg(a, r0 * u, x, cfg);
}

// ---- cutoff and the short-range potential -----------------------------------

// Quintic smoothstep eta: 0 on [0, R1], 1 on [R2, inf).
struct CutoffSpec {
    double R1 = 0.5;
    double R2 = 1.0;

    void validate() const {
        if (!(R1 > 0.0 && R2 > R1)) throw Error(ErrorCode::InvalidArgument, "cutoff requires 0 < R1 < R2");
    }
    [[nodiscard]] double eta(double r) const {
        if (r <= R1) return 0.0;
        if (r >= R2) return 1.0;
        const double t = (r - R1) / (R2 - R1);
        return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    }
    [[nodiscard]] double eta_prime(double r) const {
        if (r <= R1 || r >= R2) return 0.0;
        const double t = (r - R1) / (R2 - R1);
        return 30.0 * t * t * (1.0 - t) * (1.0 - t) / (R2 - R1);
    }
};

inline CutoffSpec default_cutoff(const FieldSpec& spec) {
    if (spec.family() == FieldFamily::toroidal_solenoid_3d) {
        const double R2 = 0.9 * spec.section().min_distance();
        return {0.5 * R2, R2};
    }
    const double s = std::isfinite(spec.support_radius()) ? spec.support_radius() : spec.effective_radius();
    return {0.5 * s, s};
}

inline const Vec3 kDefaultBasepoint{0.0, 0.0, -1.0};

// A = A^(reg) + (1 - eta) A^(inf) - U grad(eta).
class ShortRangePotential {
public:
    ShortRangePotential(const FieldSpec& spec, CutoffSpec cutoff, const QuadratureConfig& cfg = {},
                        Vec3 basepoint = kDefaultBasepoint)
        : decomp_(decompose_potential<3>(spec, cfg)), cutoff_(cutoff), cfg_(cfg), x0_(basepoint) {
        cutoff_.validate();
    }

    Vec3 operator()(const Vec3& x) const {
        const double r = norm(x);
        if (r <= cutoff_.R1) return decomp_.full(x);
        if (r >= cutoff_.R2) return decomp_.a_reg(x);
        const double eta = cutoff_.eta(r);
        const Vec3 grad_eta = (cutoff_.eta_prime(r) / r) * x;
        return decomp_.a_reg(x) + (1.0 - eta) * decomp_.a_inf(x) - U(x) * grad_eta;
    }

    [[nodiscard]] double U(const Vec3& x) const { return gauge_scalar_U(decomp_, x, x0_, cfg_); }
    [[nodiscard]] const PotentialDecomposition<3>& decomposition() const { return decomp_; }
    [[nodiscard]] const CutoffSpec& cutoff() const { return cutoff_; }

    [[nodiscard]] PotentialDecomposition<3> as_decomposition() const {
        PotentialDecomposition<3> d = decomp_;
        d.full = [self = *this](const Vec3& x) { return self(x); };
        d.gauge_tag = GaugeTag::short_range_3d;
        return d;
    }

private:
    PotentialDecomposition<3> decomp_;
    CutoffSpec cutoff_;
    QuadratureConfig cfg_;
    Vec3 x0_;
};

inline Vec3 short_range_potential_3d(const FieldSpec& spec, const CutoffSpec& cutoff, const Vec3& x,
                                     const QuadratureConfig& cfg = {}) {
    return ShortRangePotential(spec, cutoff, cfg)(x);
}

// ---- gauge transformations ----------------------------------------------------

template <std::size_t N>
struct GaugeFunction {
    ScalarField<N> phi;
    // Degree-0 homogeneous part, evaluated on unit directions.
    ScalarField<N> phi0;
};

template <std::size_t N>
VectorField<N> apply_gauge(VectorField<N> A, GaugeFunction<N> g, double h = 0.0) {
    return [A = std::move(A), phi = std::move(g.phi), h](const Vec<N>& x) {
        const double step = h > 0.0 ? h : default_fd_step(norm(x));
        return A(x) + fd_grad<N>(phi, x, step);
    };
}

}  // namespace magscatter
