#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "magscatter/amplitude.hpp"
#include "magscatter/circulation.hpp"
#include "oracles.hpp"

using namespace magscatter;
using std::numbers::pi;

namespace {

FieldSpec gaussian() { return FieldSpec::make(FieldFamily::gaussian2d); }
FieldSpec dipole(double alpha = 0.25, Vec2 p = {0.1, 0.0}) {
    return FieldSpec::make(FieldFamily::radial_plus_dipole_2d, {{"alpha", {alpha}}, {"p", {p[0], p[1]}}});
}

const Vec3 kCubicAlphas{1.0, -1.0, 0.0};

Vec3 cubic(const Vec3& x) { return oracle::cubic_example_3d(kCubicAlphas, x); }

Vec3 random_unit(std::mt19937& gen) {
    std::normal_distribution<double> n;
    return normalized(Vec3{n(gen), n(gen), n(gen)});
}

// Random unit vector orthogonal to w.
Vec3 random_tangent(std::mt19937& gen, const Vec3& w) {
    const Vec3 v = random_unit(gen);
    return normalized(v - dot(v, w) * w);
}

}  // namespace

TEST(TangentPair, Validation) {
    EXPECT_NO_THROW(TangentPair<3>::make({1, 0, 0}, {0, 0, 1}));
    EXPECT_THROW(TangentPair<3>::make({1, 0, 0}, {0, 0, 2}), Error);
    try {
        (void)TangentPair<2>::make({1, 0}, {std::sqrt(0.5), std::sqrt(0.5)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotOrthogonal);
    }
}

TEST(LineCirculation, CubicExampleValue) {
    const Vec3 x = Vec3{0.0, 1.0, 1.0} / std::sqrt(2.0);
    EXPECT_NEAR(line_circulation_I<3>(cubic, x, Vec3{1.0, 0.0, 0.0}), 1.0, 1e-6);
}

TEST(LineCirculation, CubicExampleClosedFormAtRandomPairs) {
    std::mt19937 gen(1);
    for (int i = 0; i < 20; ++i) {
        const Vec3 w = random_unit(gen), x = random_tangent(gen, w);
        EXPECT_NEAR(line_circulation_I<3>(cubic, x, w), oracle::cubic_example_I(kCubicAlphas, x, w), 1e-6);
    }
}

TEST(LineCirculation, AntisymmetryAndHomogeneity) {
    std::mt19937 gen(2);
    for (int i = 0; i < 20; ++i) {
        const Vec3 w = random_unit(gen), x = random_tangent(gen, w);
        const double I = line_circulation_I<3>(cubic, x, w);
        EXPECT_NEAR(line_circulation_I<3>(cubic, x, -w), -I, 1e-8);
        EXPECT_NEAR(line_circulation_I<3>(cubic, 2.0 * x, 3.0 * w), I, 1e-8);
    }
}

TEST(LineCirculation, ModifiedAharonovBohmClosedForm) {
    const double alpha = 0.5;
    auto A = [alpha](const Vec3& x) { return oracle::modified_ab_3d(alpha, x); };
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> ut(0.0, 2 * pi);
    for (int i = 0; i < 20; ++i) {
        const Vec3 w = random_unit(gen);
        const double th = ut(gen);
        const Vec3 x = circle_parametrization_3d(w, th);
        const double expect = pi * alpha * std::sqrt(1.0 - w[2] * w[2]) * std::cos(th);
        EXPECT_NEAR(line_circulation_I<3>(A, x, w), expect, 1e-6);
    }
}

TEST(LineCirculation, Errors) {
    try {
        (void)line_circulation_I<3>(cubic, Vec3{1.0, 0.0, 0.0}, Vec3{1.0, 1e-3, 0.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotOrthogonal);
    }
    // Integrand decaying like t^-1/2.
    auto slow = [](const Vec3& x) { return Vec3{1.0, 1.0, 1.0} / std::sqrt(1.0 + norm(x)); };
    try {
        (void)line_circulation_I<3>(slow, Vec3{0.0, 0.0, 1.0}, Vec3{1.0, 0.0, 0.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DecayTooSlow);
    }
}

TEST(LineCirculation, GradientTypeIsIndependentOfPoint) {
    // U homogeneous of degree 0; a_inf = grad U by finite differences.
    ScalarField<3> U = [](const Vec3& x) {
        const double r = norm(x);
        const double s = x[1] / r;
        return (x[0] + 2.0 * x[2]) / r + s * s * s;
    };
    auto a = [&U](const Vec3& x) { return fd_grad<3>(U, x, default_fd_step(norm(x))); };
    // Finite differences carry ~1e-11 relative noise, so the line integral cannot reach 1e-12.
    QuadratureConfig cfg;
    cfg.abs_tol = cfg.rel_tol = 1e-9;
    std::mt19937 gen(4);
    for (int k = 0; k < 4; ++k) {
        const Vec3 w = random_unit(gen);
        double lo = 1e300, hi = -1e300;
        for (int i = 0; i < 10; ++i) {
            const Vec3 x = (0.3 + i) * random_tangent(gen, w);
            const double I = line_circulation_I<3>(a, x, w, cfg);
            lo = std::min(lo, I);
            hi = std::max(hi, I);
        }
        EXPECT_LT(hi - lo, 1e-5);
        EXPECT_NEAR(lo, U(w) - U(-w), 1e-5);
    }
}

TEST(RotatePerp, Examples) {
    auto [p, m] = rotate_perp({1.0, 0.0});
    EXPECT_EQ(p, (Vec2{0.0, 1.0}));
    EXPECT_EQ(m, (Vec2{0.0, -1.0}));
    std::tie(p, m) = rotate_perp({0.0, 1.0});
    EXPECT_EQ(p, (Vec2{-1.0, 0.0}));
    EXPECT_EQ(m, (Vec2{1.0, 0.0}));
    const Vec2 w = unit_from_angle(0.83);
    std::tie(p, m) = rotate_perp(w);
    EXPECT_EQ(dot(w, p), 0.0);
    EXPECT_EQ(dot(w, m), 0.0);
}

TEST(HalfPlaneFlux, GaussianIsHalfTheFlux) {
    for (double t = 0.1; t < 2 * pi; t += 0.9) EXPECT_NEAR(half_plane_flux_f(gaussian(), unit_from_angle(t)), pi / 2, 1e-6);
}

TEST(HalfPlaneFlux, DipoleLinearInOmega) {
    const Vec2 p{0.1, -0.05};
    const auto d = dipole(0.25, p);
    for (double t = 0.0; t < 2 * pi; t += 0.5) {
        const Vec2 w = unit_from_angle(t);
        EXPECT_NEAR(half_plane_flux_f(d, w), -pi * 0.25 + 2.0 * dot(p, w), 1e-6);
    }
}

TEST(HalfPlaneFlux, ZeroFieldAndPointFlux) {
    const auto z = FieldSpec::make(FieldFamily::gaussian2d, {{"amplitude", {0.0}}});
    EXPECT_EQ(half_plane_flux_f(z, {1.0, 0.0}), 0.0);
    const auto ab = FieldSpec::make(FieldFamily::ab_point_flux_2d, {{"alpha", {0.3}}});
    EXPECT_DOUBLE_EQ(half_plane_flux_f(ab, {0.0, 1.0}), -0.3 * pi);
}

TEST(HalfPlaneFlux, FluxSplitsBetweenOppositeHalfPlanes) {
    const auto d = dipole(0.4, {0.3, 0.2});
    const double phi = total_flux_2d(d, {}).value;
    for (int k = 0; k < 64; ++k) {
        const Vec2 w = unit_from_angle(2 * pi * k / 64.0);
        EXPECT_NEAR(half_plane_flux_f(d, w) + half_plane_flux_f(d, -w), phi, 1e-6);
    }
}

TEST(ArcIntegral, Examples) {
    const Vec2 w = unit_from_angle(1.3);
    EXPECT_NEAR(arc_integral_f([](const Vec2&) { return 0.7; }, w), 0.7 * pi, 1e-12);
    const Vec2 p{0.2, 0.1};
    EXPECT_NEAR(arc_integral_f([&](const Vec2& u) { return -0.25 + dot(p, u); }, w), -0.25 * pi + 2 * dot(p, w), 1e-12);
    const auto g = gaussian();
    EXPECT_NEAR(arc_integral_f([&](const Vec2& u) { return asymptotic_coefficient_2d(g, u); }, w), pi / 2, 1e-8);
}

TEST(ArcIntegral, AgreesWithHalfPlaneFlux) {
    const auto d = dipole(0.3, {0.15, -0.1});
    auto a = [&](const Vec2& u) { return asymptotic_coefficient_2d(d, u); };
    for (double t = 0.2; t < 2 * pi; t += 1.1) {
        const Vec2 w = unit_from_angle(t);
        EXPECT_NEAR(arc_integral_f(a, w), half_plane_flux_f(d, w), 1e-6);
    }
}

TEST(LineCirculation, EqualsHalfPlaneFluxIn2D) {
    for (const auto& spec : {gaussian(), dipole(0.25, {0.1, 0.0}), dipole(-0.6, {0.2, 0.4})}) {
        const auto d = decompose_potential<2>(spec);
        for (int k = 0; k < 64; ++k) {
            const Vec2 w = unit_from_angle(2 * pi * k / 64.0);
            const double I = line_circulation_I<2>(d.a_inf, w, rotate_perp(w).first);
            EXPECT_LT(std::abs(I - half_plane_flux_f(spec, w)), 1e-5) << family_name(spec.family()) << " k=" << k;
        }
    }
}
