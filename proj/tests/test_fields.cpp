#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "magscatter/fields.hpp"
#include "magscatter/gauge.hpp"

using namespace magscatter;
using std::numbers::pi;

namespace {

FieldSpec gaussian() { return FieldSpec::make(FieldFamily::gaussian2d); }
FieldSpec dipole(double alpha = 0.25, Vec2 p = {0.1, 0.0}) {
    return FieldSpec::make(FieldFamily::radial_plus_dipole_2d, {{"alpha", {alpha}}, {"p", {p[0], p[1]}}});
}
FieldSpec solenoid(double alpha = 1.0) { return FieldSpec::make(FieldFamily::toroidal_solenoid_3d, {{"alpha", {alpha}}}); }

Vec3 random_in_ball(std::mt19937& gen, const Vec3& c, double R) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (true) {
        Vec3 d{u(gen), u(gen), u(gen)};
        if (norm(d) < 0.98) return c + R * d;
    }
}

}  // namespace

TEST(EvalField, GaussianValue) { EXPECT_NEAR(eval_field(gaussian(), Vec2{1.0, 1.0}), std::exp(-2.0), 1e-15); }

TEST(EvalField, SolenoidInsideAndOutside) {
    const auto s = solenoid(1.5);
    EXPECT_EQ(eval_field(s, Vec3{0.5, 0.0, 0.0}), (Vec3{0.0, 0.0, 0.0}));
    EXPECT_EQ(eval_field(s, Vec3{3.5, 0.0, 0.0}), (Vec3{0.0, 0.0, 0.0}));
    EXPECT_EQ(eval_field(s, Vec3{2.0, 0.0, 1.2}), (Vec3{0.0, 0.0, 0.0}));
    // Inside: azimuthal with magnitude alpha / rho, pointing along -e_phi.
    const Vec3 x{0.0, 2.3, 0.4};
    const Vec3 b = eval_field(s, x);
    EXPECT_NEAR(b[0], 1.5 / 2.3, 1e-14);
    EXPECT_NEAR(b[1], 0.0, 1e-14);
    EXPECT_NEAR(b[2], 0.0, 1e-14);
}

TEST(EvalField, ZeroBeyondSupport) {
    const auto d = dipole();
    const auto b3 = FieldSpec::make(FieldFamily::bump_3d);
    const auto table = FieldSpec::make(FieldFamily::radial_profile_2d,
                                       {{"profile_r", {0, 0.5, 1.0, 1.5}}, {"profile_b", {1.0, 0.8, 0.3, 0.0}}});
    for (double t = 0; t < 2 * pi; t += 0.3) {
        const Vec2 u = unit_from_angle(t);
        EXPECT_EQ(eval_field(d, (d.support_radius() * 1.01) * u), 0.0);
        EXPECT_EQ(eval_field(table, (table.support_radius() * 1.01) * u), 0.0);
        const Vec3 w{std::cos(t), std::sin(t) * 0.6, std::sin(t) * 0.8};
        EXPECT_EQ(eval_field(b3, (b3.support_radius() * 1.01) * w), (Vec3{0, 0, 0}));
    }
}

TEST(EvalField, PointFluxRefusesPointwiseValues) {
    const auto ab = FieldSpec::make(FieldFamily::ab_point_flux_2d);
    try {
        (void)eval_field(ab, Vec2{1.0, 0.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AnalyticOnlyFamily);
    }
}

TEST(EvalField, TabulatedProfileInterpolatesNodes) {
    const auto table = FieldSpec::make(FieldFamily::radial_profile_2d,
                                       {{"profile_r", {0, 0.5, 1.0, 1.5}}, {"profile_b", {1.0, 0.8, 0.3, 0.0}}});
    EXPECT_NEAR(eval_field(table, Vec2{0.0, 0.5}), 0.8, 1e-14);
    EXPECT_NEAR(eval_field(table, Vec2{1.0, 0.0}), 0.3, 1e-14);
    EXPECT_DOUBLE_EQ(table.support_radius(), 1.5);
    EXPECT_THROW(FieldSpec::make(FieldFamily::radial_profile_2d,
                                 {{"profile_r", {0, 0.5, 1.0, 1.5}}, {"profile_b", {1.0, 0.8, 0.3, 0.1}}}),
                 Error);
    EXPECT_THROW(FieldSpec::make(FieldFamily::radial_profile_2d,
                                 {{"profile_r", {0, 0.5, 0.5, 1.5}}, {"profile_b", {1.0, 0.8, 0.3, 0.0}}}),
                 Error);
}

TEST(EvalField, InvalidParametersRejected) {
    EXPECT_THROW(FieldSpec::make(FieldFamily::gaussian2d, {{"bogus", {1.0}}}), Error);
    EXPECT_THROW(FieldSpec::make(FieldFamily::toroidal_solenoid_3d, {{"l", {1.0}}, {"r", {1.0}}}), Error);
    EXPECT_THROW(FieldSpec::make(FieldFamily::bump_3d, {{"center", {1.0, 2.0}}}), Error);
}

TEST(Divergence, BumpFieldAtRandomInteriorPoints) {
    const auto b3 = FieldSpec::make(FieldFamily::bump_3d);
    std::mt19937 gen(7);
    const Vec3 c{0.3, -0.2, 0.1};
    for (int i = 0; i < 50; ++i) EXPECT_LT(std::abs(divergence_residual(b3, random_in_ball(gen, c, 1.0))), 1e-6);
}

TEST(Divergence, SolenoidInterior) {
    const auto s = solenoid();
    for (Vec3 x : {Vec3{2.0, 0.0, 0.0}, Vec3{1.2, 1.1, 0.3}, Vec3{-0.5, -2.4, -0.2}})
        EXPECT_LT(std::abs(divergence_residual(s, x)), 1e-6);
}

TEST(Divergence, ZeroField) {
    const auto b3 = FieldSpec::make(FieldFamily::bump_3d, {{"amplitude", {0.0}}});
    EXPECT_EQ(divergence_residual(b3, Vec3{0.1, 0.2, 0.3}), 0.0);
}

TEST(TotalFlux, Gaussian) { EXPECT_NEAR(total_flux_2d(gaussian(), {}).value, pi, 1e-6); }

TEST(TotalFlux, PointFluxIsAnalytic) {
    const auto ab = FieldSpec::make(FieldFamily::ab_point_flux_2d, {{"alpha", {0.3}}});
    EXPECT_DOUBLE_EQ(total_flux_2d(ab, {}).value, -2 * pi * 0.3);
}

TEST(TotalFlux, DipoleTermContributesNothing) {
    // Phi = 2 pi int B0 r dr, with B0 = c0 b(r) and c0 fixed by int B0 r dr = -alpha.
    for (double px : {0.0, 0.3, 1.7}) EXPECT_NEAR(total_flux_2d(dipole(0.25, {px, -0.2}), {}).value, -2 * pi * 0.25, 1e-8);
}

TEST(CirculationFlux, TransversalGaussianAtLargeRadius) {
    const auto g = gaussian();
    auto A = [&](const Vec2& x) { return transversal_potential_2d(g, x); };
    EXPECT_NEAR(circulation_flux_2d(A, 50.0, {}).value, pi, 1e-3);
}

TEST(CirculationFlux, ZeroAndPointFlux) {
    EXPECT_EQ(circulation_flux_2d([](const Vec2&) { return Vec2{0.0, 0.0}; }, 3.0, {}).value, 0.0);
    const auto ab = FieldSpec::make(FieldFamily::ab_point_flux_2d, {{"alpha", {0.4}}});
    for (double R : {0.1, 1.0, 25.0}) {
        auto A = [&](const Vec2& x) { return transversal_potential_2d(ab, x); };
        EXPECT_NEAR(circulation_flux_2d(A, R, {}).value, -2 * pi * 0.4, 1e-12);
    }
}

TEST(CirculationFlux, StokesDualityAtTenSupportRadii) {
    const auto d = dipole();
    auto A = [&](const Vec2& x) { return transversal_potential_2d(d, x); };
    const double phi = total_flux_2d(d, {}).value;
    EXPECT_LT(std::abs(circulation_flux_2d(A, 10 * d.support_radius(), {}).value - phi), 1e-3);
}

TEST(Config, DumpParseRoundTripIsBitExact) {
    for (const auto& spec :
         {gaussian(), dipole(0.1 + 0.2, {1.0 / 3.0, -2e-17}), solenoid(0.7), FieldSpec::make(FieldFamily::bump_3d),
          FieldSpec::make(FieldFamily::ab_point_flux_2d),
          FieldSpec::make(FieldFamily::toroidal_solenoid_3d, {{"ellipse", {2.0, 0.1, 0.6, 0.9}}})}) {
        const std::string text = dump_field_config(spec);
        EXPECT_EQ(dump_field_config(parse_field_config(text)), text);
    }
}

TEST(Config, CommentsAndDefaults) {
    const auto spec = parse_field_config("# gaussian blob\n[field]\nfamily = gaussian2d  # default width\n"
                                         "param.width = 2\n");
    EXPECT_EQ(spec.family(), FieldFamily::gaussian2d);
    EXPECT_DOUBLE_EQ(spec.param("width"), 2.0);
    EXPECT_DOUBLE_EQ(spec.param("amplitude"), 1.0);
}

TEST(Config, MalformedInputsRejected) {
    for (const char* text : {"family = gaussian2d\n", "[field]\nfamily = nosuch\n", "[field]\nfamily = gaussian2d\nwidth 2\n",
                             "[field]\ndimension = 3\nfamily = gaussian2d\n", "[field]\nfamily = gaussian2d\nparam.width = x\n",
                             "[field]\nfamily = bump_3d\nsupport_radius = 9\n"}) {
        try {
            (void)parse_field_config(text);
            ADD_FAILURE() << text;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidSpec) << text;
        }
    }
}

TEST(Section, DiscTangencyAndRays) {
    const auto d = SectionShape::disc(2.0, 1.0);
    EXPECT_NEAR(d.z2(), 1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(d.z1(), -1.0 / std::sqrt(3.0), 1e-15);
    const auto hits = d.ray_hits(0.0);
    ASSERT_TRUE(hits);
    EXPECT_NEAR(hits->first, 1.0, 1e-15);
    EXPECT_NEAR(hits->second, 3.0, 1e-15);
    EXPECT_FALSE(d.ray_hits(0.6));
    EXPECT_THROW(SectionShape::disc(1.0, 1.0), Error);
}

TEST(Section, EllipseRaysMatchQuadraticRoots) {
    const double cr = 2.2, cz = 0.3, ar = 0.7, az = 1.1;
    const auto e = SectionShape::ellipse(cr, cz, ar, az);
    for (double z = -0.5; z <= 0.7; z += 0.1) {
        // ((s c - cr)/ar)^2 + ((s c z - cz)/az)^2 = 1 with c = (1+z^2)^-1/2
        const double c = 1.0 / std::sqrt(1.0 + z * z);
        const double A = c * c / (ar * ar) + c * c * z * z / (az * az);
        const double B = -2.0 * (c * cr / (ar * ar) + c * z * cz / (az * az));
        const double C = cr * cr / (ar * ar) + cz * cz / (az * az) - 1.0;
        const double disc = B * B - 4 * A * C;
        const auto hits = e.ray_hits(z);
        if (disc <= 1e-9) continue;
        ASSERT_TRUE(hits) << z;
        EXPECT_NEAR(hits->first, (-B - std::sqrt(disc)) / (2 * A), 1e-9) << z;
        EXPECT_NEAR(hits->second, (-B + std::sqrt(disc)) / (2 * A), 1e-9) << z;
    }
    // Tangent slopes solve disc = 0: check the ray meets the boundary at exactly one point.
    for (double z : {e.z1(), e.z2()}) {
        const double c = 1.0 / std::sqrt(1.0 + z * z);
        const double A = c * c / (ar * ar) + c * c * z * z / (az * az);
        const double B = -2.0 * (c * cr / (ar * ar) + c * z * cz / (az * az));
        const double C = cr * cr / (ar * ar) + cz * cz / (az * az) - 1.0;
        EXPECT_NEAR((B * B - 4 * A * C) / (B * B), 0.0, 1e-9) << z;
    }
}

TEST(TorusField, ExactRadialMomentMatchesQuadrature) {
    const auto s = FieldSpec::make(FieldFamily::toroidal_solenoid_3d, {{"alpha", {0.7}}});
    for (const Vec3& u : {normalized(Vec3{1.0, 0.2, 0.1}), normalized(Vec3{-0.3, 0.8, -0.4})}) {
        const auto br = s.radial_breakpoints(u);
        ASSERT_EQ(br.size(), 2u);
        for (auto [s0, s1] : {std::pair{0.0, 10.0}, std::pair{0.5 * (br[0] + br[1]), 10.0}}) {
            Vec3 q{};
            for (int i = 0; i < 3; ++i)
                q[i] = integrate_1d([&](double t) { return t * s.eval3(t * u)[i]; }, s0, 10.0, br, {}).value;
            const Vec3 e = *s.exact_radial_moment(u, s0, s1);
            for (int i = 0; i < 3; ++i) EXPECT_NEAR(e[i], q[i], 1e-10);
        }
    }
    EXPECT_FALSE(FieldSpec::make(FieldFamily::bump_3d).exact_radial_moment({1.0, 0.0, 0.0}, 0.0, 1.0));
}
