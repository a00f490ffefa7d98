#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "magscatter/error.hpp"
#include "magscatter/vec.hpp"

namespace magscatter {

// Parameters t at which x + t xi meets the cone {x3 = z rho} (rho = |(x1, x2)|).
inline std::vector<double> line_cone_crossings(const Vec3& x, const Vec3& xi, double z) {
    // The plane x3 = 0 is a double root of the quadratic below.
    if (z == 0.0) return xi[2] != 0.0 ? std::vector<double>{-x[2] / xi[2]} : std::vector<double>{};
    const double a = xi[2] * xi[2] - z * z * (xi[0] * xi[0] + xi[1] * xi[1]);
    const double b = 2.0 * (x[2] * xi[2] - z * z * (x[0] * xi[0] + x[1] * xi[1]));
    const double c = x[2] * x[2] - z * z * (x[0] * x[0] + x[1] * x[1]);
    std::vector<double> roots;
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
    if (scale == 0.0) return roots;
    if (std::abs(a) <= 1e-14 * scale) {
        if (b != 0.0) roots.push_back(-c / b);
    } else {
        const double disc = b * b - 4.0 * a * c;
        if (disc < 0.0) return roots;
        const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
        if (q != 0.0) roots.push_back(c / q);
        roots.push_back(q / a);
    }
    // Squaring admits the mirror cone x3 = -z rho.
    std::vector<double> out;
    for (double t : roots) {
        const double x3 = x[2] + t * xi[2];
        if (x3 * z >= 0.0) out.push_back(t);
    }
    return out;
}

// Cross-section S of an axially symmetric torus in the half-plane {(rho, x3) : rho > 0}.
// Points are written p = (rho, x3).
class SectionShape {
public:
    enum class Kind { disc, convex };

    // Disc of radius r centred at (l, 0).
    static SectionShape disc(double l, double r) {
        if (!(r > 0.0) || !(l > r))
            throw Error(ErrorCode::InvalidSpec, "disc section requires l > r > 0",
                        "l=" + std::to_string(l) + ", r=" + std::to_string(r));
        SectionShape s;
        s.kind_ = Kind::disc;
        s.l_ = l;
        s.r_ = r;
        s.center_ = {l, 0.0};
        s.radius_ = [r](double) { return r; };
        s.z2_ = r / std::sqrt(l * l - r * r);
        s.z1_ = -s.z2_;
        s.dmin_ = l - r;
        s.dmax_ = l + r;
        return s;
    }

    static SectionShape ellipse(double center_rho, double center_z, double semi_rho, double semi_z) {
        if (!(semi_rho > 0.0) || !(semi_z > 0.0) || !(center_rho - semi_rho > 0.0))
            throw Error(ErrorCode::InvalidSpec, "ellipse section must have positive semi-axes and avoid the axis");
        return convex({center_rho, center_z}, [semi_rho, semi_z](double phi) {
            const double c = std::cos(phi) / semi_rho, s = std::sin(phi) / semi_z;
            return 1.0 / std::sqrt(c * c + s * s);
        });
    }

    // Star-shaped about `center` with boundary center + radius(phi) (cos phi, sin phi).
    // The caller guarantees strict convexity.
    static SectionShape convex(Vec2 center, std::function<double(double)> radius) {
        SectionShape s;
        s.kind_ = Kind::convex;
        s.center_ = center;
        s.radius_ = std::move(radius);
        s.init_convex();
        return s;
    }

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] double disc_l() const { return l_; }
    [[nodiscard]] double disc_r() const { return r_; }
    [[nodiscard]] Vec2 center() const { return center_; }
    [[nodiscard]] double boundary_radius(double phi) const { return radius_(phi); }
    [[nodiscard]] double z1() const { return z1_; }
    [[nodiscard]] double z2() const { return z2_; }
    // Distance from the origin to the nearest / farthest point of S.
    [[nodiscard]] double min_distance() const { return dmin_; }
    [[nodiscard]] double max_distance() const { return dmax_; }

    // Minkowski functional about the center; < 1 inside, 1 on the boundary.
    [[nodiscard]] double gauge(const Vec2& p) const {
        const Vec2 d = p - center_;
        const double n = norm(d);
        if (n == 0.0) return 0.0;
        return n / radius_(std::atan2(d[1], d[0]));
    }

    [[nodiscard]] bool contains(const Vec2& p) const {
        if (kind_ == Kind::disc) {
            const double dr = p[0] - l_;
            return dr * dr + p[1] * p[1] < r_ * r_;
        }
        return gauge(p) < 1.0;
    }

    // Distances kappa_- <= kappa_+ at which the ray s (1, z)/sqrt(1+z^2) meets the boundary.
    [[nodiscard]] std::optional<std::pair<double, double>> ray_hits(double z) const {
        const double c = 1.0 / std::sqrt(1.0 + z * z);
        if (kind_ == Kind::disc) {
            const double disc = r_ * r_ - (l_ * l_ - r_ * r_) * z * z;
            if (disc < 0.0) return std::nullopt;
            const double sq = std::sqrt(disc);
            return std::pair{c * (l_ - sq), c * (l_ + sq)};
        }
        return convex_hits({c, z * c});
    }

private:
    SectionShape() = default;

    [[nodiscard]] double ray_gauge(const Vec2& dir, double s) const { return gauge(s * dir); }

    // Minimizer of the (convex) gauge along the ray, by golden-section search.
    [[nodiscard]] std::pair<double, double> ray_min(const Vec2& dir) const {
        const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double lo = 0.0, hi = smax_;
        double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        double f1 = ray_gauge(dir, x1), f2 = ray_gauge(dir, x2);
        for (int it = 0; it < 120 && hi - lo > 1e-14 * smax_; ++it) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = ray_gauge(dir, x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = ray_gauge(dir, x2);
            }
        }
        const double s = 0.5 * (lo + hi);
        return {s, ray_gauge(dir, s)};
    }

    template <typename F>
    static double bisect(F&& f, double lo, double hi) {
        double flo = f(lo);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            const double fm = f(mid);
            if ((fm > 0.0) == (flo > 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    }

    [[nodiscard]] std::optional<std::pair<double, double>> convex_hits(const Vec2& dir) const {
        const auto [smin, gmin] = ray_min(dir);
        if (gmin > 1.0) return std::nullopt;
        auto g = [&](double s) { return ray_gauge(dir, s) - 1.0; };
        return std::pair{bisect(g, 0.0, smin), bisect(g, smin, smax_)};
    }

    void init_convex() {
        if (!(center_[0] > 0.0)) throw Error(ErrorCode::InvalidSpec, "section center must have rho > 0");
        constexpr int n = 4096;
        double rmax = 0.0;
        dmin_ = std::numeric_limits<double>::infinity();
        dmax_ = 0.0;
        double phi_min = 0.0, phi_max = 0.0;
        for (int k = 0; k < n; ++k) {
            const double phi = 2.0 * std::numbers::pi * k / n;
            const double rad = radius_(phi);
            if (!(rad > 0.0)) throw Error(ErrorCode::InvalidSpec, "section boundary radius must be positive");
            rmax = std::max(rmax, rad);
            const Vec2 b = center_ + rad * unit_from_angle(phi);
            if (!(b[0] > 0.0)) throw Error(ErrorCode::InvalidSpec, "section must not intersect the symmetry axis");
            const double d = norm(b);
            if (d < dmin_) {
                dmin_ = d;
                phi_min = phi;
            }
            if (d > dmax_) {
                dmax_ = d;
                phi_max = phi;
            }
        }
        // Local refinement of the extreme distances.
        auto dist = [&](double phi) { return norm(center_ + radius_(phi) * unit_from_angle(phi)); };
        const double h = 2.0 * std::numbers::pi / n;
        auto refine = [&](double phi0, double sign) {
            double lo = phi0 - h, hi = phi0 + h;
            for (int it = 0; it < 80; ++it) {
                const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
                if (sign * dist(m1) < sign * dist(m2)) hi = m2;
                else lo = m1;
            }
            return dist(0.5 * (lo + hi));
        };
        dmin_ = std::min(dmin_, refine(phi_min, 1.0));
        dmax_ = std::max(dmax_, refine(phi_max, -1.0));
        smax_ = norm(center_) + 2.0 * rmax;

        const double beta_c = std::atan2(center_[1], center_[0]);
        auto excess = [&](double beta) { return ray_min(unit_from_angle(beta)).second - 1.0; };
        const double edge = std::numbers::pi / 2.0 - 1e-9;
        z2_ = std::tan(bisect(excess, beta_c, edge));
        z1_ = std::tan(bisect(excess, beta_c, -edge));
    }

    Kind kind_ = Kind::disc;
    double l_ = 0.0;
    double r_ = 0.0;
    Vec2 center_{};
    std::function<double(double)> radius_;
    double z1_ = 0.0;
    double z2_ = 0.0;
    double dmin_ = 0.0;
    double dmax_ = 0.0;
    double smax_ = 0.0;
};

}  // namespace magscatter
