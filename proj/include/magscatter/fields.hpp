#pragma once

// pchip calls isnan unqualified; math.h puts it in the global namespace.
#include <math.h>

#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "magscatter/error.hpp"
#include "magscatter/numerics.hpp"
#include "magscatter/section.hpp"
#include "magscatter/vec.hpp"

namespace magscatter {

enum class FieldFamily {
    gaussian2d,
    radial_profile_2d,
    radial_plus_dipole_2d,
    ab_point_flux_2d,
    toroidal_solenoid_3d,
    bump_3d,
};

inline constexpr std::string_view family_name(FieldFamily f) {
    switch (f) {
        case FieldFamily::gaussian2d: return "gaussian2d";
        case FieldFamily::radial_profile_2d: return "radial_profile_2d";
        case FieldFamily::radial_plus_dipole_2d: return "radial_plus_dipole_2d";
        case FieldFamily::ab_point_flux_2d: return "ab_point_flux_2d";
        case FieldFamily::toroidal_solenoid_3d: return "toroidal_solenoid_3d";
        case FieldFamily::bump_3d: return "bump_3d";
    }
    return "";
}

inline FieldFamily parse_family(std::string_view name) {
    for (auto f : {FieldFamily::gaussian2d, FieldFamily::radial_profile_2d, FieldFamily::radial_plus_dipole_2d,
                   FieldFamily::ab_point_flux_2d, FieldFamily::toroidal_solenoid_3d, FieldFamily::bump_3d})
        if (family_name(f) == name) return f;
    throw Error(ErrorCode::InvalidSpec, "unknown field family", std::string(name));
}

inline int family_dimension(FieldFamily f) {
    return (f == FieldFamily::toroidal_solenoid_3d || f == FieldFamily::bump_3d) ? 3 : 2;
}

using ParamMap = std::map<std::string, std::vector<double>>;

// Standard bump exp(-1/(1-u^2)) on |u| < 1.
inline double bump(double u) {
    const double w = 1.0 - u * u;
    return w > 0.0 ? std::exp(-1.0 / w) : 0.0;
}

inline double bump_derivative(double u) {
    const double w = 1.0 - u * u;
    return w > 0.0 ? std::exp(-1.0 / w) * (-2.0 * u / (w * w)) : 0.0;
}

namespace detail {

class FieldModel {
public:
    virtual ~FieldModel() = default;
    virtual double eval2(const Vec2&) const {
        throw Error(ErrorCode::InvalidArgument, "field is not two-dimensional");
    }
    virtual Vec3 eval3(const Vec3&) const {
        throw Error(ErrorCode::InvalidArgument, "field is not three-dimensional");
    }
    // Distances along the ray s*direction (|direction| = 1) where the field has jumps or kinks.
    virtual std::vector<double> breakpoints3(const Vec3&) const { return {}; }
    // Exact int_{s0}^{s1} s B(s u) ds when the model has one.
    virtual std::optional<Vec3> radial_moment3(const Vec3&, double, double) const { return std::nullopt; }
    virtual double support_radius() const { return std::numeric_limits<double>::infinity(); }
    virtual double effective_radius() const { return support_radius(); }
};

inline double bump_moment(int power) {
    QuadratureConfig cfg;
    cfg.abs_tol = 1e-15;
    cfg.rel_tol = 1e-14;
    return integrate_1d([power](double u) { return bump(u) * std::pow(u, power); }, 0.0, 1.0, cfg).value;
}

class Gaussian2D final : public FieldModel {
public:
    Gaussian2D(double amplitude, double width) : amp_(amplitude), w_(width) {}
    double eval2(const Vec2& x) const override { return amp_ * std::exp(-dot(x, x) / (w_ * w_)); }
    double effective_radius() const override { return 8.0 * w_; }

private:
    double amp_, w_;
};

class RadialBump2D final : public FieldModel {
public:
    RadialBump2D(double amplitude, double radius) : amp_(amplitude), R_(radius) {}
    double eval2(const Vec2& x) const override { return amp_ * bump(norm(x) / R_); }
    double support_radius() const override { return R_; }

private:
    double amp_, R_;
};

class RadialTable2D final : public FieldModel {
public:
    RadialTable2D(std::vector<double> r, std::vector<double> b)
        : rmax_(r.back()), spline_(std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(
                               std::move(r), std::move(b))) {}
    double eval2(const Vec2& x) const override {
        const double r = norm(x);
        return r < rmax_ ? (*spline_)(r) : 0.0;
    }
    double support_radius() const override { return rmax_; }

private:
    double rmax_;
    std::shared_ptr<const boost::math::interpolators::pchip<std::vector<double>>> spline_;
};

// B0(r) + B1(r) <q, x^> with B0 = c0 b(r/R), B1 = c1 (r/R) b(r/R), normalized so that
// -int B0 r dr = alpha and q int B1 r dr = p (taking q = p).
class RadialPlusDipole2D final : public FieldModel {
public:
    RadialPlusDipole2D(double alpha, Vec2 p, double radius) : p_(p), R_(radius) {
        c0_ = -alpha / (R_ * R_ * bump_moment(1));
        c1_ = 1.0 / (R_ * R_ * bump_moment(2));
    }
    double eval2(const Vec2& x) const override {
        const double u = norm(x) / R_;
        const double b = bump(u);
        // (r/R) <p, x^> = <p, x> / R
        return c0_ * b + c1_ * b * dot(p_, x) / R_;
    }
    double support_radius() const override { return R_; }

private:
    Vec2 p_;
    double R_, c0_ = 0.0, c1_ = 0.0;
};

class TorusField final : public FieldModel {
public:
    TorusField(double alpha, SectionShape shape) : alpha_(alpha), shape_(std::move(shape)) {}
    Vec3 eval3(const Vec3& x) const override {
        const double rho2 = x[0] * x[0] + x[1] * x[1];
        if (rho2 == 0.0 || !shape_.contains({std::sqrt(rho2), x[2]})) return {0.0, 0.0, 0.0};
        return {alpha_ * x[1] / rho2, -alpha_ * x[0] / rho2, 0.0};
    }
    std::vector<double> breakpoints3(const Vec3& d) const override {
        const double rho = std::hypot(d[0], d[1]);
        if (rho == 0.0) return {};
        const auto hits = shape_.ray_hits(d[2] / rho);
        if (!hits) return {};
        return {hits->first, hits->second};
    }
    // s B(s u) = alpha (u2, -u1, 0) / rho_u^2 is constant on the chord, so the moment is that
    // vector times the chord length inside [s0, s1]. Quadrature of the indicator fails on grazing
    // rays, where the chord is shorter than the rounding noise of contains().
    std::optional<Vec3> radial_moment3(const Vec3& u, double s0, double s1) const override {
        const double rho2 = u[0] * u[0] + u[1] * u[1];
        if (rho2 == 0.0) return Vec3{0.0, 0.0, 0.0};
        const auto hits = shape_.ray_hits(u[2] / std::sqrt(rho2));
        if (!hits) return Vec3{0.0, 0.0, 0.0};
        const double len = std::max(0.0, std::min(s1, hits->second) - std::max(s0, hits->first));
        return (alpha_ * len / rho2) * Vec3{u[1], -u[0], 0.0};
    }
    double support_radius() const override { return shape_.max_distance(); }
    const SectionShape& shape() const { return shape_; }
    double alpha() const { return alpha_; }

private:
    double alpha_;
    SectionShape shape_;
};

// B = grad(phi) x m with phi = amplitude * b(|x - c| / R).
class Bump3D final : public FieldModel {
public:
    Bump3D(double amplitude, double radius, Vec3 center, Vec3 m) : amp_(amplitude), R_(radius), c_(center), m_(m) {}
    Vec3 eval3(const Vec3& x) const override {
        const Vec3 d = x - c_;
        const double n = norm(d);
        if (n == 0.0 || n >= R_) return {0.0, 0.0, 0.0};
        const Vec3 grad = (amp_ * bump_derivative(n / R_) / (R_ * n)) * d;
        return cross(grad, m_);
    }
    std::vector<double> breakpoints3(const Vec3& dir) const override {
        const double b = dot(dir, c_);
        const double disc = b * b - dot(c_, c_) + R_ * R_;
        if (disc <= 0.0) return {};
        const double sq = std::sqrt(disc);
        std::vector<double> out;
        for (double s : {b - sq, b + sq})
            if (s > 0.0) out.push_back(s);
        return out;
    }
    double support_radius() const override { return norm(c_) + R_; }

private:
    double amp_, R_;
    Vec3 c_, m_;
};

struct ParamDef {
    std::string name;
    std::vector<double> default_value;  // empty: optional without default
};

inline std::vector<ParamDef> family_params(FieldFamily f) {
    switch (f) {
        case FieldFamily::gaussian2d: return {{"amplitude", {1.0}}, {"width", {1.0}}};
        case FieldFamily::radial_profile_2d:
            return {{"amplitude", {1.0}}, {"radius", {1.0}}, {"profile_r", {}}, {"profile_b", {}}};
        case FieldFamily::radial_plus_dipole_2d: return {{"alpha", {0.25}}, {"p", {0.1, 0.0}}, {"radius", {1.0}}};
        case FieldFamily::ab_point_flux_2d: return {{"alpha", {0.5}}};
        case FieldFamily::toroidal_solenoid_3d: return {{"alpha", {1.0}}, {"l", {2.0}}, {"r", {1.0}}, {"ellipse", {}}};
        case FieldFamily::bump_3d:
            return {{"amplitude", {1.0}}, {"radius", {1.0}}, {"center", {0.3, -0.2, 0.1}}, {"m", {0.0, 0.0, 1.0}}};
    }
    return {};
}

}  // namespace detail

// Immutable description of a magnetic field from the catalog.
class FieldSpec {
public:
    static FieldSpec make(FieldFamily family, const ParamMap& user = {}) {
        FieldSpec s;
        s.family_ = family;
        const auto defs = detail::family_params(family);
        for (const auto& [name, value] : user) {
            const bool known = std::any_of(defs.begin(), defs.end(), [&](const auto& d) { return d.name == name; });
            if (!known)
                throw Error(ErrorCode::InvalidSpec, "unknown parameter for family " +
                                                        std::string(family_name(family)), name);
        }
        for (const auto& d : defs) {
            auto it = user.find(d.name);
            if (it != user.end()) s.params_[d.name] = it->second;
            else if (!d.default_value.empty()) s.params_[d.name] = d.default_value;
        }
        s.build();
        return s;
    }

    [[nodiscard]] FieldFamily family() const { return family_; }
    [[nodiscard]] int dimension() const { return family_dimension(family_); }
    [[nodiscard]] const ParamMap& params() const { return params_; }
    [[nodiscard]] bool has_param(const std::string& name) const { return params_.count(name) != 0; }
    [[nodiscard]] bool analytic_only() const { return family_ == FieldFamily::ab_point_flux_2d; }

    [[nodiscard]] double param(const std::string& name) const { return vec_param(name, 1)[0]; }
    [[nodiscard]] const std::vector<double>& vec_param(const std::string& name, std::size_t arity = 0) const {
        auto it = params_.find(name);
        if (it == params_.end()) throw Error(ErrorCode::InvalidSpec, "missing parameter", name);
        if (arity != 0 && it->second.size() != arity)
            throw Error(ErrorCode::InvalidSpec,
                        "parameter " + name + " expects " + std::to_string(arity) + " value(s)", name);
        return it->second;
    }

    // Decay exponent r of |B(x)| <= C (1+|x|)^-r; infinite for compact support and the Gaussian.
    [[nodiscard]] double decay_exponent() const { return std::numeric_limits<double>::infinity(); }
    [[nodiscard]] double support_radius() const {
        return model_ ? model_->support_radius() : std::numeric_limits<double>::infinity();
    }
    // Radius beyond which B is zero or below double precision relative to its peak.
    [[nodiscard]] double effective_radius() const { return model_ ? model_->effective_radius() : 0.0; }

    [[nodiscard]] double eval2(const Vec2& x) const {
        require_pointwise();
        return model_->eval2(x);
    }
    [[nodiscard]] Vec3 eval3(const Vec3& x) const {
        require_pointwise();
        return model_->eval3(x);
    }
    [[nodiscard]] std::optional<Vec3> exact_radial_moment(const Vec3& u, double s0, double s1) const {
        return model_ ? model_->radial_moment3(u, s0, s1) : std::nullopt;
    }
    [[nodiscard]] std::vector<double> radial_breakpoints(const Vec3& direction) const {
        return model_ ? model_->breakpoints3(direction) : std::vector<double>{};
    }

    // Point-flux strength for the AB family.
    [[nodiscard]] double ab_alpha() const { return param("alpha"); }
    [[nodiscard]] const SectionShape& section() const {
        if (!section_) throw Error(ErrorCode::InvalidArgument, "field has no solenoid section");
        return *section_;
    }

private:
    FieldSpec() = default;

    void require_pointwise() const {
        if (analytic_only())
            throw Error(ErrorCode::AnalyticOnlyFamily,
                        "ab_point_flux_2d is a distributional field without pointwise values", "ab_point_flux_2d");
    }

    Vec2 vec2(const std::string& n) const {
        const auto& v = vec_param(n, 2);
        return {v[0], v[1]};
    }
    Vec3 vec3(const std::string& n) const {
        const auto& v = vec_param(n, 3);
        return {v[0], v[1], v[2]};
    }
    double positive(const std::string& n) const {
        const double v = param(n);
        if (!(v > 0.0)) throw Error(ErrorCode::InvalidSpec, "parameter must be positive", n);
        return v;
    }

    void build() {
        for (const auto& [name, v] : params_)
            for (double x : v)
                if (!std::isfinite(x)) throw Error(ErrorCode::InvalidSpec, "parameter values must be finite", name);
        switch (family_) {
            case FieldFamily::gaussian2d:
                model_ = std::make_shared<detail::Gaussian2D>(param("amplitude"), positive("width"));
                break;
            case FieldFamily::radial_profile_2d: build_profile(); break;
            case FieldFamily::radial_plus_dipole_2d:
                model_ = std::make_shared<detail::RadialPlusDipole2D>(param("alpha"), vec2("p"), positive("radius"));
                break;
            case FieldFamily::ab_point_flux_2d: (void)param("alpha"); break;
            case FieldFamily::toroidal_solenoid_3d: {
                if (has_param("ellipse")) {
                    const auto& e = vec_param("ellipse", 4);
                    section_ = std::make_shared<SectionShape>(SectionShape::ellipse(e[0], e[1], e[2], e[3]));
                    params_.erase("l");
                    params_.erase("r");
                } else {
                    section_ = std::make_shared<SectionShape>(SectionShape::disc(param("l"), param("r")));
                }
                model_ = std::make_shared<detail::TorusField>(param("alpha"), *section_);
                break;
            }
            case FieldFamily::bump_3d:
                model_ = std::make_shared<detail::Bump3D>(param("amplitude"), positive("radius"), vec3("center"),
                                                          vec3("m"));
                break;
        }
    }

    void build_profile() {
        const bool has_r = has_param("profile_r"), has_b = has_param("profile_b");
        if (has_r != has_b)
            throw Error(ErrorCode::InvalidSpec, "profile_r and profile_b must be given together", "profile_r");
        if (!has_r) {
            model_ = std::make_shared<detail::RadialBump2D>(param("amplitude"), positive("radius"));
            return;
        }
        params_.erase("amplitude");
        params_.erase("radius");
        auto r = params_.at("profile_r");
        auto b = params_.at("profile_b");
        if (r.size() != b.size() || r.size() < 4)
            throw Error(ErrorCode::InvalidSpec, "tabulated profile needs at least 4 (r, B) pairs of equal length",
                        "profile_r");
        if (r.front() != 0.0) throw Error(ErrorCode::InvalidSpec, "tabulated profile must start at r = 0", "profile_r");
        for (std::size_t i = 1; i < r.size(); ++i)
            if (!(r[i] > r[i - 1]))
                throw Error(ErrorCode::InvalidSpec, "profile_r must be strictly increasing", "profile_r");
        if (b.back() != 0.0)
            throw Error(ErrorCode::InvalidSpec, "tabulated profile must end at B = 0 (compact support)", "profile_b");
        model_ = std::make_shared<detail::RadialTable2D>(std::move(r), std::move(b));
    }

    FieldFamily family_ = FieldFamily::gaussian2d;
    ParamMap params_;
    std::shared_ptr<const detail::FieldModel> model_;
    std::shared_ptr<const SectionShape> section_;
};

inline double eval_field(const FieldSpec& spec, const Vec2& x) { return spec.eval2(x); }
inline Vec3 eval_field(const FieldSpec& spec, const Vec3& x) { return spec.eval3(x); }

inline double divergence_residual(const FieldSpec& spec, const Vec3& x, double h = 0.0) {
    if (!(h > 0.0)) h = default_fd_step(norm(x));
    return fd_div<3>([&](const Vec3& y) { return spec.eval3(y); }, x, h);
}

// Radius used for radial quadratures: exact support, or max(truncation radius, effective radius).
inline double quadrature_radius(const FieldSpec& spec, const QuadratureConfig& cfg) {
    const double s = spec.support_radius();
    if (std::isfinite(s)) return s;
    return std::max(cfg.truncation_radius, spec.effective_radius());
}

inline QuadResult<double> total_flux_2d(const FieldSpec& spec, const QuadratureConfig& cfg) {
    if (spec.dimension() != 2) throw Error(ErrorCode::InvalidArgument, "total_flux_2d needs a 2D field");
    if (spec.family() == FieldFamily::ab_point_flux_2d) return {-2.0 * std::numbers::pi * spec.ab_alpha(), 0.0, 0};
    return integrate_area_2d([&](const Vec2& x) { return spec.eval2(x); }, quadrature_radius(spec, cfg), cfg);
}

// Circulation of A over the circle |x| = R, counterclockwise.
template <typename A>
QuadResult<double> circulation_flux_2d(A&& potential, double R, const QuadratureConfig& cfg) {
    return integrate_circle(
        [&](double t) {
            const Vec2 u = unit_from_angle(t);
            return dot(potential(R * u), perp(u)) * R;
        },
        cfg);
}

// ---- plain-text config ------------------------------------------------------

inline std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string dump_field_config(const FieldSpec& spec) {
    std::ostringstream out;
    out << "[field]\n";
    out << "dimension = " << spec.dimension() << "\n";
    out << "family = " << family_name(spec.family()) << "\n";
    for (const auto& [name, values] : spec.params()) {
        out << "param." << name << " = ";
        for (std::size_t i = 0; i < values.size(); ++i) out << (i ? ", " : "") << format_number(values[i]);
        out << "\n";
    }
    out << "decay_exponent = " << format_number(spec.decay_exponent()) << "\n";
    out << "support_radius = " << format_number(spec.support_radius()) << "\n";
    return out.str();
}

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_number(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size())
        throw Error(ErrorCode::InvalidSpec, "malformed number '" + t + "'", key);
    return v;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(item, key));
    if (out.empty()) throw Error(ErrorCode::InvalidSpec, "empty parameter value", key);
    return out;
}

inline bool same_number(double a, double b) { return a == b || (std::isinf(a) && std::isinf(b) && (a > 0) == (b > 0)); }

}  // namespace detail

inline FieldSpec parse_field_config(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    bool in_field = false, seen_section = false;
    std::optional<int> dimension;
    std::optional<FieldFamily> family;
    std::optional<double> decay, support;
    ParamMap params;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const std::string where = "line " + std::to_string(lineno);
        if (t.front() == '[') {
            in_field = (t == "[field]");
            if (!in_field) throw Error(ErrorCode::InvalidSpec, "unknown section " + t, where);
            seen_section = true;
            continue;
        }
        if (!in_field) throw Error(ErrorCode::InvalidSpec, "entry outside [field] section", where);
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::InvalidSpec, "expected key = value", where);
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (key == "dimension") {
            const double d = detail::parse_number(value, key);
            if (d != 2.0 && d != 3.0) throw Error(ErrorCode::InvalidSpec, "dimension must be 2 or 3", where);
            dimension = static_cast<int>(d);
        } else if (key == "family") {
            family = parse_family(value);
        } else if (key == "decay_exponent") {
            decay = detail::parse_number(value, key);
        } else if (key == "support_radius") {
            support = detail::parse_number(value, key);
        } else if (key.rfind("param.", 0) == 0 && key.size() > 6) {
            params[key.substr(6)] = detail::parse_list(value, key);
        } else {
            throw Error(ErrorCode::InvalidSpec, "unknown key '" + key + "'", where);
        }
    }
    if (!seen_section) throw Error(ErrorCode::InvalidSpec, "missing [field] section");
    if (!family) throw Error(ErrorCode::InvalidSpec, "missing family", "family");
    FieldSpec spec = FieldSpec::make(*family, params);
    if (dimension && *dimension != spec.dimension())
        throw Error(ErrorCode::InvalidSpec, "dimension does not match family", "dimension");
    if (decay && !detail::same_number(*decay, spec.decay_exponent()))
        throw Error(ErrorCode::InvalidSpec, "decay_exponent does not match family", "decay_exponent");
    if (support && std::abs(*support - spec.support_radius()) > 1e-12 * std::max(1.0, std::abs(*support)) &&
        !detail::same_number(*support, spec.support_radius()))
        throw Error(ErrorCode::InvalidSpec, "support_radius does not match family parameters", "support_radius");
    return spec;
}

inline FieldSpec load_field_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidSpec, "cannot open field config", path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_field_config(ss.str());
}

}  // namespace magscatter
