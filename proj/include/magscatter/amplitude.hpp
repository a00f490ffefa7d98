#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "magscatter/circulation.hpp"
#include "magscatter/error.hpp"
#include "magscatter/fields.hpp"
#include "magscatter/gauge.hpp"
#include "magscatter/numerics.hpp"
#include "magscatter/vec.hpp"

namespace magscatter {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double wrap_angle(double a) {
    double w = std::fmod(a, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

// ---- spectral sets on the unit circle ---------------------------------------------

// Counterclockwise arc from `start` in [0, 2pi) to `end` in [start, start + 2pi).
struct Arc {
    double start = 0.0;
    double end = 0.0;
};

class SpectralSet {
public:
    static SpectralSet full() {
        SpectralSet s;
        s.full_ = true;
        return s;
    }

    // Normalizes and merges overlapping arcs; arcs of length >= 2pi give the full circle.
    static SpectralSet from_arcs(std::vector<Arc> arcs) {
        SpectralSet s;
        std::vector<Arc> norm_arcs;
        for (const Arc& a : arcs) {
            const double len = a.end - a.start;
            if (len >= kTwoPi) return full();
            const double st = wrap_angle(a.start);
            norm_arcs.push_back({st, st + std::max(0.0, len)});
        }
        std::sort(norm_arcs.begin(), norm_arcs.end(), [](const Arc& x, const Arc& y) { return x.start < y.start; });
        std::vector<Arc> merged;
        for (const Arc& a : norm_arcs) {
            if (!merged.empty() && a.start <= merged.back().end) merged.back().end = std::max(merged.back().end, a.end);
            else merged.push_back(a);
        }
        // Wrap-around overlap of the last arc with the first ones.
        while (merged.size() > 1 && merged.back().end >= merged.front().start + kTwoPi) {
            Arc last = merged.back();
            merged.pop_back();
            last.end = std::max(last.end, merged.front().end + kTwoPi);
            merged.erase(merged.begin());
            merged.push_back(last);
            std::sort(merged.begin(), merged.end(), [](const Arc& x, const Arc& y) { return x.start < y.start; });
        }
        for (const Arc& a : merged)
            if (a.end - a.start >= kTwoPi) return full();
        s.arcs_ = std::move(merged);
        return s;
    }

    // Arcs covering sampled angles: consecutive samples closer than `resolution` are joined.
    static SpectralSet from_angles(std::vector<double> angles, double resolution) {
        if (angles.empty()) return {};
        for (double& a : angles) a = wrap_angle(a);
        std::sort(angles.begin(), angles.end());
        const std::size_t n = angles.size();
        std::vector<std::size_t> gaps;  // index i: gap between sample i and sample i+1 (cyclic)
        for (std::size_t i = 0; i < n; ++i) {
            const double next = i + 1 < n ? angles[i + 1] : angles[0] + kTwoPi;
            if (next - angles[i] > resolution) gaps.push_back(i);
        }
        if (gaps.empty()) return full();
        std::vector<Arc> arcs;
        for (std::size_t j = 0; j < gaps.size(); ++j) {
            const std::size_t first = (gaps[j] + 1) % n;
            const std::size_t last = gaps[(j + 1) % gaps.size()];
            double end = angles[last];
            if (end < angles[first]) end += kTwoPi;
            arcs.push_back({angles[first], end});
        }
        return from_arcs(std::move(arcs));
    }

    [[nodiscard]] bool full_circle() const { return full_; }
    [[nodiscard]] const std::vector<Arc>& arcs() const { return arcs_; }
    [[nodiscard]] bool empty() const { return !full_ && arcs_.empty(); }

    [[nodiscard]] bool contains(double angle, double tol = 0.0) const {
        if (full_) return true;
        const double a = wrap_angle(angle);
        for (const Arc& arc : arcs_)
            for (double shift : {-kTwoPi, 0.0, kTwoPi})
                if (a + shift >= arc.start - tol && a + shift <= arc.end + tol) return true;
        return false;
    }

    // Image under complex conjugation.
    [[nodiscard]] SpectralSet conjugate() const {
        if (full_) return full();
        std::vector<Arc> out;
        for (const Arc& a : arcs_) out.push_back({-a.end, -a.start});
        return from_arcs(std::move(out));
    }

    // Same arcs up to `tol` in each endpoint.
    [[nodiscard]] bool approx_equal(const SpectralSet& o, double tol) const {
        if (full_ || o.full_) return full_ == o.full_;
        if (arcs_.size() != o.arcs_.size()) return false;
        auto close = [tol](double a, double b) {
            const double d = std::abs(wrap_angle(a - b + tol) - tol);
            return d <= tol || std::abs(d - kTwoPi) <= tol;
        };
        for (std::size_t i = 0; i < arcs_.size(); ++i) {
            bool found = false;
            for (const Arc& b : o.arcs_)
                found = found || (close(arcs_[i].start, b.start) &&
                                  std::abs((arcs_[i].end - arcs_[i].start) - (b.end - b.start)) <= 2 * tol);
            if (!found) return false;
        }
        return true;
    }

private:
    bool full_ = false;
    std::vector<Arc> arcs_;
};

// ---- Aharonov-Bohm reference ------------------------------------------------------------

inline cplx ab_eigenvalue(long m, double alpha) {
    const double phase = std::numbers::pi * alpha;
    return static_cast<double>(m) < -alpha ? std::polar(1.0, phase) : std::polar(1.0, -phase);
}

struct ABKernel {
    double delta_coeff;
    cplx offdiag;
};

inline ABKernel ab_kernel_closed_form(double theta, double theta_p, double alpha) {
    const double d = theta - theta_p;
    const cplx denom = std::exp(cplx(0.0, d)) - 1.0;
    if (std::abs(denom) < 1e-14)
        throw Error(ErrorCode::DiagonalEvaluation, "AB kernel off-diagonal part requested on the diagonal",
                    "theta-theta'=" + std::to_string(d));
    const double ia = std::floor(alpha);
    const cplx off = cplx(0.0, 1.0 / std::numbers::pi) * std::exp(cplx(0.0, -ia * d)) *
                     std::sin(std::numbers::pi * alpha) / denom;
    return {std::cos(std::numbers::pi * alpha), off};
}

// (2pi)^-1 sum_{|m| <= M} s_m rho^|m| e^{im(theta - theta')}
inline cplx ab_partial_wave_sum(double theta, double theta_p, double alpha, long M, double abel_radius) {
    if (M < 1) throw Error(ErrorCode::InvalidArgument, "partial-wave truncation M must be >= 1");
    if (!(abel_radius > 0.0 && abel_radius < 1.0))
        throw Error(ErrorCode::InvalidArgument, "Abel radius must lie in (0,1)");
    const double d = theta - theta_p;
    cplx sum = ab_eigenvalue(0, alpha);
    double w = 1.0;
    for (long m = 1; m <= M; ++m) {
        w *= abel_radius;
        sum += w * (ab_eigenvalue(m, alpha) * std::exp(cplx(0.0, m * d)) +
                    ab_eigenvalue(-m, alpha) * std::exp(cplx(0.0, -m * d)));
    }
    return sum / kTwoPi;
}

// ---- two dimensions -----------------------------------------------------------------

struct SingularAmplitude2D {
    // (f(omega^-) - f(omega^+)) / 2
    std::function<double(const Vec2&)> phase;
    double delta_coeff = 1.0;
    double pv_coeff = 0.0;
    double flux = 0.0;
    double remainder_exponent = 3.0;

    // Principal-value part e^{i phase(omega)} pv_coeff sgn det[omega omega'] / |omega - omega'|.
    [[nodiscard]] cplx kernel(const Vec2& omega, const Vec2& omega_p) const {
        const double det = det2(omega, omega_p);
        if (std::abs(det) <= 1e-15)
            throw Error(ErrorCode::DiagonalEvaluation, "singular kernel needs non-collinear omega, omega'");
        const double sgn = det > 0.0 ? 1.0 : -1.0;
        return std::polar(pv_coeff * sgn / norm(omega - omega_p), phase(omega));
    }
};

namespace detail {

inline SingularAmplitude2D amplitude_from_flux(double flux, std::function<double(const Vec2&)> phase, double r) {
    SingularAmplitude2D s;
    s.flux = flux;
    s.delta_coeff = std::cos(flux / 2.0);
    s.pv_coeff = std::sin(flux / 2.0) / std::numbers::pi;
    s.phase = std::move(phase);
    s.remainder_exponent = std::min(r, 3.0);
    return s;
}

}  // namespace detail

inline SingularAmplitude2D singular_amplitude_2d(const FieldSpec& spec, const QuadratureConfig& cfg = {}) {
    detail::require_dimension(spec, 2, "singular_amplitude_2d");
    if (spec.family() != FieldFamily::ab_point_flux_2d) detail::require_short_range(spec);
    const double flux = total_flux_2d(spec, cfg).value;
    if (spec.family() == FieldFamily::ab_point_flux_2d)
        return detail::amplitude_from_flux(flux, [](const Vec2&) { return 0.0; }, spec.decay_exponent());
    auto phase = [spec, cfg](const Vec2& omega) {
        const auto [plus, minus] = rotate_perp(omega);
        return 0.5 * (half_plane_flux_f(spec, minus, cfg) - half_plane_flux_f(spec, plus, cfg));
    };
    return detail::amplitude_from_flux(flux, phase, spec.decay_exponent());
}

// Amplitude from a coefficient a(x^) of A^(inf) = a(x^) (-x2, x1) / |x|^2, via arc integrals.
inline SingularAmplitude2D singular_amplitude_2d_from_coefficient(std::function<double(const Vec2&)> a,
                                                                  const QuadratureConfig& cfg = {},
                                                                  double decay_exponent = 3.0) {
    const double flux = integrate_circle([&](double t) { return a(unit_from_angle(t)); }, cfg).value;
    auto phase = [a, cfg](const Vec2& omega) {
        const auto [plus, minus] = rotate_perp(omega);
        return 0.5 * (arc_integral_f(a, minus, cfg) - arc_integral_f(a, plus, cfg));
    };
    return detail::amplitude_from_flux(flux, phase, decay_exponent);
}

// Amplitude of an arbitrary potential whose field is supported in |x| < R: the coefficient is
// read off as a(x^) = R <A(R x^), x^perp>.
inline SingularAmplitude2D singular_amplitude_2d_from_potential(VectorField<2> A, double R,
                                                                const QuadratureConfig& cfg = {}) {
    auto a = [A = std::move(A), R](const Vec2& u) { return R * dot(A(R * u), perp(u)); };
    return singular_amplitude_2d_from_coefficient(a, cfg);
}

inline SingularAmplitude2D gauge_covariance_transform(const SingularAmplitude2D& amp,
                                                      std::function<double(const Vec2&)> phi0) {
    SingularAmplitude2D out = amp;
    out.phase = [old = amp.phase, phi0 = std::move(phi0)](const Vec2& w) {
        return old(w) + phi0(w) - phi0(-w);
    };
    return out;
}

inline cplx pure_gauge_sm(const std::function<double(const Vec2&)>& phi0, const Vec2& omega) {
    return std::polar(1.0, phi0(omega) - phi0(-omega));
}

struct Spectrum2D {
    SpectralSet set;
    double gamma_minus = 0.0;
    double gamma_plus = 0.0;
};

inline SpectralSet spectrum_from_gammas(double gamma_minus, double gamma_plus) {
    if (gamma_plus - gamma_minus >= kTwoPi) return SpectralSet::full();
    return SpectralSet::from_arcs({{gamma_minus, gamma_plus}, {-gamma_plus, -gamma_minus}});
}

// gamma_+/- = max/min of f over the circle (sampled, then refined by golden-section search).
inline Spectrum2D essential_spectrum_2d(const FieldSpec& spec, int n_samples, const QuadratureConfig& cfg = {}) {
    detail::require_dimension(spec, 2, "essential_spectrum_2d");
    if (n_samples < 3) throw Error(ErrorCode::InvalidArgument, "essential_spectrum_2d needs n_samples >= 3");
    auto f = [&](double t) { return half_plane_flux_f(spec, unit_from_angle(t), cfg); };
    std::vector<double> vals(static_cast<std::size_t>(n_samples));
    const double h = kTwoPi / n_samples;
    parallel_for(vals.size(), [&](std::size_t i) { vals[i] = f(h * static_cast<double>(i)); });
    const auto imax = std::max_element(vals.begin(), vals.end()) - vals.begin();
    const auto imin = std::min_element(vals.begin(), vals.end()) - vals.begin();
    auto golden = [&](double center, double sign, double start_value) {
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        double lo = center - h, hi = center + h;
        double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        double f1 = sign * f(x1), f2 = sign * f(x2);
        for (int it = 0; it < 40; ++it) {
            if (f1 > f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = sign * f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = sign * f(x2);
            }
        }
        return sign * std::max({f1, f2, sign * start_value});
    };
    Spectrum2D out;
    out.gamma_plus = golden(h * static_cast<double>(imax), 1.0, vals[static_cast<std::size_t>(imax)]);
    out.gamma_minus = golden(h * static_cast<double>(imin), -1.0, vals[static_cast<std::size_t>(imin)]);
    out.set = spectrum_from_gammas(out.gamma_minus, out.gamma_plus);
    return out;
}

// ---- three dimensions ---------------------------------------------------------------

// Orthonormal frame (u, v) of the plane orthogonal to omega; x(theta) = cos(theta) u + sin(theta) v.
inline std::pair<Vec3, Vec3> circle_frame_3d(const Vec3& omega) {
    const double n2 = omega[0] * omega[0] + omega[1] * omega[1];
    if (n2 > 1e-6) {
        const double n = std::sqrt(n2);
        return {Vec3{-omega[1] / n, omega[0] / n, 0.0}, Vec3{-omega[0] * omega[2] / n, -omega[1] * omega[2] / n, n}};
    }
    const Vec3 e1{1.0, 0.0, 0.0};
    const Vec3 u = normalized(e1 - dot(e1, omega) * omega);
    return {u, cross(omega, u)};
}

inline Vec3 circle_parametrization_3d(const Vec3& omega, double theta) {
    const auto [u, v] = circle_frame_3d(omega);
    return std::cos(theta) * u + std::sin(theta) * v;
}

// Samples of I(psi, omega) on the great circle orthogonal to omega and the trigonometric
// interpolant of exp(iI).
class CircleSymbol {
public:
    template <typename A>
    static CircleSymbol build(A&& a_inf, const Vec3& omega, const QuadratureConfig& cfg = {}) {
        CircleSymbol s;
        s.omega_ = omega;
        std::tie(s.u_, s.v_) = circle_frame_3d(omega);
        auto sample = [&](double t) {
            return line_circulation_I<3>(a_inf, std::cos(t) * s.u_ + std::sin(t) * s.v_, omega, cfg);
        };
        const double tol = std::max(1e-12, 10.0 * cfg.abs_tol);
        std::size_t n = 16;
        std::vector<double> I(n);
        for (std::size_t j = 0; j < n; ++j) I[j] = sample(kTwoPi * static_cast<double>(j) / static_cast<double>(n));
        s.set_samples(I);
        while (true) {
            std::vector<double> J(2 * n);
            for (std::size_t j = 0; j < n; ++j) {
                J[2 * j] = I[j];
                J[2 * j + 1] = sample(kTwoPi * (static_cast<double>(j) + 0.5) / static_cast<double>(n));
            }
            const cplx p_prev = s.coeffs_[0];
            I = std::move(J);
            n *= 2;
            s.set_samples(I);
            double tail = 0.0;
            for (std::size_t k = n / 4; k <= n / 2; ++k)
                tail = std::max({tail, std::abs(s.coeff(static_cast<long>(k))), std::abs(s.coeff(-static_cast<long>(k)))});
            if (std::abs(s.coeffs_[0] - p_prev) <= tol && tail <= tol) break;
            if (n >= 1024)
                throw Error(ErrorCode::NonConvergence, "circle symbol did not resolve with 1024 samples",
                            "tail coefficient " + std::to_string(tail));
        }
        return s;
    }

    [[nodiscard]] const Vec3& omega() const { return omega_; }
    [[nodiscard]] const Vec3& u() const { return u_; }
    [[nodiscard]] const Vec3& v() const { return v_; }
    [[nodiscard]] const std::vector<double>& samples() const { return I_; }
    [[nodiscard]] std::size_t size() const { return I_.size(); }
    [[nodiscard]] cplx p_av() const { return coeffs_[0]; }

    // exp(iI(x(theta))) - p_av, as a trigonometric interpolant with no constant term.
    [[nodiscard]] cplx numerator(double theta) const {
        const long half = static_cast<long>(I_.size() / 2);
        cplx sum = 0.0;
        for (long k = 1; k < half; ++k)
            sum += coeff(k) * std::exp(cplx(0.0, k * theta)) + coeff(-k) * std::exp(cplx(0.0, -k * theta));
        sum += coeff(half) * std::cos(static_cast<double>(half) * theta);
        return sum;
    }

    // Mean of exp(iI) - p_av over the samples (zero up to rounding).
    [[nodiscard]] cplx sample_numerator_mean() const {
        cplx m = 0.0;
        for (double v : I_) m += std::exp(cplx(0.0, v)) - p_av();
        return m / static_cast<double>(I_.size());
    }

    // q(omega, tau) = -(2pi)^-2 int (exp(iI) - p_av) (<psi, tau> - i0)^-2 dpsi; only the
    // component of tau orthogonal to omega enters.
    [[nodiscard]] cplx q(const Vec3& tau, const EpsilonSchedule& sched, const QuadratureConfig& cfg) const {
        const double a = dot(u_, tau), b = dot(v_, tau);
        const double t = std::hypot(a, b);
        if (t == 0.0) throw Error(ErrorCode::DiagonalEvaluation, "q kernel needs a nonzero tangential tau");
        auto lin = [a, b](double th) { return a * std::cos(th) + b * std::sin(th); };
        auto num = [this](double th) { return numerator(th); };
        const auto r = regularized_i0_pairing(num, lin, 2, sched, cfg, t);
        return -r.value / (kTwoPi * kTwoPi);
    }

private:
    void set_samples(const std::vector<double>& I) {
        I_ = I;
        const std::size_t n = I.size();
        coeffs_.assign(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            cplx c = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                c += std::exp(cplx(0.0, I[j] - kTwoPi * static_cast<double>((k * j) % n) / static_cast<double>(n)));
            coeffs_[k] = c / static_cast<double>(n);
        }
    }

    // Coefficient of e^{ik theta}; k in [-n/2, n/2].
    [[nodiscard]] cplx coeff(long k) const {
        const long n = static_cast<long>(coeffs_.size());
        return coeffs_[static_cast<std::size_t>(((k % n) + n) % n)];
    }

    Vec3 omega_{}, u_{}, v_{};
    std::vector<double> I_;
    std::vector<cplx> coeffs_;
};

template <typename A>
cplx p_average_3d(A&& a_inf, const Vec3& omega, const QuadratureConfig& cfg = {}) {
    return CircleSymbol::build(a_inf, omega, cfg).p_av();
}

template <typename A>
cplx q_kernel_3d(A&& a_inf, const Vec3& omega, const Vec3& tau, const EpsilonSchedule& sched = {},
                 const QuadratureConfig& cfg = {}) {
    if (std::abs(dot(tau, omega)) > 1e-8 * norm(tau))
        throw Error(ErrorCode::NotOrthogonal, "tau must be tangent to the sphere at omega",
                    "<tau,omega>=" + std::to_string(dot(tau, omega)));
    return CircleSymbol::build(a_inf, omega, cfg).q(tau, sched, cfg);
}

class SingularAmplitude3D {
public:
    SingularAmplitude3D(AInfField a_inf, const QuadratureConfig& cfg = {}, const EpsilonSchedule& sched = {},
                        double rho = std::numeric_limits<double>::infinity())
        : a_inf_(std::move(a_inf)), cfg_(cfg), sched_(sched), remainder_exponent_(rho > 1.0 && rho < 2.0 ? rho : 2.0) {}

    [[nodiscard]] CircleSymbol symbol(const Vec3& omega) const { return CircleSymbol::build(a_inf_, omega, cfg_); }
    [[nodiscard]] cplx p_av(const Vec3& omega) const { return symbol(omega).p_av(); }
    [[nodiscard]] cplx q(const Vec3& omega, const Vec3& tau) const {
        return q_kernel_3d(a_inf_, omega, tau, sched_, cfg_);
    }
    // Off-diagonal singular kernel s0(omega, omega') = q(omega, omega' - omega).
    [[nodiscard]] cplx kernel(const Vec3& omega, const Vec3& omega_p) const {
        if (norm(omega - omega_p) < 1e-14)
            throw Error(ErrorCode::DiagonalEvaluation, "3D singular kernel requested on the diagonal");
        return symbol(omega).q(omega_p - omega, sched_, cfg_);
    }
    [[nodiscard]] double remainder_exponent() const { return remainder_exponent_; }
    [[nodiscard]] const AInfField& a_inf() const { return a_inf_; }

private:
    AInfField a_inf_;
    QuadratureConfig cfg_;
    EpsilonSchedule sched_;
    double remainder_exponent_;
};

inline SingularAmplitude3D singular_amplitude_3d(AInfField a_inf, const QuadratureConfig& cfg = {},
                                                 const EpsilonSchedule& sched = {},
                                                 double rho = std::numeric_limits<double>::infinity()) {
    return SingularAmplitude3D(std::move(a_inf), cfg, sched, rho);
}

// Near-uniform points on the unit sphere.
inline std::vector<Vec3> fibonacci_sphere(std::size_t n) {
    std::vector<Vec3> pts;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * static_cast<double>(i);
        pts.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }
    return pts;
}

struct SpectrumGrid {
    std::size_t n_omega = 64;
    std::size_t n_psi = 64;

    static SpectrumGrid from_size(std::size_t grid_size) { return {grid_size, grid_size}; }
};

// Sampled range of I(psi, omega) over tangent pairs.
struct CirculationRange {
    double min = 0.0;
    double max = 0.0;
};

template <typename A>
CirculationRange circulation_range_3d(A&& a_inf, const SpectrumGrid& grid, const QuadratureConfig& cfg = {}) {
    if (grid.n_omega < 1 || grid.n_psi < 1) throw Error(ErrorCode::InvalidArgument, "spectrum grid sizes must be positive");
    const auto omegas = fibonacci_sphere(grid.n_omega);
    std::vector<double> values(grid.n_omega * grid.n_psi);
    parallel_for(grid.n_omega, [&](std::size_t i) {
        const auto [u, v] = circle_frame_3d(omegas[i]);
        for (std::size_t j = 0; j < grid.n_psi; ++j) {
            const double t = kTwoPi * static_cast<double>(j) / static_cast<double>(grid.n_psi);
            values[i * grid.n_psi + j] = line_circulation_I<3>(a_inf, std::cos(t) * u + std::sin(t) * v, omegas[i], cfg);
        }
    });
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return {*lo, *hi};
}

// Closure of the image of exp(iI(psi, omega)). The unit cotangent bundle of the sphere is
// connected and I is continuous on it, so the image of I is the interval between its extreme
// values; the grid only locates those extremes.
inline SpectralSet spectrum_from_range(const CirculationRange& r) {
    return SpectralSet::from_arcs({{r.min, r.max}});
}

template <typename A>
SpectralSet essential_spectrum_3d(A&& a_inf, const SpectrumGrid& grid, const QuadratureConfig& cfg = {}) {
    return spectrum_from_range(circulation_range_3d(std::forward<A>(a_inf), grid, cfg));
}

template <typename A>
SpectralSet essential_spectrum_3d(A&& a_inf, std::size_t grid_size, const QuadratureConfig& cfg = {}) {
    return essential_spectrum_3d(std::forward<A>(a_inf), SpectrumGrid::from_size(grid_size), cfg);
}

// ---- cross sections -----------------------------------------------------------------

inline double cross_section(cplx s_value, double lambda, int d) {
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "energy lambda must be positive");
    if (d != 2 && d != 3) throw Error(ErrorCode::InvalidArgument, "dimension must be 2 or 3");
    return std::pow(kTwoPi, d - 1) * std::pow(lambda, -(d - 1) / 2.0) * std::norm(s_value);
}

// Coefficient of |omega - omega'|^-2 in the 2D forward cross section: 2 pi^-1 lambda^-1/2 sin^2(Phi/2).
inline double forward_cross_section_coefficient(double flux, double lambda) {
    const double s = std::sin(flux / 2.0);
    return 2.0 / std::numbers::pi / std::sqrt(lambda) * s * s;
}

}  // namespace magscatter
