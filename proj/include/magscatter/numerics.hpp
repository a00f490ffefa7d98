#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "magscatter/error.hpp"
#include "magscatter/vec.hpp"

namespace magscatter {

using cplx = std::complex<double>;

struct QuadratureConfig {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    int max_subdivisions = 2000;
    double truncation_radius = 50.0;
    // Assumed |f(s)| ~ s^-p beyond the truncation radius.
    double tail_decay_exponent = 3.0;

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
            throw Error(ErrorCode::InvalidArgument, "quadrature tolerances must be positive");
        if (max_subdivisions < 1)
            throw Error(ErrorCode::InvalidArgument, "max_subdivisions must be at least 1");
        if (!(truncation_radius > 0.0))
            throw Error(ErrorCode::InvalidArgument, "truncation_radius must be positive");
    }
};

template <typename T>
struct QuadResult {
    T value{};
    double error = 0.0;
    std::size_t evaluations = 0;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const cplx& v) { return std::abs(v); }
template <std::size_t N>
double magnitude(const Vec<N>& v) {
    return max_abs(v);
}

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
struct Segment {
    double a;
    double b;
    T value;
    double error;
    double resabs;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename T, typename F>
Segment<T> gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const T fc = f(c);
    T resk = fc * kWgk[7];
    T resg = fc * kWg[3];
    double resabs = magnitude(fc) * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const T f1 = f(c - dx);
        const T f2 = f(c + dx);
        resk += (f1 + f2) * kWgk[j];
        resabs += kWgk[j] * (magnitude(f1) + magnitude(f2));
        if (j % 2 == 1) resg += (f1 + f2) * kWg[j / 2];
    }
    return {a, b, resk * h, magnitude((resk - resg) * h), resabs * std::abs(h)};
}

inline std::string interval_text(double a, double b) {
    return "[" + std::to_string(a) + ", " + std::to_string(b) + "]";
}

}  // namespace detail

// Adaptive G7-K15 over [a, b] split at `breaks` (points outside (a, b) are ignored).
template <typename F>
auto integrate_1d(F&& f, double a, double b, std::span<const double> breaks, const QuadratureConfig& cfg)
    -> QuadResult<std::invoke_result_t<F&, double>> {
    using T = std::invoke_result_t<F&, double>;
    cfg.validate();
    if (!(a < b)) {
        if (a == b) return {};
        throw Error(ErrorCode::InvalidArgument, "integrate_1d requires a < b", detail::interval_text(a, b));
    }
    std::vector<double> pts{a};
    for (double p : breaks)
        if (p > a && p < b) pts.push_back(p);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    std::priority_queue<detail::Segment<T>> heap;
    std::vector<detail::Segment<T>> frozen;
    T total{};
    double total_err = 0.0;
    double total_abs = 0.0;
    std::size_t evals = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        auto s = detail::gk15<T>(f, pts[i], pts[i + 1]);
        evals += 15;
        total += s.value;
        total_err += s.error;
        total_abs += s.resabs;
        heap.push(s);
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    auto recompute = [&] {
        total = T{};
        total_err = 0.0;
        total_abs = 0.0;
        auto copy = heap;
        while (!copy.empty()) {
            total += copy.top().value;
            total_err += copy.top().error;
            total_abs += copy.top().resabs;
            copy.pop();
        }
        for (const auto& s : frozen) {
            total += s.value;
            total_err += s.error;
            total_abs += s.resabs;
        }
    };
    auto converged = [&] {
        const double tol = std::max(cfg.abs_tol, cfg.rel_tol * detail::magnitude(total));
        return total_err <= tol || total_err <= 50.0 * eps * total_abs;
    };

    int splits = 0;
    while (!heap.empty()) {
        if (converged()) {
            recompute();
            if (converged()) break;
        }
        auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const double scale = std::max({std::abs(worst.a), std::abs(worst.b), 1e-300});
        if (worst.b - worst.a <= 1e3 * eps * scale || mid <= worst.a || mid >= worst.b) {
            frozen.push_back(worst);
            continue;
        }
        if (++splits > cfg.max_subdivisions) {
            heap.push(worst);
            recompute();
            if (converged()) break;
            throw Error(ErrorCode::NonConvergence, "adaptive quadrature exhausted max_subdivisions",
                        "interval " + detail::interval_text(a, b) + ", error estimate " +
                            std::to_string(total_err));
        }
        auto left = detail::gk15<T>(f, worst.a, mid);
        auto right = detail::gk15<T>(f, mid, worst.b);
        evals += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        total_abs += left.resabs + right.resabs - worst.resabs;
        heap.push(left);
        heap.push(right);
    }
    recompute();
    return {total, total_err, evals};
}

template <typename F>
auto integrate_1d(F&& f, double a, double b, const QuadratureConfig& cfg) {
    return integrate_1d(std::forward<F>(f), a, b, std::span<const double>{}, cfg);
}

// Integral over [a, inf): adaptive on [a, R] plus the power-law tail f(R) R / (p - 1).
// The tail estimate is added to the value and its magnitude to the error.
template <typename F>
auto integrate_semi_infinite(F&& f, double a, std::span<const double> breaks, const QuadratureConfig& cfg)
    -> QuadResult<std::invoke_result_t<F&, double>> {
    const double p = cfg.tail_decay_exponent;
    if (!(p > 1.0))
        throw Error(ErrorCode::DecayTooSlow, "tail decay exponent must exceed 1 for a convergent tail",
                    "tail_decay_exponent=" + std::to_string(p));
    const double R = cfg.truncation_radius > a ? cfg.truncation_radius : a + cfg.truncation_radius;
    auto res = integrate_1d(f, a, R, breaks, cfg);
    const auto tail = f(R) * (R / (p - 1.0));
    res.value += tail;
    res.error += detail::magnitude(tail);
    res.evaluations += 1;
    return res;
}

template <typename F>
auto integrate_semi_infinite(F&& f, double a, const QuadratureConfig& cfg) {
    return integrate_semi_infinite(std::forward<F>(f), a, std::span<const double>{}, cfg);
}

template <typename F>
auto integrate_line(F&& f, const QuadratureConfig& cfg) {
    auto folded = [&f](double t) { return f(t) + f(-t); };
    return integrate_semi_infinite(folded, 0.0, cfg);
}

// Periodic trapezoid rule on [0, 2pi) with doubling; error = change under the last doubling.
template <typename F>
auto integrate_circle(F&& f, const QuadratureConfig& cfg) -> QuadResult<std::invoke_result_t<F&, double>> {
    using T = std::invoke_result_t<F&, double>;
    cfg.validate();
    constexpr double two_pi = 2.0 * std::numbers::pi;
    constexpr std::size_t max_points = std::size_t{1} << 20;
    std::size_t n = 8;
    T sum{};
    for (std::size_t k = 0; k < n; ++k) sum += f(two_pi * static_cast<double>(k) / static_cast<double>(n));
    T prev = sum * (two_pi / static_cast<double>(n));
    std::size_t evals = n;
    while (true) {
        T added{};
        for (std::size_t k = 0; k < n; ++k)
            added += f(two_pi * (static_cast<double>(k) + 0.5) / static_cast<double>(n));
        evals += n;
        sum += added;
        n *= 2;
        const T cur = sum * (two_pi / static_cast<double>(n));
        const double err = detail::magnitude(cur - prev);
        if (err <= std::max(cfg.abs_tol, cfg.rel_tol * detail::magnitude(cur)) ||
            err <= 64.0 * std::numeric_limits<double>::epsilon() * detail::magnitude(sum) * two_pi / static_cast<double>(n))
            return {cur, err, evals};
        if (n >= max_points)
            throw Error(ErrorCode::NonConvergence, "periodic trapezoid rule did not converge",
                        "points=" + std::to_string(n) + ", change " + std::to_string(err));
        prev = cur;
    }
}

// Polar-coordinate quadrature over the annular sector theta in [t0, t1], r in [r0, r1].
// `radial_breaks(theta)` may supply radii where the integrand has kinks or jumps.
template <typename F, typename Breaks>
auto integrate_polar_sector(F&& f, double t0, double t1, double r0, double r1, Breaks&& radial_breaks,
                            const QuadratureConfig& cfg) -> QuadResult<std::invoke_result_t<F&, const Vec2&>> {
    using T = std::invoke_result_t<F&, const Vec2&>;
    QuadratureConfig inner = cfg;
    inner.abs_tol = cfg.abs_tol / (t1 - t0);
    std::size_t evals = 0;
    double inner_err = 0.0;
    auto outer = [&](double theta) -> T {
        const Vec2 u = unit_from_angle(theta);
        const std::vector<double> br = radial_breaks(theta);
        auto res = integrate_1d([&](double r) -> T { return f(r * u) * r; }, r0, r1, br, inner);
        evals += res.evaluations;
        inner_err = std::max(inner_err, res.error);
        return res.value;
    };
    auto res = integrate_1d(outer, t0, t1, cfg);
    res.evaluations = evals;
    res.error += inner_err * (t1 - t0);
    return res;
}

template <typename F>
auto integrate_polar_sector(F&& f, double t0, double t1, double r0, double r1, const QuadratureConfig& cfg) {
    return integrate_polar_sector(std::forward<F>(f), t0, t1, r0, r1,
                                  [](double) { return std::vector<double>{}; }, cfg);
}

// Integral over the disc |x| <= radius.
template <typename F>
auto integrate_area_2d(F&& f, double radius, const QuadratureConfig& cfg) {
    return integrate_polar_sector(std::forward<F>(f), 0.0, 2.0 * std::numbers::pi, 0.0, radius, cfg);
}

// Parameter rectangle [u0,u1] x [v0,v1]; area_element is the surface Jacobian (1 if empty).
struct SurfacePatch {
    double u0 = 0.0;
    double u1 = 1.0;
    double v0 = 0.0;
    double v1 = 1.0;
    std::function<double(double, double)> area_element;
};

template <typename F>
auto integrate_surface_patch(F&& f, const SurfacePatch& patch, const QuadratureConfig& cfg)
    -> QuadResult<std::invoke_result_t<F&, double, double>> {
    using T = std::invoke_result_t<F&, double, double>;
    QuadratureConfig inner = cfg;
    inner.abs_tol = cfg.abs_tol / (patch.u1 - patch.u0);
    std::size_t evals = 0;
    double inner_err = 0.0;
    auto outer = [&](double u) -> T {
        auto res = integrate_1d(
            [&](double v) -> T {
                const T val = f(u, v);
                return patch.area_element ? val * patch.area_element(u, v) : val;
            },
            patch.v0, patch.v1, inner);
        evals += res.evaluations;
        inner_err = std::max(inner_err, res.error);
        return res.value;
    };
    auto res = integrate_1d(outer, patch.u0, patch.u1, cfg);
    res.evaluations = evals;
    res.error += inner_err * (patch.u1 - patch.u0);
    return res;
}

// ---- finite differences -------------------------------------------------

inline double default_fd_step(double xnorm) { return 1e-5 * std::max(1.0, xnorm); }

template <std::size_t N, typename Phi>
Vec<N> fd_grad(Phi&& phi, const Vec<N>& x, double h) {
    Vec<N> g{};
    for (std::size_t j = 0; j < N; ++j) {
        Vec<N> xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        g[j] = (phi(xp) - phi(xm)) / (2.0 * h);
    }
    return g;
}

// J[i][j] = dA_i/dx_j
template <std::size_t N, typename A>
std::array<Vec<N>, N> fd_jacobian(A&& field, const Vec<N>& x, double h) {
    std::array<Vec<N>, N> J{};
    for (std::size_t j = 0; j < N; ++j) {
        Vec<N> xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const Vec<N> d = (field(xp) - field(xm)) / (2.0 * h);
        for (std::size_t i = 0; i < N; ++i) J[i][j] = d[i];
    }
    return J;
}

template <std::size_t N, typename A>
double fd_div(A&& field, const Vec<N>& x, double h) {
    const auto J = fd_jacobian<N>(field, x, h);
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += J[i][i];
    return s;
}

template <typename A>
double fd_curl_2d(A&& field, const Vec2& x, double h) {
    const auto J = fd_jacobian<2>(field, x, h);
    return J[1][0] - J[0][1];
}

template <typename A>
Vec3 fd_curl_3d(A&& field, const Vec3& x, double h) {
    const auto J = fd_jacobian<3>(field, x, h);
    return {J[2][1] - J[1][2], J[0][2] - J[2][0], J[1][0] - J[0][1]};
}

// ---- epsilon-regularized pairings ------------------------------------------

struct EpsilonSchedule {
    double eps_start = 1e-2;
    double ratio = 0.5;
    int steps = 4;
    int extrapolation_order = 2;
    // Relative spread between the last two extrapolants above which the limit is declared unstable.
    double stability_tol = 1e-3;

    void validate() const {
        if (!(eps_start > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps_start must be positive");
        if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::InvalidArgument, "ratio must lie in (0,1)");
        if (steps < 3) throw Error(ErrorCode::InvalidArgument, "schedule needs at least 3 steps");
        if (extrapolation_order < 1 || extrapolation_order + 1 >= steps + 1 || extrapolation_order + 2 > steps)
            throw Error(ErrorCode::InvalidArgument, "extrapolation_order must satisfy 1 <= order <= steps - 2");
        if (!(stability_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "stability_tol must be positive");
    }

    [[nodiscard]] std::vector<double> values() const {
        std::vector<double> v;
        double e = eps_start;
        for (int i = 0; i < steps; ++i, e *= ratio) v.push_back(e);
        return v;
    }
};

// Value at x = 0 of the interpolating polynomial through (xs[i], ys[i]).
inline cplx neville_at_zero(std::span<const double> xs, std::span<const cplx> ys) {
    std::vector<cplx> p(ys.begin(), ys.end());
    const std::size_t n = p.size();
    for (std::size_t m = 1; m < n; ++m)
        for (std::size_t i = 0; i + m < n; ++i)
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i]);
    return p[0];
}

struct PairingResult {
    cplx value;
    double error = 0.0;
    std::vector<double> eps;
    std::vector<cplx> sweep;
};

namespace detail {

// Zeros of a periodic function on [start, start + 2pi), located by sampling and bisection.
template <typename L>
std::vector<double> periodic_zeros(L& lin, double start, int samples) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> zeros;
    const double h = two_pi / samples;
    double t_prev = start;
    double v_prev = lin(t_prev);
    for (int j = 1; j <= samples; ++j) {
        const double t = start + j * h;
        const double v = lin(t);
        if (v_prev == 0.0) {
            zeros.push_back(t_prev);
        } else if (v != 0.0 && (v > 0.0) != (v_prev > 0.0)) {
            double lo = t_prev, hi = t, flo = v_prev;
            for (int it = 0; it < 200 && hi - lo > 4e-16 * std::max(1.0, std::abs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = lin(mid);
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((fm > 0.0) == (flo > 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            zeros.push_back(0.5 * (lo + hi));
        }
        t_prev = t;
        v_prev = v;
    }
    return zeros;
}

}  // namespace detail

// Integral over [0, 2pi) of numerator(psi) * (linear_form(psi) - i eps)^(-power), extrapolated
// to eps -> 0 by a polynomial in eps. `eps_scale` multiplies every eps of the schedule.
template <typename Num, typename Lin>
PairingResult regularized_i0_pairing(Num&& numerator, Lin&& linear_form, int power, const EpsilonSchedule& sched,
                                     const QuadratureConfig& cfg, double eps_scale = 1.0) {
    sched.validate();
    cfg.validate();
    if (power < 1) throw Error(ErrorCode::InvalidArgument, "pairing power must be a positive integer");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    constexpr int samples = 720;

    // Start the window where |L| is largest so zeros fall strictly inside.
    double start = 0.0, best = -1.0, nmax = 0.0;
    for (int j = 0; j < samples; ++j) {
        const double t = two_pi * j / samples;
        const double v = std::abs(linear_form(t));
        nmax = std::max(nmax, std::abs(cplx(numerator(t))));
        if (v > best) {
            best = v;
            start = t;
        }
    }
    const std::vector<double> zeros = detail::periodic_zeros(linear_form, start, samples);

    PairingResult out;
    out.eps = sched.values();
    for (double& e : out.eps) e *= eps_scale;
    for (double e : out.eps) {
        auto integrand = [&](double t) -> cplx {
            const cplx d = cplx(linear_form(t), -e);
            cplx denom = d;
            for (int k = 1; k < power; ++k) denom *= d;
            return cplx(numerator(t)) / denom;
        };
        out.sweep.push_back(integrate_1d(integrand, start, start + two_pi, zeros, cfg).value);
    }

    const std::size_t n = out.eps.size();
    const std::size_t w = static_cast<std::size_t>(sched.extrapolation_order) + 1;
    std::span<const double> xs(out.eps);
    std::span<const cplx> ys(out.sweep);
    const cplx last = neville_at_zero(xs.subspan(n - w), ys.subspan(n - w));
    const cplx prev = neville_at_zero(xs.subspan(n - w - 1, w), ys.subspan(n - w - 1, w));
    out.value = last;
    out.error = std::abs(last - prev);
    const double threshold = sched.stability_tol * std::max(std::abs(last), nmax) + 100.0 * cfg.abs_tol;
    if (out.error > threshold)
        throw Error(ErrorCode::NonConvergence, "epsilon extrapolation did not stabilize",
                    "spread " + std::to_string(out.error) + " above threshold " + std::to_string(threshold));
    return out;
}

// ---- deterministic parallel loop ---------------------------------------------

// Worker count, capped by MAGSCATTER_THREADS when set.
inline unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MAGSCATTER_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

// Runs fn(i) for i in [0, n) on contiguous blocks; rethrows the exception of the lowest failing index.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    const std::size_t block = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * block, hi = std::min(n, lo + block);
        pool.emplace_back([&, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace magscatter
