#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "magscatter/magscatter.hpp"

namespace magscatter::cli {

using Json = nlohmann::ordered_json;

enum class Format { jsonl, csv };

// Usage problems found after CLI11 has accepted the arguments.
struct UsageError : std::runtime_error {
    std::string flag;
    UsageError(const std::string& message, std::string f) : std::runtime_error(message), flag(std::move(f)) {}
};

// ---- output -----------------------------------------------------------------

inline std::string number_text(double v) { return std::isfinite(v) ? format_number(v) : "null"; }

// Compact JSON with every floating-point number printed to 17 significant digits.
inline void write_json(std::ostream& os, const Json& j) {
    switch (j.type()) {
        case Json::value_t::object: {
            os << '{';
            bool first = true;
            for (const auto& [k, v] : j.items()) {
                if (!first) os << ',';
                first = false;
                os << Json(k).dump() << ':';
                write_json(os, v);
            }
            os << '}';
            break;
        }
        case Json::value_t::array: {
            os << '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) os << ',';
                write_json(os, j[i]);
            }
            os << ']';
            break;
        }
        case Json::value_t::number_float: os << number_text(j.get<double>()); break;
        default: os << j.dump();
    }
}

inline std::string json_text(const Json& j) {
    std::ostringstream os;
    write_json(os, j);
    return os.str();
}

inline std::string csv_field(const Json& v) {
    if (v.is_number_float()) return number_text(v.get<double>());
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }
    return v.dump();
}

// Flat record: array values become name_1, name_2, ...
inline std::vector<std::pair<std::string, Json>> flatten(const Json& rec) {
    std::vector<std::pair<std::string, Json>> out;
    for (const auto& [k, v] : rec.items()) {
        if (v.is_array()) {
            for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(k + "_" + std::to_string(i + 1), v[i]);
        } else {
            out.emplace_back(k, v);
        }
    }
    return out;
}

inline void write_records(std::ostream& os, const std::vector<Json>& records, Format format) {
    if (format == Format::jsonl) {
        for (const auto& r : records) os << json_text(r) << '\n';
        return;
    }
    if (records.empty()) return;
    const auto head = flatten(records.front());
    for (std::size_t i = 0; i < head.size(); ++i) os << (i ? "," : "") << head[i].first;
    os << '\n';
    for (const auto& r : records) {
        const auto row = flatten(r);
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i].second);
        os << '\n';
    }
}

inline Json error_json(std::string_view code, const std::string& message, const std::string& context) {
    Json j;
    j["code"] = code;
    j["message"] = message;
    j["context"] = context;
    return j;
}

inline Json arcs_json(const SpectralSet& s) {
    Json j;
    if (s.full_circle()) {
        j["full_circle"] = true;
        return j;
    }
    j["arcs"] = Json::array();
    for (const auto& a : s.arcs()) j["arcs"].push_back(Json::array({a.start, a.end}));
    return j;
}

inline Json vec_json(const Vec3& v) { return Json::array({v[0], v[1], v[2]}); }

// ---- options ------------------------------------------------------------------

struct FieldOptions {
    std::string family;
    std::vector<std::string> params;
    std::string config;
    bool dump_spec = false;
};

struct CommonOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    std::string output;
    std::string format;
};

inline FieldSpec load_field(const FieldOptions& o) {
    // An explicit config file takes precedence over --field/--param.
    if (!o.config.empty()) return load_field_config(o.config);
    if (o.family.empty()) throw UsageError("a field is required: pass --field or --config", "--field");
    ParamMap params;
    for (const auto& p : o.params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--param expects name=value[,value...]", p);
        const std::string name = p.substr(0, eq);
        params[name] = detail::parse_list(p.substr(eq + 1), "param." + name);
    }
    return FieldSpec::make(parse_family(o.family), params);
}

inline QuadratureConfig quadrature(const CommonOptions& c) {
    QuadratureConfig cfg;
    cfg.abs_tol = c.abs_tol;
    cfg.rel_tol = c.rel_tol;
    cfg.validate();
    return cfg;
}

inline Format pick_format(const CommonOptions& c, Format fallback, bool csv_allowed, const std::string& command) {
    if (c.format.empty()) return fallback;
    if (c.format == "jsonl") return Format::jsonl;
    if (!csv_allowed) throw UsageError("csv output is not available for " + command, "--format");
    return Format::csv;
}

inline void add_field_options(CLI::App* sub, FieldOptions& f) {
    sub->add_option("--field", f.family, "field family");
    sub->add_option("--param", f.params, "family parameter name=value[,value...] (repeatable)");
    sub->add_option("--config", f.config, "field config file; overrides --field and --param")->check(CLI::ExistingFile);
    sub->add_flag("--dump-spec", f.dump_spec, "print the parsed field spec and exit");
}

inline void add_common_options(CLI::App* sub, CommonOptions& c, bool with_format) {
    sub->add_option("--abs-tol", c.abs_tol, "absolute quadrature tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--rel-tol", c.rel_tol, "relative quadrature tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--output", c.output, "write results to this file instead of stdout");
    if (with_format) sub->add_option("--format", c.format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
}

// ---- commands ------------------------------------------------------------------

inline std::vector<Vec3> parse_points(const std::vector<std::string>& texts, int dim) {
    std::vector<Vec3> pts;
    for (const auto& t : texts) {
        std::vector<double> v;
        try {
            v = detail::parse_list(t, "--point");
        } catch (const Error&) {
            throw UsageError("malformed --point '" + t + "'", t);
        }
        if (static_cast<int>(v.size()) != dim)
            throw UsageError("--point needs " + std::to_string(dim) + " coordinates", t);
        pts.push_back({v[0], v[1], dim == 3 ? v[2] : 0.0});
    }
    return pts;
}

inline std::vector<Vec3> grid_points(int n, double extent, int dim) {
    std::vector<Vec3> pts;
    auto coord = [&](int i) { return n == 1 ? 0.0 : -extent + 2.0 * extent * i / (n - 1); };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (dim == 2) {
                pts.push_back({coord(i), coord(j), 0.0});
                continue;
            }
            for (int k = 0; k < n; ++k) pts.push_back({coord(i), coord(j), coord(k)});
        }
    return pts;
}

struct PotentialOptions {
    std::vector<std::string> points;
    int grid = 5;
    double extent = 2.0;
    std::string gauge = "transversal";
};

inline std::vector<Json> potential_records(const FieldSpec& spec, const PotentialOptions& o, const QuadratureConfig& cfg) {
    const int dim = spec.dimension();
    const auto pts = o.points.empty() ? grid_points(o.grid, o.extent, dim) : parse_points(o.points, dim);
    std::vector<Json> out;
    if (dim == 2) {
        if (o.gauge != "transversal")
            throw Error(ErrorCode::InvalidArgument, "only the transversal gauge is available in 2D", o.gauge);
        for (const auto& p : pts) {
            const Vec2 x{p[0], p[1]};
            const Vec2 A = transversal_potential_2d(spec, x, cfg);
            Json r;
            r["x1"] = x[0];
            r["x2"] = x[1];
            r["A1"] = A[0];
            r["A2"] = A[1];
            r["gauge_tag"] = gauge_tag_name(GaugeTag::transversal);
            out.push_back(r);
        }
        return out;
    }
    std::optional<ShortRangePotential> sr;
    if (o.gauge == "short_range") sr.emplace(spec, default_cutoff(spec), cfg);
    for (const auto& x : pts) {
        const Vec3 A = sr ? (*sr)(x) : transversal_potential_3d(spec, x, cfg);
        Json r;
        r["x1"] = x[0];
        r["x2"] = x[1];
        r["x3"] = x[2];
        r["A1"] = A[0];
        r["A2"] = A[1];
        r["A3"] = A[2];
        r["gauge_tag"] = gauge_tag_name(sr ? GaugeTag::short_range_3d : GaugeTag::transversal);
        out.push_back(r);
    }
    return out;
}

inline std::vector<Json> circulation_records(const FieldSpec& spec, int count, const QuadratureConfig& cfg) {
    const auto d = decompose_potential<2>(spec, cfg);
    std::vector<Json> out;
    for (int k = 0; k < count; ++k) {
        const double t = 2.0 * std::numbers::pi * k / count;
        const Vec2 w = unit_from_angle(t);
        const double f = half_plane_flux_f(spec, w, cfg);
        const double I = line_circulation_I<2>(d.a_inf, w, rotate_perp(w).first, cfg);
        Json r;
        r["omega_angle"] = t;
        r["f"] = f;
        r["I_plus"] = I;
        r["defect"] = I - f;
        out.push_back(r);
    }
    return out;
}

inline Json amplitude2d_summary(const SingularAmplitude2D& s) {
    Json j;
    j["flux"] = s.flux;
    j["delta_coeff"] = s.delta_coeff;
    j["pv_coeff"] = s.pv_coeff;
    j["remainder_exponent"] = s.remainder_exponent;
    return j;
}

inline std::vector<Json> amplitude2d_records(const SingularAmplitude2D& s, int count) {
    std::vector<Json> out;
    for (int i = 0; i < count; ++i)
        for (int j = 0; j < count; ++j) {
            if (i == j || 2 * std::abs(i - j) == count) continue;  // diagonal and antipodal pairs
            const double a = 2.0 * std::numbers::pi * i / count, b = 2.0 * std::numbers::pi * j / count;
            const cplx k = s.kernel(unit_from_angle(a), unit_from_angle(b));
            Json r;
            r["omega"] = a;
            r["omega_p"] = b;
            r["re"] = k.real();
            r["im"] = k.imag();
            out.push_back(r);
        }
    return out;
}

struct Amplitude3DOptions {
    int omega_count = 4;
    int tau_count = 4;
    double tau_scale = 0.3;
};

inline std::vector<Json> amplitude3d_records(const FieldSpec& spec, const Amplitude3DOptions& o, const QuadratureConfig& cfg) {
    const auto d = decompose_potential<3>(spec, cfg);
    std::vector<Json> out;
    for (const Vec3& w : fibonacci_sphere(static_cast<std::size_t>(o.omega_count))) {
        const auto sym = CircleSymbol::build(d.a_inf, w, cfg);
        for (int k = 0; k < o.tau_count; ++k) {
            const double t = 2.0 * std::numbers::pi * k / o.tau_count;
            const Vec3 wp = normalized(w + o.tau_scale * (std::cos(t) * sym.u() + std::sin(t) * sym.v()));
            const cplx q = sym.q(wp - w, {}, cfg);
            Json r;
            r["omega"] = vec_json(w);
            r["omega_p"] = vec_json(wp);
            r["re"] = q.real();
            r["im"] = q.imag();
            out.push_back(r);
        }
    }
    return out;
}

struct CrossSectionOptions {
    double lambda = 1.0;
    int count = 16;
    double min_sep = 0.01;
    double max_sep = 3.0;
    double omega = 0.0;
};

inline std::vector<Json> crosssection_records(const SingularAmplitude2D& s, const CrossSectionOptions& o) {
    std::vector<Json> out;
    for (int k = 0; k < o.count; ++k) {
        const double sep = o.count == 1 ? o.min_sep : o.min_sep + (o.max_sep - o.min_sep) * k / (o.count - 1);
        const cplx v = s.kernel(unit_from_angle(o.omega), unit_from_angle(o.omega + sep));
        Json r;
        r["angle_sep"] = sep;
        r["sigma"] = cross_section(v, o.lambda, 2);
        out.push_back(r);
    }
    return out;
}

struct SolenoidOptions {
    double l = 2.0;
    double r = 1.0;
    double alpha = 1.0;
    int table_size = 9;
};

inline Json solenoid_report(const SolenoidOptions& o, const QuadratureConfig& cfg) {
    if (!(o.r > 0.0 && o.l > o.r)) throw Error(ErrorCode::InvalidSpec, "solenoid disc needs l > r > 0");
    if (o.table_size < 2) throw UsageError("--table-size must be at least 2", "--table-size");
    const auto geom = SolenoidGeometry::disc(o.l, o.r, o.alpha);
    Json j;
    j["l"] = o.l;
    j["r"] = o.r;
    j["alpha"] = o.alpha;
    j["z1"] = geom.z1;
    j["z2"] = geom.z2;
    Json kappa = Json::array(), g = Json::array();
    for (int i = 0; i < o.table_size; ++i) {
        const double z = geom.z1 + (geom.z2 - geom.z1) * i / (o.table_size - 1);
        const auto [km, kp] = torus_kappa(z, geom.shape);
        kappa.push_back(Json{{"z", z}, {"kappa_minus", km}, {"kappa_plus", kp}});
        g.push_back(Json{{"z", z}, {"g", torus_g(z, geom)}});
    }
    j["kappa"] = kappa;
    j["g"] = g;
    const auto flux = torus_flux_section(geom, cfg);
    j["U0"] = -flux.minus_U0;
    j["Phi_s_quadrature"] = flux.quadrature;
    j["Phi_s_minus_U0_defect"] = flux.defect;
    j["Phi_s_orientation"] = "flux of B through {x2 = 0, x1 > 0} along +e2, so that Phi_s = -U0";
    j["spectrum"] = arcs_json(spectrum_from_section_flux(flux.quadrature));
    return j;
}

inline std::vector<Json> verify_records(const std::vector<InvariantResult>& results) {
    std::vector<Json> out;
    for (const auto& r : results) {
        Json j;
        j["suite"] = r.suite;
        j["name"] = r.name;
        j["measured"] = r.measured;
        j["threshold"] = r.threshold;
        j["pass"] = r.pass;
        out.push_back(j);
    }
    return out;
}

// ---- entry point ---------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Magnetic scattering: potentials, circulation integrals, singular amplitudes and spectra",
                 "magscatter"};
    app.require_subcommand(1);

    FieldOptions field;
    CommonOptions common;
    PotentialOptions pot;
    Amplitude3DOptions amp3;
    CrossSectionOptions xs;
    SolenoidOptions sol;
    int omega_count = 16;
    int samples = 64;
    int grid = 16;
    bool summary = false;
    std::string suite = "all";

    auto* flux = app.add_subcommand("flux", "total flux of a 2D field");
    auto* potential = app.add_subcommand("potential", "sampled vector potential as CSV rows");
    auto* circulation = app.add_subcommand("circulation", "half-plane flux and line circulation per direction");
    auto* amplitude2d = app.add_subcommand("amplitude2d", "2D singular amplitude kernel");
    auto* amplitude3d = app.add_subcommand("amplitude3d", "3D singular amplitude kernel");
    auto* spectrum = app.add_subcommand("spectrum", "essential spectrum of the scattering matrix");
    auto* crosssection = app.add_subcommand("crosssection", "cross section of the 2D singular amplitude");
    auto* solenoid = app.add_subcommand("solenoid", "toroidal solenoid report for a disc section");
    auto* verify_cmd = app.add_subcommand("verify", "run invariant checks");

    for (auto* sub : {flux, potential, circulation, amplitude2d, amplitude3d, spectrum, crosssection}) {
        add_field_options(sub, field);
        add_common_options(sub, common, true);
    }
    add_common_options(solenoid, common, true);
    verify_cmd->add_option("--output", common.output, "write results to this file instead of stdout");
    verify_cmd->add_option("--format", common.format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));

    potential->add_option("--point", pot.points, "evaluation point x1,x2[,x3] (repeatable)");
    potential->add_option("--grid", pot.grid, "points per axis when no --point is given")->check(CLI::PositiveNumber);
    potential->add_option("--extent", pot.extent, "grid half-width")->check(CLI::PositiveNumber);
    potential->add_option("--gauge", pot.gauge, "transversal or short_range")->check(CLI::IsMember({"transversal", "short_range"}));
    circulation->add_option("--omega-count", omega_count, "number of equispaced directions")->check(CLI::PositiveNumber);
    amplitude2d->add_option("--omega-count", omega_count, "number of equispaced directions")->check(CLI::Range(3, 100000));
    amplitude2d->add_flag("--summary", summary, "print flux and kernel coefficients instead of kernel values");
    amplitude3d->add_option("--omega-count", amp3.omega_count, "number of directions omega")->check(CLI::PositiveNumber);
    amplitude3d->add_option("--tau-count", amp3.tau_count, "tangent directions per omega")->check(CLI::PositiveNumber);
    amplitude3d->add_option("--tau-scale", amp3.tau_scale, "length of the tangent step")->check(CLI::PositiveNumber);
    spectrum->add_option("--samples", samples, "directions sampled for a 2D field")->check(CLI::Range(3, 1000000));
    spectrum->add_option("--grid", grid, "sphere and circle grid size for a 3D field")->check(CLI::PositiveNumber);
    crosssection->add_option("--lambda", xs.lambda, "energy")->check(CLI::PositiveNumber);
    crosssection->add_option("--count", xs.count, "number of angle separations")->check(CLI::PositiveNumber);
    crosssection->add_option("--min-sep", xs.min_sep, "smallest angle separation")->check(CLI::PositiveNumber);
    crosssection->add_option("--max-sep", xs.max_sep, "largest angle separation")->check(CLI::PositiveNumber);
    crosssection->add_option("--omega", xs.omega, "incoming direction angle");
    solenoid->add_option("--l", sol.l, "distance of the disc center from the axis");
    solenoid->add_option("--r", sol.r, "disc radius");
    solenoid->add_option("--alpha", sol.alpha, "field strength");
    solenoid->add_option("--table-size", sol.table_size, "rows in the kappa and g tables");
    verify_cmd->add_option("--suite", suite, "gauge, circulation, amplitude, solenoid or all")
        ->check(CLI::IsMember({"gauge", "circulation", "amplitude", "solenoid", "all"}));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::string context;
        for (const auto& a : args)
            if (e.what() && std::string(e.what()).find(a) != std::string::npos && a.rfind("-", 0) == 0) context = a;
        err << json_text(error_json("UsageError", e.what(), context)) << '\n';
        return 2;
    }

    std::ostringstream body;
    int code = 0;
    try {
        CLI::App* cmd = app.get_subcommands().front();
        const std::string name = cmd->get_name();
        const auto cfg = quadrature(common);
        std::optional<FieldSpec> spec;
        if (name != "solenoid" && name != "verify") {
            spec = load_field(field);
            if (field.dump_spec) {
                out << dump_field_config(*spec);
                return 0;
            }
        }
        if (name == "flux") {
            const auto f = total_flux_2d(*spec, cfg);
            Json j;
            j["flux"] = f.value;
            j["error"] = f.error;
            write_records(body, {j}, pick_format(common, Format::jsonl, true, name));
        } else if (name == "potential") {
            write_records(body, potential_records(*spec, pot, cfg), pick_format(common, Format::csv, true, name));
        } else if (name == "circulation") {
            write_records(body, circulation_records(*spec, omega_count, cfg), pick_format(common, Format::csv, true, name));
        } else if (name == "amplitude2d") {
            const auto s = singular_amplitude_2d(*spec, cfg);
            const Format f = pick_format(common, Format::jsonl, true, name);
            if (summary) write_records(body, {amplitude2d_summary(s)}, f);
            else write_records(body, amplitude2d_records(s, omega_count), f);
        } else if (name == "amplitude3d") {
            write_records(body, amplitude3d_records(*spec, amp3, cfg), pick_format(common, Format::jsonl, true, name));
        } else if (name == "spectrum") {
            pick_format(common, Format::jsonl, false, name);
            const SpectralSet s = spec->dimension() == 2
                                      ? essential_spectrum_2d(*spec, samples, cfg).set
                                      : essential_spectrum_3d(decompose_potential<3>(*spec, cfg).a_inf,
                                                              static_cast<std::size_t>(grid), cfg);
            body << json_text(arcs_json(s)) << '\n';
        } else if (name == "crosssection") {
            if (!(xs.max_sep >= xs.min_sep && xs.max_sep < std::numbers::pi))
                throw UsageError("angle separations must satisfy 0 < min-sep <= max-sep < pi", "--max-sep");
            write_records(body, crosssection_records(singular_amplitude_2d(*spec, cfg), xs),
                          pick_format(common, Format::csv, true, name));
        } else if (name == "solenoid") {
            pick_format(common, Format::jsonl, false, name);
            body << json_text(solenoid_report(sol, cfg)) << '\n';
        } else if (name == "verify") {
            const auto results = verify(suite);
            write_records(body, verify_records(results), pick_format(common, Format::jsonl, true, name));
            std::string failed;
            for (const auto& r : results)
                if (!r.pass) failed += (failed.empty() ? "" : "; ") + r.suite + ": " + r.name;
            if (!failed.empty()) {
                err << json_text(error_json("VerificationFailed", "invariant checks failed", failed)) << '\n';
                code = 1;
            }
        }
    } catch (const UsageError& e) {
        err << json_text(error_json("UsageError", e.what(), e.flag)) << '\n';
        return 2;
    } catch (const Error& e) {
        err << json_text(error_json(error_code_name(e.code()), e.what(), e.context())) << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << json_text(error_json("InternalError", e.what(), "")) << '\n';
        return 1;
    }

    if (common.output.empty()) {
        out << body.str();
    } else {
        std::ofstream file(common.output, std::ios::binary);
        if (!file) {
            err << json_text(error_json("InvalidArgument", "cannot open output file", common.output)) << '\n';
            return 1;
        }
        file << body.str();
    }
    return code;
}

}  // namespace magscatter::cli
