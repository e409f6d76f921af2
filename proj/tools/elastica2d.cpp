// elastica2d — command line driver for the planar elasticity toolkit.
//
// Subcommands: weierstrass | solve | annulus | meshgen | verify, each fed by
// a single JSON config (unknown keys rejected) plus a few override flags.
// Exit codes: 0 success, 1 usage/config error, 2 numerical identity failure
// (module errors and failed in-process cross-checks).

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>

#include "elastica2d/annulus.hpp"
#include "elastica2d/meshgen.hpp"
#include "elastica2d/solver.hpp"
#include "elastica2d/svg.hpp"
#include "elastica2d/weierstrass.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace elastica;

namespace {

// ---------------------------------------------------------------- config ---

[[noreturn]] void config_fail(const std::string& msg) {
    throw std::invalid_argument(msg);
}

void require_keys(const json& obj, const std::string& ctx,
                  std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) config_fail(ctx + " must be a JSON object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known) config_fail("unknown key '" + item.key() + "' in " + ctx);
    }
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double need_number(const json& obj, const std::string& ctx, const char* key) {
    const json* j = find(obj, key);
    if (!j || !j->is_number()) config_fail(ctx + " needs a numeric '" + key + "'");
    return j->get<double>();
}

double opt_number(const json& obj, const std::string& ctx, const char* key, double dflt) {
    return find(obj, key) ? need_number(obj, ctx, key) : dflt;
}

long long need_int(const json& obj, const std::string& ctx, const char* key) {
    const json* j = find(obj, key);
    if (!j || !j->is_number_integer()) config_fail(ctx + " needs an integer '" + key + "'");
    return j->get<long long>();
}

long long opt_int(const json& obj, const std::string& ctx, const char* key, long long dflt) {
    return find(obj, key) ? need_int(obj, ctx, key) : dflt;
}

std::string need_string(const json& obj, const std::string& ctx, const char* key) {
    const json* j = find(obj, key);
    if (!j || !j->is_string()) config_fail(ctx + " needs a string '" + key + "'");
    return j->get<std::string>();
}

Complex parse_complex(const json& j, const std::string& ctx) {
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return Complex(j[0].get<double>(), j[1].get<double>());
    config_fail(ctx + " must be a number or [re, im] pair");
}

Complex opt_complex(const json& obj, const std::string& ctx, const char* key, Complex dflt) {
    const json* j = find(obj, key);
    return j ? parse_complex(*j, ctx + "." + key) : dflt;
}

AnalyticExpr parse_terms(const json& arr, const std::string& ctx) {
    if (!arr.is_array() || arr.empty()) config_fail(ctx + " must be a nonempty array of terms");
    std::vector<Term> terms;
    for (size_t i = 0; i < arr.size(); ++i) {
        const std::string tctx = ctx + "[" + std::to_string(i) + "]";
        const json& t = arr[i];
        require_keys(t, tctx, {"coeff", "power", "center", "rate"});
        const json* jc = find(t, "coeff");
        if (!jc) config_fail(tctx + " needs 'coeff'");
        const Complex coeff = parse_complex(*jc, tctx + ".coeff");
        const bool has_power = find(t, "power") != nullptr;
        const bool has_rate = find(t, "rate") != nullptr;
        if (has_power == has_rate)
            config_fail(tctx + " needs exactly one of 'power' or 'rate'");
        if (has_power) {
            const long long p = need_int(t, tctx, "power");
            if (p < -64 || p > 64) config_fail(tctx + ".power out of range");
            terms.push_back(Monomial{coeff, opt_complex(t, tctx, "center", Complex(0, 0)),
                                     (int)p});
        } else {
            if (find(t, "center")) config_fail(tctx + ": 'center' is only for monomials");
            terms.push_back(ExpTerm{coeff, parse_complex(*find(t, "rate"), tctx + ".rate")});
        }
    }
    return AnalyticExpr(std::move(terms));
}

std::vector<ZeroSpec> parse_zeros(const json& arr, const std::string& ctx) {
    if (!arr.is_array()) config_fail(ctx + " must be an array");
    std::vector<ZeroSpec> zeros;
    for (size_t i = 0; i < arr.size(); ++i) {
        const std::string zctx = ctx + "[" + std::to_string(i) + "]";
        require_keys(arr[i], zctx, {"p", "order"});
        const json* jp = find(arr[i], "p");
        if (!jp) config_fail(zctx + " needs 'p'");
        const long long order = opt_int(arr[i], zctx, "order", 1);
        if (order < 1 || order > 16) config_fail(zctx + ".order must be in [1, 16]");
        zeros.push_back({parse_complex(*jp, zctx + ".p"), (int)order});
    }
    return zeros;
}

WeierstrassDatum parse_datum(const json& obj, const std::string& ctx) {
    WeierstrassDatum datum;
    datum.lambda = need_number(obj, ctx, "lambda");
    const json* jh = find(obj, "h");
    if (!jh) config_fail(ctx + " needs 'h'");
    datum.h = parse_terms(*jh, ctx + ".h");
    if (const json* jz = find(obj, "zeros")) datum.zeros = parse_zeros(*jz, ctx + ".zeros");
    return datum;
}

json load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) config_fail("cannot open config file: " + path.string());
    return json::parse(in);
}

// ---------------------------------------------------------------- output ---

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

struct Uniform {
    std::mt19937_64 gen;
    explicit Uniform(uint64_t seed) : gen(seed) {}
    double operator()() { return (double)(gen() >> 11) * 0x1.0p-53; }
};

// stability factor s = 1 + V'(|fz|^2) for the lambda potential
double stability_s(double lambda, Complex fz) {
    const double e2 = kFzRegularization * kFzRegularization;
    return 1.0 + lambda * (1.0 - 1.0 / std::sqrt(std::norm(fz) + e2));
}

std::vector<ClassedCurve> split_by_class(const std::vector<Complex>& pts,
                                         const std::vector<TriStability>& cls) {
    std::vector<ClassedCurve> out;
    if (pts.size() < 2) return out;
    size_t start = 0;
    for (size_t k = 1; k < pts.size(); ++k) {
        if (cls[k] != cls[start]) {
            out.push_back({std::vector<Complex>(pts.begin() + (long)start,
                                                pts.begin() + (long)k + 1),
                           cls[start]});
            start = k;
        }
    }
    if (start + 1 < pts.size())
        out.push_back({std::vector<Complex>(pts.begin() + (long)start, pts.end()), cls[start]});
    return out;
}

// -------------------------------------------------------------- weierstrass

int cmd_weierstrass(const json& cfg, const fs::path& out_dir,
                    std::optional<double> lambda_override) {
    require_keys(cfg, "config", {"lambda", "h", "zeros", "grid"});
    json datum_cfg = cfg;
    datum_cfg.erase("grid");
    if (lambda_override) datum_cfg["lambda"] = *lambda_override;
    const WeierstrassDatum datum = parse_datum(datum_cfg, "config");

    const json* jgrid = find(cfg, "grid");
    if (!jgrid) config_fail("config needs 'grid'");
    require_keys(*jgrid, "grid", {"radius", "n"});
    const double radius = need_number(*jgrid, "grid", "radius");
    const long long n = opt_int(*jgrid, "grid", "n", 41);
    if (!(radius > 0.0)) config_fail("grid.radius must be positive");
    if (n < 2 || n > 512) config_fail("grid.n must be in [2, 512]");

    const MeromorphicK k = compensating_k(datum);
    const ElasticMapAnalytic map = build_elastic_map(datum, k);
    const double lambda = datum.lambda;
    const double mu = lambda_ratio(lambda);

    std::string ktxt;
    ktxt += "h(z) = " + to_string(datum.h) + "\n";
    ktxt += fmt("lambda = %.12g\n", lambda);
    ktxt += fmt("mu = lambda/(1+lambda) = %.12g\n", mu);
    ktxt += "k(z) = " + (k.k.empty() ? std::string("0") : to_string(k.k)) + "\n";
    for (const Complex& p : k.pole_centers)
        ktxt += "pole at " + format_complex(p) + "\n";
    write_file(out_dir / "k.txt", ktxt);

    std::vector<double> xs(static_cast<size_t>(n));
    for (long long i = 0; i < n; ++i)
        xs[(size_t)i] = -radius + 2.0 * radius * (double)i / (double)(n - 1);
    const auto in_disk = [&](Complex z) { return std::abs(z) <= radius + 1e-12; };

    std::string csv = "re z,im z,re f,im f,|fz|,|fzbar|,re g,im g,stability s\n";
    long long rows = 0;
    auto sample_row = [&](Complex z) {
        const DerivSample d = map.deriv(z);
        const Complex fv = map.f(z);
        const double m = std::abs(d.fz);
        const double s = stability_s(lambda, d.fz);
        const Complex hv = eval(datum.h, z);
        Complex g;
        if (!d.branch_point && m >= kBranchFzTol) {
            g = (1.0 + lambda) * d.fz - lambda * d.fz / m;
            const Complex g_expected = 0.5 * (1.0 + lambda) * hv * hv;
            if (std::abs(g - g_expected) / (1.0 + std::abs(g)) > 1e-9)
                throw Error(fmt("cross-check failed: holomorphic data identity at z = %s "
                                "(|g - (1+lambda)/2 h^2| = %.3g)",
                                format_complex(z).c_str(), std::abs(g - g_expected)));
            const double m_law = 0.5 * (std::norm(hv) + 2.0 * mu);
            if (std::abs(m - m_law) > 1e-10)
                throw Error(fmt("cross-check failed: modulus law at z = %s (err = %.3g)",
                                format_complex(z).c_str(), std::abs(m - m_law)));
        } else {
            g = 0.5 * (1.0 + lambda) * hv * hv; // limit value at a branch point
        }
        csv += fmt("%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", z.real(),
                   z.imag(), fv.real(), fv.imag(), m, std::abs(d.fzbar), g.real(), g.imag(),
                   s);
        ++rows;
    };
    for (long long iy = 0; iy < n; ++iy)
        for (long long ix = 0; ix < n; ++ix) {
            const Complex z(xs[(size_t)ix], xs[(size_t)iy]);
            if (in_disk(z)) sample_row(z);
        }
    if (rows == 0) config_fail("sampling grid is empty");
    write_file(out_dir / "samples.csv", csv);

    std::vector<std::vector<Complex>> ref_curves;
    std::vector<ClassedCurve> img_curves;
    auto add_line = [&](bool row, long long idx) {
        std::vector<Complex> ref;
        std::vector<Complex> img;
        std::vector<TriStability> cls;
        auto flush = [&]() {
            if (ref.size() >= 2) {
                ref_curves.push_back(ref);
                for (auto& piece : split_by_class(img, cls)) img_curves.push_back(piece);
            }
            ref.clear();
            img.clear();
            cls.clear();
        };
        for (long long j = 0; j < n; ++j) {
            const Complex z = row ? Complex(xs[(size_t)j], xs[(size_t)idx])
                                  : Complex(xs[(size_t)idx], xs[(size_t)j]);
            if (!in_disk(z)) {
                flush();
                continue;
            }
            ref.push_back(z);
            img.push_back(map.f(z));
            cls.push_back(classify_stability(stability_s(lambda, map.deriv(z).fz), 1e-4));
        }
        flush();
    };
    for (long long i = 0; i < n; ++i) {
        add_line(true, i);
        add_line(false, i);
    }
    std::vector<Complex> branch_pts;
    for (const ZeroSpec& zs : datum.zeros) branch_pts.push_back(map.f(zs.p));
    write_file(out_dir / "figure.svg", render_map_figure(ref_curves, img_curves, branch_pts));

    std::printf("weierstrass: %lld samples, %zu poles, lambda = %.12g\n", rows,
                k.pole_centers.size(), lambda);
    return 0;
}

// -------------------------------------------------------------------- solve

struct PinTarget {
    std::function<Complex(Complex)> f;
    bool analytic = false;
};

PinTarget parse_target(const json& obj, const std::string& ctx) {
    require_keys(obj, ctx, {"type", "a", "b", "c", "lambda", "h", "zeros"});
    const std::string type = need_string(obj, ctx, "type");
    if (type == "identity") {
        return {[](Complex z) { return z; }, false};
    }
    if (type == "affine") {
        const Complex a = opt_complex(obj, ctx, "a", Complex(1, 0));
        const Complex b = opt_complex(obj, ctx, "b", Complex(0, 0));
        const Complex c = opt_complex(obj, ctx, "c", Complex(0, 0));
        return {[a, b, c](Complex z) { return a * z + b * std::conj(z) + c; }, false};
    }
    if (type == "weierstrass") {
        const WeierstrassDatum datum = parse_datum(obj, ctx);
        auto map = std::make_shared<ElasticMapAnalytic>(
            build_elastic_map(datum, compensating_k(datum)));
        return PinTarget{[map](Complex z) { return map->f(z); }, true};
    }
    config_fail(ctx + ".type must be identity | affine | weierstrass");
}

std::vector<int> parse_select(const json& obj, const std::string& ctx,
                              const TriangleMesh& mesh) {
    require_keys(obj, ctx, {"indices", "halfplane", "boundary"});
    const int given = (find(obj, "indices") != nullptr) + (find(obj, "halfplane") != nullptr) +
                      (find(obj, "boundary") != nullptr);
    if (given != 1)
        config_fail(ctx + " needs exactly one of 'indices', 'halfplane', 'boundary'");
    std::vector<int> out;
    if (const json* ji = find(obj, "indices")) {
        if (!ji->is_array() || ji->empty()) config_fail(ctx + ".indices must be a nonempty array");
        for (const json& v : *ji) {
            if (!v.is_number_integer()) config_fail(ctx + ".indices must hold integers");
            const long long i = v.get<long long>();
            if (i < 0 || i >= (long long)mesh.vertices.size())
                config_fail(ctx + ".indices: vertex " + std::to_string(i) + " out of range");
            out.push_back((int)i);
        }
    } else if (const json* jh = find(obj, "halfplane")) {
        require_keys(*jh, ctx + ".halfplane", {"nx", "ny", "offset"});
        const double nx = need_number(*jh, ctx + ".halfplane", "nx");
        const double ny = need_number(*jh, ctx + ".halfplane", "ny");
        const double offset = need_number(*jh, ctx + ".halfplane", "offset");
        if (nx == 0.0 && ny == 0.0) config_fail(ctx + ".halfplane normal must be nonzero");
        for (size_t i = 0; i < mesh.vertices.size(); ++i)
            if (nx * mesh.vertices[i].real() + ny * mesh.vertices[i].imag() >=
                offset - 1e-12)
                out.push_back((int)i);
        if (out.empty()) config_fail(ctx + ".halfplane selects no vertices");
    } else {
        const json* jb = find(obj, "boundary");
        if (!jb->is_boolean() || !jb->get<bool>())
            config_fail(ctx + ".boundary must be true when present");
        out = mesh.boundary_vertices;
    }
    return out;
}

int cmd_solve(const json& cfg, const fs::path& out_dir, const fs::path& base_dir,
              std::optional<double> lambda_override, std::optional<int> refine_override,
              std::optional<uint64_t> seed_override) {
    require_keys(cfg, "config",
                 {"mesh", "lambda", "refine", "pins", "perturb", "init", "solver"});
    auto resolve = [&](const std::string& p) {
        const fs::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };
    TriangleMesh mesh = load_mesh(resolve(need_string(cfg, "config", "mesh")).string());
    const long long refine_n =
        refine_override ? *refine_override : opt_int(cfg, "config", "refine", 0);
    if (refine_n < 0 || refine_n > 8) config_fail("refine must be in [0, 8]");
    if (refine_n > 0) mesh = refine(mesh, (int)refine_n);

    const double lambda =
        lambda_override ? *lambda_override : need_number(cfg, "config", "lambda");
    const PotentialV V = PotentialV::Lambda(lambda);

    Constraints cons;
    std::optional<PinTarget> analytic_target;
    size_t pin_groups = 0;
    if (const json* jpins = find(cfg, "pins")) {
        if (!jpins->is_array()) config_fail("pins must be an array");
        pin_groups = jpins->size();
        for (size_t gi = 0; gi < jpins->size(); ++gi) {
            const std::string ctx = "pins[" + std::to_string(gi) + "]";
            require_keys((*jpins)[gi], ctx, {"select", "target"});
            const json* jsel = find((*jpins)[gi], "select");
            const json* jtar = find((*jpins)[gi], "target");
            if (!jsel || !jtar) config_fail(ctx + " needs 'select' and 'target'");
            const PinTarget target = parse_target(*jtar, ctx + ".target");
            if (target.analytic && pin_groups == 1) analytic_target = target;
            for (int i : parse_select(*jsel, ctx + ".select", mesh)) {
                if (cons.pinned.count(i))
                    config_fail(ctx + ": vertex " + std::to_string(i) + " pinned twice");
                cons.pinned[i] = target.f(mesh.vertices[(size_t)i]);
            }
        }
    }

    DeformedState init;
    if (const json* jinit = find(cfg, "init")) {
        if (jinit->is_string())
            init = load_state(resolve(jinit->get<std::string>()).string(),
                              mesh.vertices.size());
        else {
            require_keys(*jinit, "init", {"type"});
            const std::string type = need_string(*jinit, "init", "type");
            if (type == "identity")
                init = identity_state(mesh);
            else if (type == "affine-fit")
                init = affine_init(mesh, cons);
            else
                config_fail("init.type must be identity | affine-fit");
        }
    } else {
        init = cons.pinned.empty() ? identity_state(mesh) : affine_init(mesh, cons);
    }

    if (const json* jp = find(cfg, "perturb")) {
        require_keys(*jp, "perturb", {"seed", "amplitude"});
        if (!find(*jp, "seed") && !seed_override)
            config_fail("perturb needs a 'seed' (reproducibility)");
        const uint64_t seed =
            seed_override ? *seed_override : (uint64_t)need_int(*jp, "perturb", "seed");
        const double amplitude = need_number(*jp, "perturb", "amplitude");
        if (!(amplitude > 0.0)) config_fail("perturb.amplitude must be positive");
        Uniform u(seed);
        for (size_t i = 0; i < init.positions.size(); ++i) {
            const Complex d(2.0 * u() - 1.0, 2.0 * u() - 1.0);
            if (!cons.pinned.count((int)i)) init.positions[i] += amplitude * d;
        }
    }

    SolverConfig scfg;
    if (const json* js = find(cfg, "solver")) {
        require_keys(*js, "solver",
                     {"grad_tol", "max_iters", "history", "ls_shrink", "ls_slope",
                      "ramp_steps"});
        scfg.grad_tol = opt_number(*js, "solver", "grad_tol", scfg.grad_tol);
        scfg.max_iters = (int)opt_int(*js, "solver", "max_iters", scfg.max_iters);
        scfg.history = (int)opt_int(*js, "solver", "history", scfg.history);
        scfg.ls_shrink = opt_number(*js, "solver", "ls_shrink", scfg.ls_shrink);
        scfg.ls_slope = opt_number(*js, "solver", "ls_slope", scfg.ls_slope);
        scfg.ramp_steps = (int)opt_int(*js, "solver", "ramp_steps", scfg.ramp_steps);
        if (!(scfg.grad_tol > 0.0) || scfg.max_iters < 1 || scfg.history < 1 ||
            !(scfg.ls_shrink > 0.0 && scfg.ls_shrink < 1.0) ||
            !(scfg.ls_slope > 0.0 && scfg.ls_slope < 0.5) || scfg.ramp_steps < 1)
            config_fail("solver settings out of range");
    }

    DeformedState state;
    SolveReport report;
    json ramp_log = json::array();
    if (!cons.pinned.empty() && scfg.ramp_steps > 1) {
        auto path = ramp_solve(mesh, cons, V, scfg, &init);
        int iters_total = 0;
        for (size_t s = 0; s < path.size(); ++s) {
            iters_total += path[s].second.iters;
            ramp_log.push_back({{"step", s + 1},
                                {"converged", path[s].second.converged},
                                {"iters", path[s].second.iters},
                                {"final_energy", path[s].second.final_energy}});
        }
        state = std::move(path.back().first);
        report = std::move(path.back().second);
        report.iters = iters_total;
    } else {
        std::tie(state, report) = minimize(mesh, init, cons, V, scfg);
    }

    // in-process cross-checks
    for (const auto& [i, target] : cons.pinned)
        if (state.positions[(size_t)i] != target)
            throw Error("cross-check failed: pinned vertex " + std::to_string(i) +
                        " moved off its target");
    {
        const auto [lhs, rhs] = energy_area_identity(mesh, state, V);
        if (std::abs(lhs - rhs) > 1e-10 * (1.0 + std::abs(rhs)))
            throw Error(fmt("cross-check failed: energy-area identity (|lhs-rhs| = %.3g)",
                            std::abs(lhs - rhs)));
    }

    const RigidFit rigid = best_fit_rigid(mesh.vertices, state.positions);
    const bool rigid_motion = rigid.residual < 1e-6;

    std::optional<double> interior_deviation;
    if (analytic_target) {
        double worst = 0.0;
        for (size_t i = 0; i < mesh.vertices.size(); ++i)
            if (!cons.pinned.count((int)i))
                worst = std::max(worst, std::abs(state.positions[i] -
                                                 analytic_target->f(mesh.vertices[i])));
        interior_deviation = worst;
    }

    std::ostringstream state_text;
    write_state(state_text, state);
    write_file(out_dir / "state.txt", state_text.str());

    json rep;
    rep["command"] = "solve";
    rep["lambda"] = lambda;
    rep["vertices"] = mesh.vertices.size();
    rep["triangles"] = mesh.triangles.size();
    rep["pinned"] = cons.pinned.size();
    rep["converged"] = report.converged;
    rep["iters"] = report.iters;
    rep["final_energy"] = report.final_energy;
    rep["grad_norm"] = report.grad_norm;
    rep["stability"] = {{"stable", report.stability.stable_count},
                        {"melting", report.stability.melting_count},
                        {"unstable", report.stability.unstable_count}};
    rep["branch_triangles"] = report.branch_points;
    rep["rigid_motion"] = rigid_motion;
    rep["rigid_residual"] = rigid.residual;
    if (interior_deviation) rep["interior_deviation"] = *interior_deviation;
    if (!ramp_log.empty()) rep["ramp"] = ramp_log;
    rep["energy_trace"] = report.energy_trace;
    write_file(out_dir / "report.txt", rep.dump(2) + "\n");

    write_file(out_dir / "figure.svg", render_mesh_figure(mesh, state, report.stability));

    std::printf("solve: converged=%d iters=%d final_energy=%.12g grad_norm=%.12g "
                "rigid_motion=%d\n",
                (int)report.converged, report.iters, report.final_energy, report.grad_norm,
                (int)rigid_motion);
    if (interior_deviation)
        std::printf("solve: max interior deviation = %.12g\n", *interior_deviation);
    return report.converged ? 0 : 2;
}

// ------------------------------------------------------------------ annulus

int cmd_annulus(const json& cfg, const fs::path& out_dir,
                std::optional<double> lambda_override) {
    const std::string family =
        find(cfg, "family") ? need_string(cfg, "config", "family") : "annulus";
    const double lambda =
        lambda_override ? *lambda_override : need_number(cfg, "config", "lambda");
    const long long samples = opt_int(cfg, "config", "samples", 256);
    if (samples < 8 || samples > 100000) config_fail("samples must be in [8, 100000]");
    const long long rings = opt_int(cfg, "config", "rings", 6);
    const long long rays = opt_int(cfg, "config", "rays", 12);
    if (rings < 2 || rings > 64 || rays < 0 || rays > 256)
        config_fail("rings/rays out of range");

    std::string params;
    ElasticMapAnalytic map;
    std::vector<BoundaryCurve> walls;
    std::vector<std::string> wall_names;
    double ref_lo = 0.0, ref_hi = 0.0; // radial or x extent for the figure
    bool polar = true;

    if (family == "annulus") {
        require_keys(cfg, "config",
                     {"family", "lambda", "r1", "r2", "two_n", "n", "samples", "rings",
                      "rays"});
        const double r1 = need_number(cfg, "config", "r1");
        const double r2 = need_number(cfg, "config", "r2");
        int two_n = 0;
        if (find(cfg, "two_n") && find(cfg, "n"))
            config_fail("give either 'two_n' or 'n', not both");
        if (find(cfg, "two_n")) {
            two_n = (int)need_int(cfg, "config", "two_n");
        } else if (find(cfg, "n")) {
            const double nval = need_number(cfg, "config", "n");
            const double doubled = 2.0 * nval;
            if (std::abs(doubled - std::round(doubled)) > 1e-12)
                config_fail("n must be a half-integer (2n must be a natural number)");
            two_n = (int)std::lround(doubled);
        } else {
            config_fail("annulus family needs 'two_n' or 'n'");
        }
        const AnnulusFamily fam = solve_annulus_params(r1, r2, two_n, lambda);
        map = annulus_map(fam);
        const double hole = std::abs(map.f(Complex(r1, 0.0)));
        const double outer = std::abs(map.f(Complex(r2, 0.0)));

        params += "family = annulus\n";
        params += fmt("r1 = %.12g\nr2 = %.12g\n", r1, r2);
        params += fmt("two_n = %d\nn = %.12g\nlambda = %.12g\n", fam.two_n, fam.n(), lambda);
        params += fmt("c = %.12g\nc_squared = %.12g\nalpha = %.12g\n", fam.c, fam.c * fam.c,
                      fam.alpha);
        params += fmt("winding = %d\n", fam.two_n + 1);
        params += fmt("hole_radius = %.12g\nouter_radius = %.12g\n", hole, outer);

        // residual polynomial must vanish at both free boundaries
        for (double r : {r1, r2}) {
            const double res = annulus_residual(fam, r);
            if (std::abs(res) > 1e-10)
                throw Error(fmt("cross-check failed: annulus residual at r = %.6g is %.3g",
                                r, res));
        }
        const int winding =
            winding_number([&](double t) { return map.f(std::polar(r2, 2.0 * M_PI * t)); });
        if (winding != fam.two_n + 1)
            throw Error(fmt("cross-check failed: image winding %d, expected %d", winding,
                            fam.two_n + 1));

        walls = {circle_curve(Complex(0, 0), r1), circle_curve(Complex(0, 0), r2)};
        wall_names = {"inner", "outer"};
        ref_lo = r1;
        ref_hi = r2;
        polar = true;
    } else if (family == "strip") {
        require_keys(cfg, "config",
                     {"family", "lambda", "n", "c", "alpha", "x1", "x2", "samples", "rings",
                      "rays"});
        const long long nll = need_int(cfg, "config", "n");
        if (nll < 1 || nll > 64) config_fail("strip n must be a positive integer");
        const int n = (int)nll;
        StripFamily fam;
        const bool has_shape = find(cfg, "c") || find(cfg, "alpha");
        const bool has_domain = find(cfg, "x1") || find(cfg, "x2");
        if (has_shape == has_domain)
            config_fail("strip family needs either (c, alpha) or (x1, x2)");
        if (has_shape) {
            fam = solve_strip_params(n, need_number(cfg, "config", "c"),
                                     need_number(cfg, "config", "alpha"), lambda);
        } else {
            fam = strip_family_from_domain(n, need_number(cfg, "config", "x1"),
                                           need_number(cfg, "config", "x2"), lambda);
        }
        map = strip_map(fam);

        params += "family = strip\n";
        params += fmt("n = %d\nlambda = %.12g\n", fam.n, lambda);
        params += fmt("c = %.12g\nalpha = %.12g\nb = %.12g\n", fam.c, fam.alpha, fam.b);
        params += fmt("x1 = %.12g\nx2 = %.12g\n", fam.x1, fam.x2);
        params += fmt("exp_x1 = %.12g\nexp_x2 = %.12g\n", std::exp(fam.x1), std::exp(fam.x2));

        // f depends on y only through exp(iny): a 2*pi wall segment winds n times
        for (double x : {fam.x1, fam.x2})
            walls.push_back(
                BoundaryCurve{[x](double t) { return Complex(x, 2.0 * M_PI * t); },
                              [](double) { return Complex(0.0, 2.0 * M_PI); }});
        wall_names = {"left", "right"};
        ref_lo = fam.x1;
        ref_hi = fam.x2;
        polar = false;

        const int winding = winding_number(
            [&](double t) { return map.f(Complex(fam.x2, 2.0 * M_PI * t)); });
        if (winding != fam.n)
            throw Error(fmt("cross-check failed: strip winding %d, expected %d", winding,
                            fam.n));
    } else {
        config_fail("family must be 'annulus' or 'strip'");
    }

    // traction along both boundary curves: CSV plus hard identity check
    std::string csv = "boundary,t,re z,im z,re traction,im traction,|traction|\n";
    double worst = 0.0;
    for (size_t w = 0; w < walls.size(); ++w) {
        for (long long i = 0; i < samples; ++i) {
            const double t = (double)i / (double)samples;
            const Complex z = walls[w].pos(t);
            const Complex tv = walls[w].tan(t);
            const Complex sigma = traction_vector(map, z, tv / std::abs(tv), lambda);
            worst = std::max(worst, std::abs(sigma));
            csv += fmt("%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", wall_names[w].c_str(), t,
                       z.real(), z.imag(), sigma.real(), sigma.imag(), std::abs(sigma));
        }
    }
    if (worst > 1e-9)
        throw Error(fmt("cross-check failed: boundary traction residual %.3g", worst));
    params += fmt("max_traction_residual = %.3g\n", worst);

    write_file(out_dir / "params.txt", params);
    write_file(out_dir / "traction.csv", csv);

    // figure: reference family of curves in gray, wound image per stability
    std::vector<std::vector<Complex>> ref_curves;
    std::vector<ClassedCurve> img_curves;
    const long long arc_samples = 512;
    auto add_curve = [&](const std::function<Complex(double)>& gamma, long long count) {
        std::vector<Complex> ref;
        std::vector<Complex> img;
        std::vector<TriStability> cls;
        for (long long i = 0; i <= count; ++i) {
            const double t = (double)i / (double)count;
            const Complex z = gamma(t);
            ref.push_back(z);
            img.push_back(map.f(z));
            cls.push_back(classify_stability(stability_s(lambda, map.deriv(z).fz), 1e-4));
        }
        ref_curves.push_back(ref);
        for (auto& piece : split_by_class(img, cls)) img_curves.push_back(piece);
    };
    for (long long r = 0; r < rings; ++r) {
        const double rho = ref_lo + (ref_hi - ref_lo) * (double)r / (double)(rings - 1);
        if (polar)
            add_curve([rho](double t) { return std::polar(rho, 2.0 * M_PI * t); },
                      arc_samples);
        else
            add_curve([rho](double t) { return Complex(rho, t * 2.0 * M_PI); }, arc_samples);
    }
    for (long long a = 0; a < rays; ++a) {
        const double s = (double)a / (double)rays;
        if (polar)
            add_curve(
                [&, s](double t) {
                    return std::polar(ref_lo + (ref_hi - ref_lo) * t, 2.0 * M_PI * s);
                },
                64);
        else
            add_curve(
                [&, s](double t) {
                    return Complex(ref_lo + (ref_hi - ref_lo) * t, s * 2.0 * M_PI);
                },
                64);
    }
    write_file(out_dir / "figure.svg", render_map_figure(ref_curves, img_curves, {}));

    std::printf("annulus: %s family, max traction residual = %.3g\n", family.c_str(), worst);
    return 0;
}

// ------------------------------------------------------------------ meshgen

int cmd_meshgen(const json& cfg, const fs::path& out_dir,
                std::optional<int> refine_override) {
    const std::string shape = need_string(cfg, "config", "shape");
    TriangleMesh mesh;
    if (shape == "disk") {
        require_keys(cfg, "config", {"shape", "radius", "resolution", "refine", "filename"});
        mesh = disk_mesh(need_number(cfg, "config", "radius"),
                         (int)need_int(cfg, "config", "resolution"));
    } else if (shape == "rectangle") {
        require_keys(cfg, "config",
                     {"shape", "width", "height", "nx", "ny", "refine", "filename"});
        mesh = rectangle_mesh(need_number(cfg, "config", "width"),
                              need_number(cfg, "config", "height"),
                              (int)need_int(cfg, "config", "nx"),
                              (int)need_int(cfg, "config", "ny"));
    } else if (shape == "annulus") {
        require_keys(cfg, "config", {"shape", "r1", "r2", "resolution", "refine", "filename"});
        mesh = annulus_mesh(need_number(cfg, "config", "r1"),
                            need_number(cfg, "config", "r2"),
                            (int)need_int(cfg, "config", "resolution"));
    } else {
        config_fail("shape must be disk | rectangle | annulus");
    }
    const long long refine_n =
        refine_override ? *refine_override : opt_int(cfg, "config", "refine", 0);
    if (refine_n < 0 || refine_n > 8) config_fail("refine must be in [0, 8]");
    if (refine_n > 0) mesh = refine(mesh, (int)refine_n);

    const std::string filename = find(cfg, "filename")
                                     ? need_string(cfg, "config", "filename")
                                     : std::string("mesh.txt");

    std::ostringstream text;
    write_mesh(text, mesh);
    // self-check: the emitted text must reload to the identical mesh
    std::istringstream back_in(text.str());
    const TriangleMesh back = parse_mesh(back_in);
    if (back.vertices != mesh.vertices || back.triangles != mesh.triangles ||
        back.boundary_vertices != mesh.boundary_vertices)
        throw Error("cross-check failed: mesh text round trip");
    write_file(out_dir / filename, text.str());

    std::printf("meshgen: %zu vertices, %zu triangles, %zu boundary vertices, %d boundary "
                "loop(s)\n",
                mesh.vertices.size(), mesh.triangles.size(), mesh.boundary_vertices.size(),
                count_boundary_loops(mesh));
    return 0;
}

// ------------------------------------------------------------------- verify

int cmd_verify(const json& cfg, const fs::path& out_dir, const fs::path& base_dir,
               std::optional<double> lambda_override, std::optional<uint64_t> seed_override) {
    require_keys(cfg, "config", {"mesh", "state", "lambda", "seed", "gradient_checks"});
    auto resolve = [&](const std::string& p) {
        const fs::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };
    const TriangleMesh mesh = load_mesh(resolve(need_string(cfg, "config", "mesh")).string());
    DeformedState state = find(cfg, "state")
                              ? load_state(resolve(need_string(cfg, "config", "state")).string(),
                                           mesh.vertices.size())
                              : identity_state(mesh);
    const double lambda =
        lambda_override ? *lambda_override : need_number(cfg, "config", "lambda");
    const PotentialV V = PotentialV::Lambda(lambda);
    const uint64_t seed =
        seed_override ? *seed_override : (uint64_t)opt_int(cfg, "config", "seed", 12345);
    const long long checks = opt_int(cfg, "config", "gradient_checks", 12);
    if (checks < 1 || checks > 1000) config_fail("gradient_checks must be in [1, 1000]");

    std::string log;
    std::vector<std::string> failures;
    auto record = [&](const std::string& name, bool ok, const std::string& detail) {
        log += "check " + name + ": " + (ok ? "ok" : "FAIL") + " (" + detail + ")\n";
        if (!ok) failures.push_back(name + ": " + detail);
    };

    record("mesh", true,
           fmt("%zu vertices, %zu triangles, %d boundary loop(s)", mesh.vertices.size(),
               mesh.triangles.size(), count_boundary_loops(mesh)));

    const double E = energy(mesh, state, V);
    record("energy-finite", std::isfinite(E), fmt("E = %.12g", E));

    const auto [lhs, rhs] = energy_area_identity(mesh, state, V);
    const double ea_err = std::abs(lhs - rhs);
    record("energy-area-identity", ea_err <= 1e-10 * (1.0 + std::abs(rhs)),
           fmt("|lhs - rhs| = %.3g", ea_err));

    const auto grad = gradient(mesh, state, V);
    Uniform u(seed);
    const double step = 1e-6 * std::max(1.0, mesh_diameter(mesh));
    // the denominator floor lets exact critical points (zero gradient) pass
    const double floor = 1e-6 * std::max(1.0, std::abs(E));
    double worst_rel = 0.0;
    for (long long trial = 0; trial < checks; ++trial) {
        const size_t i = (size_t)(u() * (double)mesh.vertices.size()) % mesh.vertices.size();
        const Complex dir = std::polar(1.0, 2.0 * M_PI * u());
        DeformedState plus = state, minus = state;
        plus.positions[i] += step * dir;
        minus.positions[i] -= step * dir;
        const double fd = (energy(mesh, plus, V) - energy(mesh, minus, V)) / (2.0 * step);
        const double exact = grad[i].real() * dir.real() + grad[i].imag() * dir.imag();
        worst_rel = std::max(worst_rel,
                             std::abs(fd - exact) / std::max(std::abs(exact), floor));
    }
    record("gradient-fd", worst_rel <= 1e-4,
           fmt("%lld directional checks, worst relative error %.3g", checks, worst_rel));

    const auto stab = stability_report(mesh, state, V);
    record("stability", true,
           fmt("stable %d / melting %d / unstable %d, %zu branch triangle(s)",
               stab.stable_count, stab.melting_count, stab.unstable_count,
               stab.branch_triangles.size()));

    log += failures.empty() ? "verify: all checks passed\n" : "verify: FAILURES above\n";
    write_file(out_dir / "verify.txt", log);
    std::fputs(log.c_str(), stdout);
    if (!failures.empty()) throw Error("verification failed: " + failures.front());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"elastica2d: exact elastic maps from holomorphic data and a discrete "
                 "elastic energy minimizer"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    double lambda_flag = 0.0;
    int refine_flag = 0;
    uint64_t seed_flag = 0;

    std::vector<CLI::App*> subs;
    for (const char* name : {"weierstrass", "solve", "annulus", "meshgen", "verify"}) {
        CLI::App* sub = app.add_subcommand(name, "");
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory (default: current)");
        sub->add_option("--lambda", lambda_flag, "override the config lambda");
        sub->add_option("--refine", refine_flag, "override mesh refinement level");
        sub->add_option("--seed", seed_flag, "override the config seed");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    CLI::App* active = nullptr;
    for (CLI::App* sub : subs)
        if (sub->parsed()) active = sub;
    if (!active) return 1;

    const std::optional<double> lambda_override =
        active->count("--lambda") ? std::optional<double>(lambda_flag) : std::nullopt;
    const std::optional<int> refine_override =
        active->count("--refine") ? std::optional<int>(refine_flag) : std::nullopt;
    const std::optional<uint64_t> seed_override =
        active->count("--seed") ? std::optional<uint64_t>(seed_flag) : std::nullopt;

    try {
        const fs::path cfg_path(config_path);
        const json cfg = load_config(cfg_path);
        const fs::path base_dir = fs::absolute(cfg_path).parent_path();
        const fs::path out(out_dir);
        fs::create_directories(out);

        const std::string name = active->get_name();
        if (name == "weierstrass") return cmd_weierstrass(cfg, out, lambda_override);
        if (name == "solve")
            return cmd_solve(cfg, out, base_dir, lambda_override, refine_override,
                             seed_override);
        if (name == "annulus") return cmd_annulus(cfg, out, lambda_override);
        if (name == "meshgen") return cmd_meshgen(cfg, out, refine_override);
        if (name == "verify")
            return cmd_verify(cfg, out, base_dir, lambda_override, seed_override);
        return 1;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    }
}
