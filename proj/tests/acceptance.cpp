// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance              all criteria
//   acceptance --criterion N
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "diskpatch/bounds_lab.hpp"
#include "diskpatch/cli_io.hpp"
#include "diskpatch/dynamics.hpp"
#include "diskpatch/parallel.hpp"
#include "support.hpp"

using namespace diskpatch;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    va_list ap, aq;
    va_start(ap, f);
    va_copy(aq, ap);
    int n = std::vsnprintf(nullptr, 0, f, ap);
    va_end(ap);
    std::string out(static_cast<std::size_t>(std::max(n, 0)), '\0');
    std::vsnprintf(out.data(), out.size() + 1, f, aq);
    va_end(aq);
    return out;
}

struct Collect : RunSink {
    std::vector<DiagnosticsRecord> rows;
    std::vector<SimState> states;
    bool keep_states = false;
    void record(const DiagnosticsRecord& r, const SimState& s) override {
        rows.push_back(r);
        if (keep_states) states.push_back(s);
    }
};

double max_node_diff(const SimState& a, const SimState& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.ps.patches.size(); ++k)
        for (std::size_t i = 0; i < a.ps.patches[k].boundary.size(); ++i)
            m = std::max(m, norm(a.ps.patches[k].boundary[i] - b.ps.patches[k].boundary[i]));
    return m;
}

// least-squares line y = c0 + c1 x, returns {c1, r2}
std::pair<double, double> line_fit(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    double c1 = sxy / sxx;
    double r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
    return {c1, r2};
}

// random ellipse well inside the unit disk
struct EllipseDraw {
    Point c;
    double a, b, ang;
};
EllipseDraw draw_ellipse(std::mt19937_64& g) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    EllipseDraw e;
    e.a = 0.1 + 0.25 * u(g);
    e.b = e.a * (0.4 + 0.6 * u(g));
    e.ang = 3.0 * u(g);
    double rc = (0.88 - e.a) * std::sqrt(u(g)), pc = 2 * pi * u(g);
    e.c = {rc * std::cos(pc), rc * std::sin(pc)};
    return e;
}

// ---- criteria ----

Outcome a1() {
    std::mt19937_64 g(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        ScenarioSpec sp;
        sp.N = 512;
        sp.disk = {{0.3 * (u(g) - 0.5), 0.3 * (u(g) - 0.5)}, 0.7 + 0.6 * u(g)};
        const double R = sp.disk.radius;
        sp.kind = trial % 3 == 2 ? ScenarioKind::symmetric_pair : ScenarioKind::single_patch;
        sp.shape = trial % 3 == 1 ? Shape::perturbed_circle : Shape::ellipse;
        sp.axis_a = R * (0.12 + 0.15 * u(g));
        sp.axis_b = sp.shape == Shape::ellipse ? sp.axis_a * (0.4 + 0.6 * u(g)) : sp.axis_a;
        sp.tilt = 3.0 * u(g);
        sp.perturb_amp = sp.shape == Shape::perturbed_circle ? 0.2 * u(g) : 0.0;
        sp.perturb_mode = 2 + trial % 4;
        sp.theta = (u(g) < 0.5 ? -1.0 : 1.0) * (0.5 + u(g));
        double off = sp.kind == ScenarioKind::symmetric_pair ? R * (0.35 + 0.2 * u(g)) : R * 0.3 * (u(g) - 0.5);
        sp.center = {sp.disk.center.x1 + off, sp.disk.center.x2 + R * 0.4 * (u(g) - 0.5)};
        InitialData d = make_scenario(sp);
        VelocityField f(d.ps, QuadratureSpec{4});
        for (int k = 0; k < 64; ++k) {
            double t = 2 * pi * k / 64;
            Vec2 n{std::cos(t), std::sin(t)};
            Vec2 v = f.velocity(sp.disk.center + R * n);
            worst = std::max(worst, std::abs(dot(v, n)) / std::max(1.0, norm(v)));
        }
    }
    return {worst <= 1e-6, fmt("max |u.n|/max(1,|u|) = %.3e over 10 patch sets x 64 points (tol 1e-6)", worst)};
}

Outcome a2() {
    const double a = 0.5;
    PatchSet ps = single(circle({0, 0}, a, 1024));
    VelocityField f(ps, QuadratureSpec{});
    double img = 0.0, rel = 0.0;
    for (int i = 1; i <= 19; ++i) {
        double r = 0.05 * i;
        if (std::abs(r - a) < 0.02) r += 0.02;
        for (int k = 0; k < 16; ++k) {
            double t = 2 * pi * (k + 0.3) / 16;
            Point x{r * std::cos(t), r * std::sin(t)};
            img = std::max(img, norm(f.image_velocity(x)));
            double ut = r < a ? r / 2 : a * a / (2 * r);
            Vec2 ex{-ut * std::sin(t), ut * std::cos(t)};
            rel = std::max(rel, norm(f.velocity(x) - ex) / norm(ex));
        }
    }
    bool ok = img <= 1e-8 && rel <= 1e-6;
    return {ok, fmt("max |image| = %.3e (tol 1e-8), Rankine rel err = %.3e (tol 1e-6), N = 1024", img, rel)};
}

Outcome a3() {
    std::mt19937_64 g(202);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    std::vector<double> lvl_err(3, 0.0);
    DiskDomain d{};
    for (int trial = 0; trial < 10; ++trial) {
        EllipseDraw e = draw_ellipse(g);
        double th = 0.5 + u(g);
        std::vector<RowRegion> reg{ellipse_region(e.c, e.a, e.b, e.ang, th)};
        std::vector<Point> pts;
        PatchSet fine = single(ellipse_arclength(e.c, e.a, e.b, e.ang, 256), th, d);
        while (pts.size() < 5) {
            double r = 0.95 * std::sqrt(u(g)), p = 2 * pi * u(g);
            Point x{r * std::cos(p), r * std::sin(p)};
            if (distance_to_curve(x, fine.patches[0].boundary) >= 0.02) pts.push_back(x);
        }
        VelocityField vf(fine, QuadratureSpec{4});
        for (Point x : pts) {
            Vec2 o = oracle_velocity_area(d, reg, x, 4096);
            worst = std::max(worst, norm(vf.velocity(x) - o) / norm(o));
        }
        // refinement study on a coarse contour
        PatchSet coarse = single(ellipse_arclength(e.c, e.a, e.b, e.ang, 48), th, d);
        int li = 0;
        for (int r : {1, 2, 4}) {
            VelocityField cf(coarse, QuadratureSpec{r});
            for (Point x : pts) {
                Vec2 o = oracle_velocity_area(d, reg, x, 4096);
                lvl_err[li] = std::max(lvl_err[li], norm(cf.velocity(x) - o) / norm(o));
            }
            ++li;
        }
    }
    double o1 = std::log2(lvl_err[0] / lvl_err[1]), o2 = std::log2(lvl_err[1] / lvl_err[2]);
    double order = std::min(o1, o2);
    bool ok = worst <= 1e-4 && order >= 1.5;
    return {ok, fmt("max rel err = %.3e (tol 1e-4) at N = 256, cells = 4096; refinement orders %.2f, %.2f (min 1.5)", worst, o1,
                    o2)};
}

Outcome a4() {
    ScenarioSpec sp;
    sp.axis_a = sp.axis_b = 0.5;
    sp.N = 512;
    StepConfig cfg;
    cfg.dt = 1e-2;
    cfg.quad.refinement = 1;
    SimState s = initial_state(sp, {});
    const double A0 = signed_area(s.ps.patches[0].boundary);
    for (std::int64_t k = 0; k < step_count(10.0, cfg.dt); ++k) s = step_rk4(s, cfg);
    const auto& c = s.ps.patches[0].boundary;
    double haus = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        haus = std::max(haus, std::abs(norm(c[i]) - 0.5));
        haus = std::max(haus, std::abs(norm(0.5 * (c[i] + c[c.next(i)])) - 0.5));
    }
    double drift = std::abs(signed_area(c) - A0) / A0;
    bool ok = haus <= 1e-4 && drift <= 1e-6 && std::abs(s.t - 10.0) < 1e-9;
    return {ok, fmt("t = %.4f: Hausdorff = %.3e (tol 1e-4), area drift = %.3e (tol 1e-6)", s.t, haus, drift)};
}

Outcome a5() {
    ScenarioSpec sp;
    sp.axis_a = 0.4;
    sp.axis_b = 0.2;
    sp.center = {0.1, 0.05};
    sp.tilt = 0.4;
    sp.N = 128;
    SimState s0 = initial_state(sp, {});
    auto at_one = [&](double dt) {
        SimState s = s0;
        StepConfig cfg;
        cfg.dt = dt;
        cfg.quad.refinement = 2;
        for (std::int64_t k = 0; k < step_count(1.0, dt); ++k) s = step_rk4(s, cfg);
        return s;
    };
    SimState a = at_one(0.1), b = at_one(0.05), c = at_one(0.025);
    double rk = std::log2(max_node_diff(a, b) / max_node_diff(b, c));
    std::vector<double> err;
    for (std::size_t n : {32, 64, 128}) {
        double e = 0.0;
        for (double k : curvature(circle({0.1, -0.2}, 0.5, n, 0.3))) e = std::max(e, std::abs(k - 2.0));
        err.push_back(e);
    }
    double ko = std::min(std::log2(err[0] / err[1]), std::log2(err[1] / err[2]));
    return {rk >= 3.7 && ko >= 1.8, fmt("RK4 order %.3f (min 3.7), curvature order %.3f (min 1.8)", rk, ko)};
}

Outcome a6() {
    ScenarioSpec sp;
    sp.kind = ScenarioKind::symmetric_pair;
    sp.axis_a = 0.2;
    sp.axis_b = 0.12;
    sp.tilt = 0.5;
    sp.center = {0.45, 0.1};
    sp.N = 256;
    SimState on = initial_state(sp, {}), off = on;
    StepConfig con, coff;
    con.dt = coff.dt = 2e-2;
    con.symmetry_axis = true;
    double off_ratio = 0.0, on_max = 0.0;
    for (int k = 0; k < 50; ++k) {
        on = step_rk4(on, con);
        off = step_rk4(off, coff);
        on_max = std::max(on_max, mirror_asymmetry(on));
        off_ratio = std::max(off_ratio, mirror_asymmetry(off) / off.t);
    }
    // velocity on the axis x1 = c1 at t = 0
    SimState s0 = initial_state(sp, {});
    VelocityField f(s0.ps, QuadratureSpec{});
    double u1 = 0.0, u2 = 0.0;
    for (int k = 0; k < 41; ++k) {
        Point x{0.0, -0.95 + 1.9 * k / 40};
        Vec2 v = f.velocity(x);
        u1 = std::max(u1, std::abs(v.x1));
        u2 = std::max(u2, std::abs(v.x2));
    }
    bool ok = off_ratio <= 1e-6 && on_max == 0.0 && u2 <= 1e-6;
    return {ok, fmt("asymmetry/t without enforcement %.3e (tol 1e-6), with enforcement %.3e (need 0); on the axis max|u2| = "
                    "%.3e (tol 1e-6), max|u1| = %.3e",
                    off_ratio, on_max, u2, u1)};
}

Outcome a7() {
    ScenarioSpec sp;
    sp.kind = ScenarioKind::ks_example;
    sp.strip = 0.05;
    sp.N = 4096;
    StepConfig cfg;
    cfg.dt = 0.02;
    cfg.quad.refinement = 1;
    cfg.symmetry_axis = true;
    cfg.h_min = 1e-7;
    RunOptions opt;
    opt.T = 3.0;
    opt.diagnostics_every = 5;
    opt.redistribute_every = 1;
    Collect c;
    c.keep_states = true;
    std::string stop;
    try {
        run(sp, cfg, opt, c);
    } catch (const Error& e) {
        stop = e.what();
    }
    if (c.rows.empty()) return {false, "no records: " + stop};
    const double x0 = c.rows.front().x1_leftmost;
    bool nonincr = true, below = true, mono = true;
    double worst_rate = std::numeric_limits<double>::infinity();
    std::string trace;
    for (std::size_t i = 0; i < c.rows.size(); ++i) {
        const auto& r = c.rows[i];
        if (i > 0) {
            if (r.x1_leftmost > c.rows[i - 1].x1_leftmost) nonincr = false;
            if (!(r.kappa_max > c.rows[i - 1].kappa_max)) mono = false;
            worst_rate = std::min(worst_rate, -std::log(r.x1_leftmost / x0) / r.t);
        }
        if (r.x1_leftmost > x0 * std::exp(-0.5 * r.t)) below = false;
        if (i % 5 == 0 || i + 1 == c.rows.size())
            trace += fmt("\n      t=%.2f x1=%.4e marker=%.4e kappa=%.4e N=%zu", r.t, r.x1_leftmost,
                         leftmost_contact(c.states[i]).marker, r.kappa_max, c.states[i].ps.patches[0].boundary.size());
    }
    std::string fit;
    std::vector<std::pair<double, double>> kap;
    for (const auto& r : c.rows) kap.push_back({r.t, r.kappa_max});
    try {
        GrowthFit gf = fit_growth(kap);
        fit = fmt("fit_growth: %s (double-exp r2 %.5f, exp r2 %.5f)", model_name(gf.model), gf.dexp_fit.r2, gf.exp_fit.r2);
    } catch (const Error& e) {
        fit = std::string("fit_growth: ") + e.what();
    }
    bool reached = std::abs(c.rows.back().t - 3.0) < 1e-9 && stop.empty();
    bool ok = reached && nonincr && below && mono;
    return {ok, fmt("reached T=3: %s; x1 non-increasing: %s; x1 <= x1(0)e^{-t/2}: %s (min fitted rate %.3f); kappa_max "
                    "increasing: %s; %s%s",
                    reached ? "yes" : ("no, " + stop).c_str(), nonincr ? "yes" : "no", below ? "yes" : "no", worst_rate,
                    mono ? "yes" : "no", fit.c_str(), trace.c_str())};
}

Outcome a8() {
    std::vector<double> xs, ys, ys_scaled;
    std::string vals;
    for (double s : {1e-1, 1e-2, 1e-3}) {
        ScenarioSpec sp;
        sp.kind = ScenarioKind::ks_example;
        sp.strip = s;
        sp.rounding = 0.2 * s;
        sp.N = 4096;
        SimState st = initial_state(sp, {});
        CornerIntegrator ci(st.ps, 4000);
        double om = ci({1e-2, 1e-2});
        double sc = ci({0.1 * s, 0.1 * s});
        xs.push_back(std::log(1.0 / s));
        ys.push_back(om);
        ys_scaled.push_back(sc);
        vals += fmt(" s=%g: %.5f (scaled corner %.5f);", s, om, sc);
    }
    auto [slope, r2] = line_fit(xs, ys);
    auto [slope2, r22] = line_fit(xs, ys_scaled);
    bool ok = slope > 0 && r2 >= 0.99;
    return {ok, fmt("corner (1e-2,1e-2) vs log(1/s): slope %.4f, r2 %.4f (need > 0, >= 0.99);%s corner (s/10,s/10): slope "
                    "%.4f, r2 %.4f",
                    slope, r2, vals.c_str(), slope2, r22)};
}

Outcome a9() {
    auto shapes = keylemma_shapes(10, 20240601, 512);
    KeyLemmaOptions opt;
    BoundReport r = verify_keylemma(shapes, ScenarioSpec{}.gamma_cone, opt);
    std::string per;
    for (double d : opt.deltas)
        per += fmt(" delta=%g: sup|B1| %.4g, sup|B2| %.4g, grid change %.3f, shape spread %.3f;", d,
                   r.detail(fmt("delta=%g:sup_B1", d)), r.detail(fmt("delta=%g:sup_B2", d)),
                   r.detail(fmt("delta=%g:grid_change", d)), r.detail(fmt("delta=%g:shape_spread", d)));
    bool ok = r.verdict == Verdict::bounded && std::isfinite(r.sup_ratio);
    return {ok, fmt("%zu shapes, 64x64 cone grid, %zu samples: %s;%s", shapes.size(), r.samples, verdict_name(r.verdict),
                    per.c_str())};
}

Outcome a10() {
    double worst = 0.0;
    for (double r : {0.5, 0.25, 0.125})
        for (double a : {0.1, 1.0, 10.0}) worst = std::max(worst, verify_I1_identity(r, a * r, 1.0, 2048));
    return {worst <= 1e-5, fmt("max rel err over 3x3 (r, h) grid = %.3e (tol 1e-5)", worst)};
}

Outcome a11() {
    BoundReport r = verify_hessian_tangent_disk({0.5, 0.25, 0.125}, {0.1, 1.0, 10.0});
    std::string tr;
    for (auto [rr, v] : r.refinement_trend) tr += fmt(" r=%g: %.4f;", rr, v);
    bool ok = r.verdict == Verdict::bounded && std::isfinite(r.sup_ratio);
    return {ok, fmt("sup r|hess u| =%s octave change %.3f (tol 0.30)", tr.c_str(), r.detail("octave_change"))};
}

Outcome a12() {
    ScenarioSpec sp;
    sp.axis_a = 0.35;
    sp.axis_b = 0.2;
    sp.center = {0.15, -0.05};
    sp.tilt = 0.3;
    sp.N = 256;
    std::vector<std::pair<double, std::vector<DiagnosticsRecord>>> runs;
    for (double dt : {0.02, 0.01}) {
        StepConfig cfg;
        cfg.dt = dt;
        RunOptions opt;
        opt.T = 3.0;
        opt.diagnostics_every = step_count(0.1, dt);
        Collect c;
        run(sp, cfg, opt, c);
        runs.push_back({dt, c.rows});
    }
    BoundReport r = verify_a_ode(runs);
    std::string cs;
    for (double dt : {0.02, 0.01})
        cs += fmt(" dt=%g: C = (%.4g, %.4g, %.4g);", dt, r.detail(fmt("dt=%g:C_sup", dt)), r.detail(fmt("dt=%g:C_inf", dt)),
                  r.detail(fmt("dt=%g:C_gamma", dt)));
    bool ok = r.verdict == Verdict::bounded;
    return {ok, fmt("%s change under dt halving %.3f (tol 0.30)", cs.c_str() + 1, r.detail("dt_change"))};
}

Outcome a13() {
    const char* cfg_text = R"(
[scenario]
scenario = symmetric_pair
N = 128
center_x = 0.45
center_y = 0.1
axis_a = 0.2
axis_b = 0.12
tilt = 0.5
[numerics]
dt = 0.02
[run]
T = 0.4
snapshot_every = 5
[diagnostics]
gamma = 0.5
corner_rows = 1000
)";
    RunConfig c = parse_config(cfg_text);
    fs::path base = fs::temp_directory_path() / "diskpatch_acceptance_a13";
    fs::remove_all(base);
    std::ostringstream log;
    const int before = thread_count();
    std::vector<fs::path> dirs;
    for (int t : {1, 2, 1}) {
        set_thread_count(t);
        RunConfig ct = c;
        ct.output_dir = (base / ("threads" + std::to_string(t) + "_" + std::to_string(dirs.size()))).string();
        if (cmd_run(ct, log) != 0) {
            set_thread_count(before);
            return {false, "run failed: " + log.str()};
        }
        dirs.push_back(ct.output_dir);
    }
    set_thread_count(before);
    std::size_t files = 0, diff = 0;
    for (std::size_t k = 1; k < dirs.size(); ++k) {
        std::vector<std::string> names{"timeseries.csv"};
        for (const auto& e : fs::directory_iterator(dirs[0] / "snapshots")) names.push_back("snapshots/" + e.path().filename().string());
        for (const auto& n : names) {
            ++files;
            if (!fs::exists(dirs[k] / n) || read_file((dirs[0] / n).string()) != read_file((dirs[k] / n).string())) ++diff;
        }
    }
    fs::remove_all(base);
    return {diff == 0 && files > 2, fmt("%zu file comparisons across threads 1, 2, 1: %zu differ", files, diff)};
}

struct Criterion {
    const char* name;
    double limit_s;
    Outcome (*fn)();
};

const Criterion criteria[] = {
    {"boundary tangency", 60, a1},
    {"image kernel and Rankine", 60, a2},
    {"contour vs area oracle", 300, a3},
    {"steady circle to T=10", 300, a4},
    {"convergence orders", 300, a5},
    {"mirror symmetry", 300, a6},
    {"strip mechanism at desk scale", 1800, a7},
    {"corner integral vs log(1/s)", 120, a8},
    {"key lemma residual", 600, a9},
    {"I1 identity", 120, a10},
    {"tangent-disk Hessian", 300, a11},
    {"A-ODE constants", 600, a12},
    {"reproducibility across threads", 120, a13},
};

bool run_one(int n) {
    const Criterion& c = criteria[n - 1];
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = c.fn();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = el <= c.limit_s;
    bool pass = o.pass && in_time;
    std::printf("A%-2d %s  %s: %s [%.1f s, limit %.0f s%s]\n", n, pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), el, c.limit_s,
                in_time ? "" : ", over");
    std::fflush(stdout);
    return pass;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--criterion" && i + 1 < argc) {
            which.push_back(std::atoi(argv[++i]));
        } else {
            std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
            return 2;
        }
    }
    if (which.empty())
        for (int n = 1; n <= 13; ++n) which.push_back(n);
    bool all = true;
    for (int n : which) {
        if (n < 1 || n > 13) {
            std::fprintf(stderr, "criterion must be 1..13\n");
            return 2;
        }
        all = run_one(n) && all;
    }
    return all ? 0 : 1;
}
