#include "diskpatch/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "diskpatch/error.hpp"
#include "diskpatch/parallel.hpp"

namespace diskpatch {

void check_state(const SimState& s) {
    if (s.w.size() != s.ps.patches.size()) throw Error(ErrorKind::InvalidPatch, "one w list per patch required");
    for (std::size_t k = 0; k < s.w.size(); ++k) {
        if (s.w[k].size() != s.ps.patches[k].boundary.size())
            throw Error(ErrorKind::InvalidPatch, "w and curve sizes differ on patch " + std::to_string(k));
        for (const auto& v : s.w[k])
            if (!(norm(v) > 0.0) || !std::isfinite(norm(v))) throw Error(ErrorKind::InvalidPatch, "w must be finite and nonzero");
    }
}

void check_step_config(const StepConfig& cfg) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw Error(ErrorKind::Misuse, "dt must be positive");
    if (!(cfg.h_min > 0.0 && cfg.h_min < cfg.h_max)) throw Error(ErrorKind::Misuse, "need 0 < h_min < h_max");
    if (cfg.quad.refinement < 1) throw Error(ErrorKind::InvalidResolution, "refinement must be >= 1");
}

namespace {

void check_pair(const PatchSet& ps) {
    if (ps.patches.size() != 2) throw Error(ErrorKind::Misuse, "symmetry needs exactly two patches");
    if (ps.patches[0].theta != -ps.patches[1].theta) throw Error(ErrorKind::Misuse, "symmetry needs opposite strengths");
}

struct Stage {
    std::vector<std::vector<Point>> x;
    TangentField w;
    std::vector<Point> m;
};

struct Rates {
    std::vector<std::vector<Vec2>> u, dw;
    GradientSamples g;
    std::vector<Vec2> um;
};

bool finite(Vec2 v) { return std::isfinite(v.x1) && std::isfinite(v.x2); }

PatchSet stage_patches(const PatchSet& base, const std::vector<std::vector<Point>>& x) {
    PatchSet ps;
    ps.disk = base.disk;
    for (std::size_t k = 0; k < x.size(); ++k) {
        for (const auto& p : x[k])
            if (!finite(p)) throw Error(ErrorKind::Stability, "non-finite node position (dt too large?)");
        ps.patches.push_back({base.patches[k].theta, ClosedCurve(x[k])});
    }
    return ps;
}

// du/ds along the curve from the spline of node velocities, G = (du/ds) t^T
std::vector<Mat2> tangential_gradients(const std::vector<Point>& x, const std::vector<Vec2>& u) {
    ClosedCurve c(x);
    double period = 0.0;
    auto knots = chord_knots(c, period);
    PeriodicSpline sx(knots, period, x), su(knots, period, u);
    std::vector<Mat2> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        Vec2 dx = sx.d1(i, 0.0), du = su.d1(i, 0.0);
        double sp = norm(dx);
        Vec2 t = dx / sp, ds = du / sp;
        g[i].m[0][0] = ds.x1 * t.x1;
        g[i].m[0][1] = ds.x1 * t.x2;
        g[i].m[1][0] = ds.x2 * t.x1;
        g[i].m[1][1] = ds.x2 * t.x2;
    }
    return g;
}

Rates rates_at(const PatchSet& base, const std::vector<std::vector<Point>>& x, const TangentField& w,
               const std::vector<Point>& markers, const StepConfig& cfg, std::size_t active) {
    PatchSet ps = stage_patches(base, x);
    VelocityField vf(ps, cfg.quad);
    Rates r;
    r.u.resize(x.size());
    r.g.resize(x.size());
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    for (std::size_t k = 0; k < active; ++k) {
        r.u[k].resize(x[k].size());
        for (std::size_t i = 0; i < x[k].size(); ++i) idx.push_back({k, i});
    }
    r.um.resize(markers.size());
    const std::size_t nn = idx.size();
    parallel_for(nn + markers.size(), [&](std::size_t j) {
        if (j < nn) {
            auto [k, i] = idx[j];
            r.u[k][i] = vf.velocity(x[k][i]);
        } else {
            r.um[j - nn] = vf.velocity(markers[j - nn]);
        }
    });
    for (std::size_t k = 0; k < active; ++k) {
        for (const auto& v : r.u[k])
            if (!finite(v)) throw Error(ErrorKind::Stability, "non-finite velocity");
        r.g[k] = tangential_gradients(x[k], r.u[k]);
        if (k < w.size()) {
            r.dw.resize(x.size());
            r.dw[k].resize(w[k].size());
            for (std::size_t i = 0; i < w[k].size(); ++i) r.dw[k][i] = r.g[k][i] * w[k][i];
        }
    }
    return r;
}

Point onto_disk(Point p, const DiskDomain& d) {
    Vec2 e = p - d.center;
    double r = norm(e);
    return r > d.radius ? d.center + e * (d.radius / r) : p;
}

Point onto_circle(Point p, const DiskDomain& d) {
    Vec2 e = p - d.center;
    return d.center + e * (d.radius / norm(e));
}

// mirror of patch 0 into patch 1, positions and w
void mirror_stage(Stage& st, const DiskDomain& d) {
    mirror_patch(st.x[0], st.w[0], d, st.x[1], st.w[1]);
}

Stage advance(const Stage& s0, double h, const Rates& k, std::size_t active, const DiskDomain& d, bool sym) {
    Stage st = s0;
    for (std::size_t p = 0; p < active; ++p)
        for (std::size_t i = 0; i < st.x[p].size(); ++i) {
            st.x[p][i] = onto_disk(s0.x[p][i] + h * k.u[p][i], d);
            st.w[p][i] = s0.w[p][i] + h * k.dw[p][i];
        }
    for (std::size_t i = 0; i < st.m.size(); ++i) st.m[i] = onto_circle(s0.m[i] + h * k.um[i], d);
    if (sym) mirror_stage(st, d);
    return st;
}

// remove the normal part of w; true if it exceeded 1% of |w| somewhere
bool project_tangent(const std::vector<Point>& x, std::vector<Vec2>& w) {
    auto t = unit_tangents(ClosedCurve(x));
    bool flag = false;
    for (std::size_t i = 0; i < w.size(); ++i) {
        double wn = cross(t[i], w[i]);  // component along the left normal
        double m = norm(w[i]);
        if (std::abs(wn) > 0.01 * m) flag = true;
        w[i] = w[i] - wn * rot90(t[i]);
        if (!(norm(w[i]) >= 1e-12)) throw Error(ErrorKind::Degeneracy, "|w| fell below 1e-12");
    }
    return flag;
}

}  // namespace

void node_rates(const SimState& s, const StepConfig& cfg, std::vector<std::vector<Vec2>>& u, GradientSamples& g) {
    std::vector<std::vector<Point>> x;
    for (const auto& p : s.ps.patches) x.push_back(p.boundary.nodes());
    Rates r = rates_at(s.ps, x, {}, {}, cfg, x.size());
    u = std::move(r.u);
    g = std::move(r.g);
}

SimState step_rk4(const SimState& s, const StepConfig& cfg) {
    check_step_config(cfg);
    const bool sym = cfg.symmetry_axis;
    if (sym) check_pair(s.ps);
    const DiskDomain& d = s.ps.disk;
    const double dt = cfg.dt;
    const std::size_t np = s.ps.patches.size();
    const std::size_t active = sym ? 1 : np;

    Stage s0;
    for (const auto& p : s.ps.patches) s0.x.push_back(p.boundary.nodes());
    s0.w = s.w;
    s0.m = s.markers;

    Rates k1 = rates_at(s.ps, s0.x, s0.w, s0.m, cfg, active);
    Stage s1 = advance(s0, 0.5 * dt, k1, active, d, sym);
    Rates k2 = rates_at(s.ps, s1.x, s1.w, s1.m, cfg, active);
    Stage s2 = advance(s0, 0.5 * dt, k2, active, d, sym);
    Rates k3 = rates_at(s.ps, s2.x, s2.w, s2.m, cfg, active);
    Stage s3 = advance(s0, dt, k3, active, d, sym);
    Rates k4 = rates_at(s.ps, s3.x, s3.w, s3.m, cfg, active);

    Stage out = s0;
    const double h6 = dt / 6.0;
    const double R = d.radius;
    for (std::size_t p = 0; p < active; ++p)
        for (std::size_t i = 0; i < out.x[p].size(); ++i) {
            Vec2 du = k1.u[p][i] + 2.0 * k2.u[p][i] + 2.0 * k3.u[p][i] + k4.u[p][i];
            Point x = s0.x[p][i] + h6 * du;
            if (!finite(x)) throw Error(ErrorKind::Stability, "non-finite node position");
            double r = norm(x - d.center);
            // a straight step of length L along the boundary overshoots to sqrt(R^2 + L^2)
            double L = h6 * norm(du);
            if (r > std::sqrt(R * R + L * L) * (1.0 + 1e-8)) throw Error(ErrorKind::Stability, "node left the disk (dt too large)");
            out.x[p][i] = onto_disk(x, d);
            Vec2 w0 = s0.w[p][i];
            Vec2 dw = k1.dw[p][i] + 2.0 * k2.dw[p][i] + 2.0 * k3.dw[p][i] + k4.dw[p][i];
            out.w[p][i] = w0 + h6 * dw;
            if (!finite(out.w[p][i])) throw Error(ErrorKind::Stability, "non-finite w");
        }
    for (std::size_t i = 0; i < out.m.size(); ++i) {
        Vec2 du = k1.um[i] + 2.0 * k2.um[i] + 2.0 * k3.um[i] + k4.um[i];
        out.m[i] = onto_circle(s0.m[i] + h6 * du, d);
    }

    SimState n;
    n.ps.disk = d;
    n.projection_flag = false;
    for (std::size_t p = 0; p < active; ++p) n.projection_flag |= project_tangent(out.x[p], out.w[p]);
    if (sym) mirror_stage(out, d);
    for (std::size_t p = 0; p < np; ++p) n.ps.patches.push_back({s.ps.patches[p].theta, ClosedCurve(std::move(out.x[p]))});
    for (std::size_t p = 0; p < np; ++p)
        for (std::size_t q = p + 1; q < np; ++q)
            if (min_distance(n.ps.patches[p].boundary, n.ps.patches[q].boundary) <= 0.0)
                throw Error(ErrorKind::Topology, "patches " + std::to_string(p) + " and " + std::to_string(q) + " collided");
    n.w = std::move(out.w);
    n.markers = std::move(out.m);
    n.env = s.env;
    n.step_index = s.step_index + 1;
    n.t = s.t == static_cast<double>(s.step_index) * dt ? static_cast<double>(n.step_index) * dt : s.t + dt;
    return n;
}

TangentField evolve_tangent(const SimState& s, const GradientSamples& g, double dt, bool project, bool* flagged) {
    if (g.size() != s.w.size()) throw Error(ErrorKind::Misuse, "one gradient list per patch required");
    TangentField out = s.w;
    bool flag = false;
    for (std::size_t p = 0; p < s.w.size(); ++p) {
        if (g[p].size() != s.w[p].size()) throw Error(ErrorKind::Misuse, "gradient samples misaligned with w");
        for (std::size_t i = 0; i < s.w[p].size(); ++i) {
            const Mat2& G = g[p][i];
            Vec2 w0 = s.w[p][i];
            Vec2 k1 = G * w0;
            Vec2 k2 = G * (w0 + 0.5 * dt * k1);
            Vec2 k3 = G * (w0 + 0.5 * dt * k2);
            Vec2 k4 = G * (w0 + dt * k3);
            out[p][i] = w0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (project) {
            flag |= project_tangent(s.ps.patches[p].boundary.nodes(), out[p]);
        } else {
            for (const auto& v : out[p])
                if (!(norm(v) >= 1e-12)) throw Error(ErrorKind::Degeneracy, "|w| fell below 1e-12");
        }
    }
    if (flagged) *flagged = flag;
    return out;
}

SimState enforce_symmetry(const SimState& s) {
    check_pair(s.ps);
    SimState out = s;
    std::vector<Point> mn;
    std::vector<Vec2> mw;
    mirror_patch(s.ps.patches[0].boundary.nodes(), s.w.empty() ? std::vector<Vec2>{} : s.w[0], s.ps.disk, mn, mw);
    out.ps.patches[1].boundary = ClosedCurve(std::move(mn));
    if (out.w.size() == 2) out.w[1] = std::move(mw);
    return out;
}

double mirror_asymmetry(const SimState& s) {
    check_pair(s.ps);
    const auto& a = s.ps.patches[0].boundary;
    const auto& b = s.ps.patches[1].boundary;
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    const std::size_t n = a.size();
    double m = 0.0;
    for (std::size_t j = 0; j < n; ++j) m = std::max(m, norm(b[j] - mirror(a[(n - j) % n], s.ps.disk)));
    return m;
}

namespace {

// Node insertion and removal on one patch. Returns false when nothing changed.
bool redistribute_patch(const Patch& p, const std::vector<Vec2>& w, const DiskDomain& d, const StepConfig& cfg,
                        std::vector<Point>& nx, std::vector<Vec2>& nw) {
    const ClosedCurve& c = p.boundary;
    const std::size_t n = c.size();
    double period = 0.0;
    auto knots = chord_knots(c, period);
    PeriodicSpline sx(knots, period, c.nodes()), sw(knots, period, w);
    auto kap = curvature(c);
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) {
        double h = cfg.h_max;
        if (std::abs(kap[i]) > 0.0) h = std::min(h, cfg.curvature_refine / std::abs(kap[i]));
        target[i] = std::clamp(h, cfg.h_min, cfg.h_max);
    }
    const double R = d.radius;
    auto on_circle = [&](Point q) { return norm(q - d.center) >= R * (1.0 - 1e-12); };

    // removal: drop node i when it sits closer than h_min to the last kept node and
    // the gap that remains still honours the local target
    std::vector<char> keep(n, 1);
    std::size_t last = 0, kept = n;
    for (std::size_t i = 1; i < n; ++i) {
        std::size_t nx_i = (i + 1) % n;
        double gap = norm(c[i] - c[last]);
        double merged = norm(c[nx_i] - c[last]);
        if (gap < cfg.h_min && merged <= std::min(target[last], target[nx_i]) && kept > ClosedCurve::min_nodes) {
            keep[i] = 0;
            --kept;
        } else {
            last = i;
        }
    }
    bool changed = kept != n;
    nx.clear();
    nw.clear();
    for (std::size_t i = 0; i < n; ++i) {
        if (!keep[i]) continue;
        nx.push_back(c[i]);
        nw.push_back(w[i]);
        // next kept node
        std::size_t j = (i + 1) % n;
        while (!keep[j]) j = (j + 1) % n;
        double L = norm(c[j] - c[i]);
        double ht = std::min(target[i], target[j]);
        if (j != (i + 1) % n || L <= ht) continue;
        int k = static_cast<int>(std::ceil(L / ht)) - 1;
        if (k <= 0) continue;
        changed = true;
        double h = sx.piece_length(i);
        bool arc = on_circle(c[i]) && on_circle(c[j]);
        for (int m = 1; m <= k; ++m) {
            double u = h * m / (k + 1);
            Point q = sx.value(i, u);
            q = arc ? onto_circle(q, d) : onto_disk(q, d);
            nx.push_back(q);
            nw.push_back(sw.value(i, u));
        }
    }
    if (!changed) return false;
    if (nx.size() > cfg.max_nodes) throw Error(ErrorKind::ResolutionExhausted, "node count would exceed max_nodes");

    // restore the enclosed area with a uniform normal offset of the free nodes
    const double A0 = signed_area(c);
    for (int it = 0; it < 4; ++it) {
        ClosedCurve cur(nx);
        double A1 = signed_area(cur);
        if (std::abs(A1 - A0) <= 1e-15 * std::abs(A0)) break;
        auto t = unit_tangents(cur);
        const std::size_t m = nx.size();
        double pfree = 0.0;
        std::vector<char> fr(m);
        for (std::size_t i = 0; i < m; ++i) {
            fr[i] = !on_circle(nx[i]);
            if (fr[i]) pfree += 0.5 * (norm(nx[(i + 1) % m] - nx[i]) + norm(nx[i] - nx[(i + m - 1) % m]));
        }
        if (!(pfree > 0.0)) break;
        double delta = (A0 - A1) / pfree;
        for (std::size_t i = 0; i < m; ++i)
            if (fr[i]) nx[i] = onto_disk(nx[i] + delta * perp(t[i]), d);
    }
    return true;
}

}  // namespace

SimState redistribute(const SimState& s, const StepConfig& cfg) {
    check_step_config(cfg);
    const bool sym = cfg.symmetry_axis;
    if (sym) check_pair(s.ps);
    SimState out = s;
    bool any = false;
    const std::size_t active = sym ? 1 : s.ps.patches.size();
    for (std::size_t p = 0; p < active; ++p) {
        std::vector<Point> nx;
        std::vector<Vec2> nw;
        if (!redistribute_patch(s.ps.patches[p], s.w[p], s.ps.disk, cfg, nx, nw)) continue;
        any = true;
        out.ps.patches[p].boundary = ClosedCurve(std::move(nx));
        out.w[p] = std::move(nw);
    }
    if (!any) return s;
    if (sym) out = enforce_symmetry(out);
    return out;
}

std::int64_t step_count(double T, double dt) {
    if (!(T >= 0.0)) throw Error(ErrorKind::Misuse, "T must be non-negative");
    return static_cast<std::int64_t>(std::llround(T / dt));
}

SimState initial_state(const ScenarioSpec& sc, const RunOptions& opt) {
    InitialData init = make_scenario(sc);
    SimState s;
    s.ps = std::move(init.ps);
    s.w = std::move(init.w);
    s.markers = std::move(init.markers);
    if (opt.envelope_eps > 0.0) {
        s.env.active = true;
        s.env.a = std::pow(opt.envelope_eps, 10.0);
        s.env.b = opt.envelope_eps;
    }
    return s;
}

SimState run_from(SimState s, const StepConfig& cfg, const RunOptions& opt, RunSink& sink, bool resumed) {
    check_step_config(cfg);
    if (opt.diagnostics_every < 1) throw Error(ErrorKind::Misuse, "diagnostics_every must be >= 1");
    const std::int64_t nsteps = step_count(opt.T, cfg.dt);
    if (!resumed) {
        sink.record(compute_record(s, opt.diag), s);
        if (opt.snapshot_every > 0) sink.snapshot(s);
    }
    while (s.step_index < nsteps) {
        try {
            Envelope env = s.env;
            if (env.active) {
                EnvelopeStep e = envelope_track(s, env.a, env.b, cfg.dt, cfg.quad);
                env = {e.active, e.a, e.b};
                if (e.active && !(e.a > 0.0 && e.b > 0.0)) env.active = false;
            }
            SimState next = step_rk4(s, cfg);
            if (opt.redistribute_every > 0 && next.step_index % opt.redistribute_every == 0) next = redistribute(next, cfg);
            next.env = env;
            s = std::move(next);
        } catch (const Error& e) {
            sink.failed(s, e);
            throw;
        }
        if (s.step_index % opt.diagnostics_every == 0) sink.record(compute_record(s, opt.diag), s);
        if (opt.snapshot_every > 0 && s.step_index % opt.snapshot_every == 0) sink.snapshot(s);
    }
    return s;
}

SimState run(const ScenarioSpec& sc, const StepConfig& cfg, const RunOptions& opt, RunSink& sink) {
    if (!(opt.T >= 0.0)) throw Error(ErrorKind::Misuse, "T must be non-negative");
    return run_from(initial_state(sc, opt), cfg, opt, sink, false);
}

}  // namespace diskpatch
