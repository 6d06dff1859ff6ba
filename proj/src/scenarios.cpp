#include "diskpatch/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "diskpatch/error.hpp"
#include "diskpatch/quadrature.hpp"

namespace diskpatch {

namespace {

constexpr double kPi = std::numbers::pi;

// n points at equal arclength on a smooth closed curve gamma(t), t in [0, 2pi).
std::vector<double> equal_arclength_params(const std::function<Vec2(double)>& vel, std::size_t n) {
    const int panels = 2048;
    const GaussRule& g = gauss_legendre(10);
    const double h = 2 * kPi / panels;
    auto piece = [&](double a, double b) {
        double acc = 0.0;
        for (std::size_t q = 0; q < g.x.size(); ++q) acc += g.w[q] * norm(vel(a + (b - a) * g.x[q]));
        return acc * (b - a);
    };
    std::vector<double> cum(panels + 1, 0.0);
    for (int k = 0; k < panels; ++k) cum[k + 1] = cum[k] + piece(k * h, (k + 1) * h);
    const double total = cum[panels];
    std::vector<double> ts(n);
    for (std::size_t j = 0; j < n; ++j) {
        double target = total * static_cast<double>(j) / static_cast<double>(n);
        int k = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin()) - 1;
        k = std::clamp(k, 0, panels - 1);
        double t0 = k * h;
        double t = t0 + h * (target - cum[k]) / (cum[k + 1] - cum[k]);
        for (int it = 0; it < 30; ++it) {
            double err = cum[k] + piece(t0, t) - target;
            double dt = err / norm(vel(t));
            t = std::clamp(t - dt, t0, t0 + h);
            if (std::abs(dt) < 1e-15) break;
        }
        ts[j] = t;
    }
    return ts;
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::DegenerateInput, std::string(what) + " must be positive");
}

// Closed curve plus analytic w for the ellipse / perturbed-circle family.
std::pair<ClosedCurve, std::vector<Vec2>> smooth_patch(const ScenarioSpec& sp) {
    if (sp.N < ClosedCurve::min_nodes) throw Error(ErrorKind::InvalidResolution, "N must be at least 8");
    require_positive(sp.axis_a, "axis_a");
    const double ct = std::cos(sp.tilt), st = std::sin(sp.tilt);
    const Point c = sp.center;
    std::vector<Point> nodes(sp.N);
    std::vector<Vec2> w(sp.N);

    if (sp.shape == Shape::ellipse) {
        require_positive(sp.axis_b, "axis_b");
        const double a = sp.axis_a, b = sp.axis_b;
        auto pos = [&](double t) {
            double p = a * std::cos(t), q = b * std::sin(t);
            return Point{c.x1 + ct * p - st * q, c.x2 + st * p + ct * q};
        };
        auto vel = [&](double t) {
            double p = -a * std::sin(t), q = b * std::cos(t);
            return Vec2{ct * p - st * q, st * p + ct * q};
        };
        auto ts = equal_arclength_params(vel, sp.N);
        // phi = 1 - d^T Q d, Q = Rot diag(1/a^2, 1/b^2) Rot^T
        const double ia = 1.0 / (a * a), ib = 1.0 / (b * b);
        const double q11 = ct * ct * ia + st * st * ib, q22 = st * st * ia + ct * ct * ib;
        const double q12 = ct * st * (ia - ib);
        for (std::size_t j = 0; j < sp.N; ++j) {
            nodes[j] = pos(ts[j]);
            Vec2 d = nodes[j] - c;
            Vec2 grad{-2.0 * (q11 * d.x1 + q12 * d.x2), -2.0 * (q12 * d.x1 + q22 * d.x2)};
            w[j] = {grad.x2, -grad.x1};
        }
    } else {
        const double a = sp.axis_a, eps = sp.perturb_amp;
        const int m = sp.perturb_mode;
        if (!(std::abs(eps) < 1.0)) throw Error(ErrorKind::DegenerateInput, "perturb_amp must be below 1");
        auto rad = [&](double t) { return a * (1.0 + eps * std::cos(m * t)); };
        auto drad = [&](double t) { return -a * eps * m * std::sin(m * t); };
        auto vel = [&](double t) {
            double r = rad(t), dr = drad(t), ang = t + sp.tilt;
            return Vec2{dr * std::cos(ang) - r * std::sin(ang), dr * std::sin(ang) + r * std::cos(ang)};
        };
        auto ts = equal_arclength_params(vel, sp.N);
        for (std::size_t j = 0; j < sp.N; ++j) {
            double t = ts[j], ang = t + sp.tilt;
            double r = rad(t);
            nodes[j] = {c.x1 + r * std::cos(ang), c.x2 + r * std::sin(ang)};
            // phi = 1 - |d|^2 / r(t)^2, gradient in polar components at |d| = r
            double dphi_dr = -2.0 / r;
            double dphi_dt = 2.0 * drad(t) / (r * r);  // (1/|d|) d phi / d t at |d| = r
            Vec2 er{std::cos(ang), std::sin(ang)}, et{-std::sin(ang), std::cos(ang)};
            Vec2 grad = dphi_dr * er + dphi_dt * et;
            w[j] = {grad.x2, -grad.x1};
        }
    }
    ClosedCurve cur(std::move(nodes));
    check_curve(cur, sp.disk);
    return {std::move(cur), std::move(w)};
}

}  // namespace

void mirror_patch(const std::vector<Point>& nodes, const std::vector<Vec2>& w, const DiskDomain& d,
                  std::vector<Point>& out_nodes, std::vector<Vec2>& out_w) {
    const std::size_t n = nodes.size();
    out_nodes.resize(n);
    out_w.resize(w.size());
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t k = (n - j) % n;
        out_nodes[j] = mirror(nodes[k], d);
        if (k < w.size()) out_w[j] = {w[k].x1, -w[k].x2};
    }
}

InitialData make_single_patch(const ScenarioSpec& spec) {
    if (spec.theta == 0.0) throw Error(ErrorKind::DegenerateInput, "patch strength must be nonzero");
    auto [cur, w] = smooth_patch(spec);
    InitialData out;
    out.ps.disk = spec.disk;
    out.ps.patches.push_back({spec.theta, std::move(cur)});
    out.w.push_back(std::move(w));
    return out;
}

InitialData make_symmetric_pair(const ScenarioSpec& spec) {
    auto [cur, w] = smooth_patch(spec);
    for (const auto& p : cur.nodes())
        if (!(p.x1 > spec.disk.center.x1)) throw Error(ErrorKind::InvalidPatch, "base patch crosses the symmetry axis");
    std::vector<Point> mn;
    std::vector<Vec2> mw;
    mirror_patch(cur.nodes(), w, spec.disk, mn, mw);
    InitialData out;
    out.ps.disk = spec.disk;
    out.ps.patches.push_back({1.0, std::move(cur)});
    out.ps.patches.push_back({-1.0, ClosedCurve(std::move(mn))});
    out.w.push_back(std::move(w));
    out.w.push_back(std::move(mw));
    return out;
}

StripGeometry strip_geometry(const DiskDomain& d, double s, double rho) {
    const Point c = d.center;
    const double R = d.radius;
    const double h = std::sqrt((R - rho) * (R - rho) - (s + rho) * (s + rho));
    StripGeometry g;
    g.top_fillet = {c.x1 + s + rho, c.x2 + h};
    g.bottom_fillet = {c.x1 + s + rho, c.x2 - h};
    g.top_touch = c + (g.top_fillet - c) * (R / (R - rho));
    g.bottom_touch = c + (g.bottom_fillet - c) * (R / (R - rho));
    g.top_chord = {c.x1 + s, g.top_fillet.x2};
    g.bottom_chord = {c.x1 + s, g.bottom_fillet.x2};
    return g;
}

namespace {

struct Piece {
    bool arc = true;
    Point c;          // arc centre, or segment start
    double r = 0.0;   // arc radius
    double a0 = 0.0;  // start angle (counterclockwise arcs)
    Vec2 dir;         // segment direction
    double len = 0.0;

    Point pos(double u) const {
        if (!arc) return c + u * dir;
        double a = a0 + u / r;
        return {c.x1 + r * std::cos(a), c.x2 + r * std::sin(a)};
    }
};

}  // namespace

InitialData make_ks_example(const ScenarioSpec& spec) {
    const DiskDomain& d = spec.disk;
    const double R = d.radius, s = spec.strip, rho = spec.rounding;
    if (!(s > 0.0 && s < 0.25 * R)) throw Error(ErrorKind::DegenerateInput, "strip half-width must lie in (0, R/4)");
    if (!(rho > 0.0 && rho < 0.5 * s)) throw Error(ErrorKind::DegenerateInput, "rounding radius must lie in (0, s/2)");
    if (spec.N < ClosedCurve::min_nodes) throw Error(ErrorKind::InvalidResolution, "N must be at least 8");
    const Point c = d.center;
    const StripGeometry g = strip_geometry(d, s, rho);

    const double bt = std::atan2(g.top_fillet.x2 - c.x2, g.top_fillet.x1 - c.x1);
    const double bb = std::atan2(g.bottom_fillet.x2 - c.x2, g.bottom_fillet.x1 - c.x1);
    // counterclockwise: disk arc, upper fillet, chord downwards, lower fillet
    std::vector<Piece> pieces(4);
    pieces[0] = {true, c, R, bb, {}, R * (bt - bb)};
    pieces[1] = {true, g.top_fillet, rho, bt, {}, rho * (kPi - bt)};
    pieces[2] = {false, g.top_chord, 0.0, 0.0, {0.0, -1.0}, g.top_chord.x2 - g.bottom_chord.x2};
    pieces[3] = {true, g.bottom_fillet, rho, kPi, {}, rho * (bb + kPi)};

    std::vector<double> start(5, 0.0);
    for (int k = 0; k < 4; ++k) start[k + 1] = start[k] + pieces[k].len;
    const double P = start[4];

    // node density 1 + K / (1 + dist/rho)^2, dist = arclength distance to a fillet;
    // K puts about half of the nodes near the two corners
    const double K = P / (2.0 * rho * (0.5 * kPi + 2.0));
    auto dist_to = [&](double x, double lo, double hi) {
        if (x >= lo && x <= hi) return 0.0;
        double a = std::fmod(lo - x + 2 * P, P), b = std::fmod(x - hi + 2 * P, P);
        return std::min(a, b);
    };
    auto density = [&](double x) {
        double dd = std::min(dist_to(x, start[1], start[2]), dist_to(x, start[3], start[4]));
        double q = 1.0 + dd / rho;
        return 1.0 + K / (q * q);
    };
    std::vector<double> xs, ms;
    xs.push_back(0.0);
    ms.push_back(0.0);
    for (int k = 0; k < 4; ++k) {
        int n = pieces[k].arc && pieces[k].r == rho ? 4000 : 60000;
        for (int i = 1; i <= n; ++i) {
            double x0 = start[k] + pieces[k].len * (i - 1) / n, x1 = start[k] + pieces[k].len * i / n;
            xs.push_back(x1);
            ms.push_back(ms.back() + 0.5 * (x1 - x0) * (density(x0) + density(x1)));
        }
    }
    const double Mtot = ms.back();

    // w magnitude from phi = (x1 - c1 - s)(R^2 - |x - c|^2), linear across the fillets
    const double mT = 2.0 * R * (g.top_touch.x1 - c.x1 - s);
    const double mC = R * R - norm2(g.top_chord - c);

    const std::size_t N = spec.N;
    std::vector<Point> nodes(N);
    std::vector<Vec2> w(N);
    for (std::size_t j = 0; j < N; ++j) {
        double target = Mtot * static_cast<double>(j) / static_cast<double>(N);
        std::size_t i = std::upper_bound(ms.begin(), ms.end(), target) - ms.begin();
        i = std::clamp<std::size_t>(i, 1, ms.size() - 1);
        double f = (target - ms[i - 1]) / (ms[i] - ms[i - 1]);
        double x = xs[i - 1] + f * (xs[i] - xs[i - 1]);
        int k = 0;
        while (k < 3 && x >= start[k + 1]) ++k;
        double u = std::clamp(x - start[k], 0.0, pieces[k].len);
        Point p = pieces[k].pos(u);
        double mag;
        if (k == 0) {
            p = c + (p - c) * (R / norm(p - c));
            mag = 2.0 * R * (p.x1 - c.x1 - s);
        } else if (k == 2) {
            mag = R * R - norm2(p - c);
        } else {
            double fr = u / pieces[k].len;
            mag = k == 1 ? mT + (mC - mT) * fr : mC + (mT - mC) * fr;
        }
        nodes[j] = p;
        w[j] = {mag, 0.0};
    }
    ClosedCurve cur(std::move(nodes));
    // direction from the discrete (spline) tangent: the analytic one jumps in
    // curvature where the fillets meet, which the node spline smooths out
    auto tan = unit_tangents(cur);
    double mmin = w[0].x1;
    for (const auto& v : w) mmin = std::min(mmin, v.x1);
    for (std::size_t j = 0; j < N; ++j) w[j] = tan[j] * (w[j].x1 / mmin);

    check_curve(cur, d);
    std::vector<Point> mn;
    std::vector<Vec2> mw;
    mirror_patch(cur.nodes(), w, d, mn, mw);
    InitialData out;
    out.ps.disk = d;
    out.ps.patches.push_back({1.0, std::move(cur)});
    out.ps.patches.push_back({-1.0, ClosedCurve(std::move(mn))});
    out.w.push_back(std::move(w));
    out.w.push_back(std::move(mw));
    validate(out.ps);

    Point marker = g.top_touch;
    if (spec.marker_x1 > 0.0) {
        double mx = spec.marker_x1;
        if (!(mx < R)) throw Error(ErrorKind::DegenerateInput, "marker outside the disk");
        marker = {c.x1 + mx, c.x2 + std::sqrt(R * R - mx * mx)};
    }
    out.markers.push_back(marker);
    return out;
}

InitialData make_scenario(const ScenarioSpec& spec) {
    switch (spec.kind) {
        case ScenarioKind::single_patch: return make_single_patch(spec);
        case ScenarioKind::symmetric_pair: return make_symmetric_pair(spec);
        case ScenarioKind::ks_example: return make_ks_example(spec);
    }
    throw Error(ErrorKind::Misuse, "unknown scenario kind");
}

}  // namespace diskpatch
