#include <doctest.h>
#include <algorithm>

#include <cmath>

#include "diskpatch/diagnostics.hpp"
#include "diskpatch/dynamics.hpp"
#include "diskpatch/error.hpp"
#include "support.hpp"

using namespace diskpatch;
using testsupport::pi;

namespace {

// rectangle [x1, X] x [x2, Y] in strip-frame coordinates, as a positive patch
SimState frame_rectangle(double x1, double X, double x2, double Y, double theta = 1.0) {
    DiskDomain d;
    StripFrame f(d);
    std::vector<Point> v;
    const int m = 16;
    for (int k = 0; k < m; ++k) v.push_back(f.from_frame({x1 + (X - x1) * k / m, x2}));
    for (int k = 0; k < m; ++k) v.push_back(f.from_frame({X, x2 + (Y - x2) * k / m}));
    for (int k = 0; k < m; ++k) v.push_back(f.from_frame({X - (X - x1) * k / m, Y}));
    for (int k = 0; k < m; ++k) v.push_back(f.from_frame({x1, Y - (Y - x2) * k / m}));
    // the frame is a reflection: reverse to keep counterclockwise order
    std::reverse(v.begin(), v.end());
    SimState s;
    s.ps.patches.push_back({theta, ClosedCurve(v)});
    s.w.assign(1, std::vector<Vec2>(v.size(), Vec2{1.0, 0.0}));
    return s;
}

// closed form of (4/pi) * int_{[a,X]x[b,Y]} y1 y2 / |y|^4 dy
double rectangle_closed_form(double a, double X, double b, double Y) {
    auto F = [&](double y1) { return std::log(y1 * y1 + b * b) - std::log(y1 * y1 + Y * Y); };
    return (F(X) - F(a)) / pi;
}

std::vector<std::pair<double, double>> series(double (*f)(double), double t1, int n) {
    std::vector<std::pair<double, double>> out;
    for (int i = 0; i < n; ++i) {
        double t = t1 * i / (n - 1);
        out.push_back({t, f(t)});
    }
    return out;
}

}  // namespace

TEST_CASE("compute_record on a circle with unit-tangent w") {
    const double a = 0.4;
    SimState s;
    s.ps.patches.push_back({1.0, testsupport::circle({0.1, 0.0}, a, 256)});
    std::vector<Vec2> w;
    for (const auto& p : s.ps.patches[0].boundary.nodes()) {
        Vec2 d = p - Point{0.1, 0.0};
        w.push_back(rot90(d) / norm(d));
    }
    s.w.push_back(w);
    for (double g : {0.25, 0.5, 0.75}) {
        DiagnosticsRecord r = compute_record(s, g);
        CHECK(r.A_sup == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(r.A_inf == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(r.A_gamma == doctest::Approx(std::pow(2.0, 1 - g) * std::pow(a, -g)).epsilon(1e-12));
        CHECK(r.kappa_max == doctest::Approx(1 / a).epsilon(1e-3));
        CHECK(std::isinf(r.delta_sep));
        REQUIRE(r.areas.size() == 1);
        CHECK(r.areas[0] == doctest::Approx(signed_area(s.ps.patches[0].boundary)));
    }
}

TEST_CASE("holder_quotient: identical w gives zero") {
    std::vector<Point> x{{0, 0}, {0.1, 0}};
    std::vector<Vec2> w{{1, 2}, {1, 2}};
    CHECK(holder_quotient(x, w, 0.5, 1) == 0.0);
}

TEST_CASE("two-patch record: delta_sep is min_distance") {
    ScenarioSpec sp;
    sp.kind = ScenarioKind::symmetric_pair;
    sp.axis_a = 0.2;
    sp.axis_b = 0.1;
    sp.center = {0.3, 0.1};
    sp.N = 64;
    SimState s = initial_state(sp, {});
    DiagnosticsRecord r = compute_record(s);
    CHECK(r.delta_sep == min_distance(s.ps.patches[0].boundary, s.ps.patches[1].boundary));
    CHECK(r.areas.size() == 2);
    CHECK(r.A_inf <= r.A_sup);
}

TEST_CASE("corner integral: zero vorticity") {
    SimState s;
    CHECK(corner_integral(s, {1e-2, 1e-2}) == 0.0);
}

TEST_CASE("corner integral against the rectangle closed form") {
    struct Case {
        double a, X, b, Y;
        Point corner;
    };
    for (Case c : {Case{0.02, 0.3, 0.05, 0.6, {0.01, 0.01}}, Case{0.005, 0.3, 0.05, 0.6, {0.01, 0.01}},
                   Case{0.1, 0.4, 0.1, 0.5, {0.2, 0.3}}, Case{0.03, 0.2, 0.005, 0.3, {0.001, 0.02}}}) {
        SimState s = frame_rectangle(c.a, c.X, c.b, c.Y);
        double lo1 = std::max(c.a, c.corner.x1), lo2 = std::max(c.b, c.corner.x2);
        double exact = rectangle_closed_form(lo1, c.X, lo2, c.Y);
        CHECK(std::abs(corner_integral(s, c.corner) - exact) <= 1e-4);
    }
    // strength scales linearly
    SimState s = frame_rectangle(0.02, 0.3, 0.05, 0.6, 2.5);
    CHECK(corner_integral(s, {0.01, 0.01}) == doctest::Approx(2.5 * rectangle_closed_form(0.02, 0.3, 0.05, 0.6)).epsilon(1e-4));
}

TEST_CASE("corner integral is monotone under inclusion") {
    double small = corner_integral(frame_rectangle(0.05, 0.2, 0.05, 0.3), {0.01, 0.01});
    double big = corner_integral(frame_rectangle(0.03, 0.3, 0.02, 0.5), {0.01, 0.01});
    CHECK(small > 0.0);
    CHECK(big >= small);
}

TEST_CASE("corner integral on the strip data converges as rows double") {
    ScenarioSpec sp;
    sp.kind = ScenarioKind::ks_example;
    sp.N = 512;
    SimState s = initial_state(sp, {});
    double a = corner_integral(s, {1e-2, 1e-2}, 2000);
    double b = corner_integral(s, {1e-2, 1e-2}, 4000);
    double c = corner_integral(s, {1e-2, 1e-2}, 8000);
    CHECK(a > 0.0);
    CHECK(std::abs(c - b) <= std::abs(b - a) + 1e-12);
    CHECK(std::abs(c - b) <= 1e-6 * std::abs(c));
}

TEST_CASE("leftmost_contact at t = 0") {
    ScenarioSpec sp;
    sp.kind = ScenarioKind::ks_example;
    sp.N = 512;
    sp.marker_x1 = 1e-2;
    SimState s = initial_state(sp, {});
    ContactResult c = leftmost_contact(s);
    CHECK(c.contact);
    CHECK(c.marker == doctest::Approx(1e-2).epsilon(1e-12));
    // the near-boundary nodes sit on the upper fillet, between the strip edge and the tangency point
    StripGeometry g = strip_geometry(sp.disk, sp.strip, sp.rounding);
    CHECK(c.value > sp.strip);
    CHECK(c.value <= StripFrame(sp.disk).to_frame(g.top_touch).x1 + 1e-12);

    SimState none;
    none.ps.patches.push_back({1.0, testsupport::circle({0.0, 0.0}, 0.3, 32)});
    none.w.assign(1, std::vector<Vec2>(32, Vec2{1, 0}));
    ContactResult n = leftmost_contact(none);
    CHECK_FALSE(n.contact);
    CHECK(n.value == doctest::Approx(-0.3));
    CHECK(std::isnan(n.marker));
}

TEST_CASE("envelope_track: zero vorticity, ordering, disabled outside (0, 1)") {
    SimState empty;
    EnvelopeStep e = envelope_track(empty, 0.1, 0.2, 0.5);
    CHECK(e.active);
    CHECK(e.a == 0.1);
    CHECK(e.b == 0.2);

    ScenarioSpec sp;
    sp.kind = ScenarioKind::ks_example;
    sp.N = 256;
    SimState s = initial_state(sp, {});
    double a = 0.05, b = 0.05;
    for (int k = 0; k < 5; ++k) {
        EnvelopeStep n = envelope_track(s, a, b, 0.1);
        REQUIRE(n.active);
        CHECK(n.a >= n.b);
        a = n.a;
        b = n.b;
    }
    CHECK_FALSE(envelope_track(s, 0.0, 0.2, 0.1).active);
    CHECK_FALSE(envelope_track(s, 0.1, 1.0, 0.1).active);
}

TEST_CASE("fit_growth on synthetic series") {
    GrowthFit e = fit_growth(series([](double t) { return std::exp(2 * t); }, 3.0, 50));
    CHECK(e.model == GrowthModel::exponential);
    CHECK(e.params[1] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(e.r2 >= 1 - 1e-9);

    GrowthFit d = fit_growth(series([](double t) { return std::exp(std::exp(t)); }, 4.0, 60));
    CHECK(d.model == GrowthModel::double_exponential);
    CHECK(std::abs(d.params[2] - 1.0) <= 1e-3);
    CHECK(d.r2 >= d.exp_fit.r2);
    CHECK(std::string(model_name(d.model)) == "double_exponential");

    CHECK_THROWS_AS(fit_growth(series([](double) { return 3.0; }, 1.0, 20)), Error);
    CHECK_THROWS_AS(fit_growth(series([](double t) { return t - 0.5; }, 1.0, 20)), Error);
    CHECK_THROWS_AS(fit_growth(series([](double t) { return std::exp(t); }, 1.0, 5)), Error);
}
