#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "diskpatch/geometry.hpp"
#include "diskpatch/kernel.hpp"

namespace testsupport {

using namespace diskpatch;
inline constexpr double pi = std::numbers::pi;

inline ClosedCurve circle(Point c, double r, std::size_t n, double phase = 0.0) {
    std::vector<Point> v(n);
    for (std::size_t k = 0; k < n; ++k) {
        double t = phase + 2 * pi * k / n;
        v[k] = {c.x1 + r * std::cos(t), c.x2 + r * std::sin(t)};
    }
    return ClosedCurve(v);
}

// Ellipse with semi-axes a, b rotated by ang, nodes at equal parameter steps.
inline ClosedCurve ellipse_param(Point c, double a, double b, double ang, std::size_t n) {
    std::vector<Point> v(n);
    double ca = std::cos(ang), sa = std::sin(ang);
    for (std::size_t k = 0; k < n; ++k) {
        double t = 2 * pi * k / n;
        double p = a * std::cos(t), q = b * std::sin(t);
        v[k] = {c.x1 + ca * p - sa * q, c.x2 + sa * p + ca * q};
    }
    return ClosedCurve(v);
}

// Ellipse nodes at equal arclength, found by dense trapezoid integration of the
// analytic speed; nodes lie exactly on the ellipse.
inline ClosedCurve ellipse_arclength(Point c, double a, double b, double ang, std::size_t n) {
    const std::size_t m = 200000;
    std::vector<double> s(m + 1, 0.0);
    auto speed = [&](double t) { return std::hypot(a * std::sin(t), b * std::cos(t)); };
    double h = 2 * pi / m;
    for (std::size_t i = 0; i < m; ++i) s[i + 1] = s[i] + 0.5 * h * (speed(i * h) + speed((i + 1) * h));
    double total = s[m];
    std::vector<Point> v(n);
    double ca = std::cos(ang), sa = std::sin(ang);
    std::size_t j = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double target = total * k / n;
        while (j + 1 < m && s[j + 1] < target) ++j;
        double t = j * h;
        // Newton refinement against the local speed
        double sv = s[j];
        for (int it = 0; it < 20; ++it) {
            double err = sv - target;
            t -= err / speed(t);
            // recompute arclength from t_j with Simpson
            double t0 = j * h;
            double mid = 0.5 * (t0 + t);
            sv = s[j] + (t - t0) / 6.0 * (speed(t0) + 4 * speed(mid) + speed(t));
        }
        double p = a * std::cos(t), q = b * std::sin(t);
        v[k] = {c.x1 + ca * p - sa * q, c.x2 + sa * p + ca * q};
    }
    return ClosedCurve(v);
}

inline double ellipse_perimeter(double a, double b) {
    // dense Gauss-free midpoint sum, spectrally accurate for periodic integrands
    const int m = 100000;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        double t = 2 * pi * (i + 0.5) / m;
        acc += std::hypot(a * std::sin(t), b * std::cos(t));
    }
    return acc * 2 * pi / m;
}

inline PatchSet single(const ClosedCurve& c, double theta = 1.0, DiskDomain d = {}) {
    PatchSet ps;
    ps.disk = d;
    ps.patches.push_back({theta, c});
    return ps;
}

// Analytic row crossings of a rotated ellipse.
inline RowRegion ellipse_region(Point c, double a, double b, double ang, double theta) {
    RowRegion r;
    r.theta = theta;
    double ca = std::cos(ang), sa = std::sin(ang);
    // implicit form A x^2 + 2B x y + C y^2 = 1 in local translated coordinates
    double A = ca * ca / (a * a) + sa * sa / (b * b);
    double C = sa * sa / (a * a) + ca * ca / (b * b);
    double B = ca * sa * (1 / (a * a) - 1 / (b * b));
    double ymax = 1.0 / std::sqrt(C - B * B / A);
    r.lo2 = c.x2 - ymax;
    r.hi2 = c.x2 + ymax;
    r.crossings = [=](double y2) {
        double y = y2 - c.x2;
        double disc = B * B * y * y - A * (C * y * y - 1);
        if (disc <= 0) return std::vector<double>{};
        double sq = std::sqrt(disc);
        return std::vector<double>{c.x1 + (-B * y - sq) / A, c.x1 + (-B * y + sq) / A};
    };
    return r;
}

}  // namespace testsupport
