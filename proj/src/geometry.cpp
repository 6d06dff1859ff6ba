#include "diskpatch/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "diskpatch/error.hpp"
#include "diskpatch/quadrature.hpp"

namespace diskpatch {

ClosedCurve::ClosedCurve(std::vector<Point> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < min_nodes)
        throw Error(ErrorKind::InvalidResolution,
                    "closed curve needs at least 8 nodes, got " + std::to_string(nodes_.size()));
    for (const auto& p : nodes_)
        if (!std::isfinite(p.x1) || !std::isfinite(p.x2))
            throw Error(ErrorKind::DegenerateInput, "non-finite node");
}

Point invert_point(Point p, const DiskDomain& disk) {
    Vec2 z = p - disk.center;
    double r2 = norm2(z);
    if (r2 == 0.0) throw Error(ErrorKind::DegenerateInput, "inversion of the disk center");
    return disk.center + (disk.radius * disk.radius / r2) * z;
}

double signed_area(const ClosedCurve& c) {
    CompSum<double> s;
    Point o = c[0];
    for (std::size_t i = 0; i < c.size(); ++i) s.add(cross(c[i] - o, c[c.next(i)] - o));
    return 0.5 * s.value();
}

double perimeter(const ClosedCurve& c) {
    CompSum<double> s;
    for (std::size_t i = 0; i < c.size(); ++i) s.add(norm(c[c.next(i)] - c[i]));
    return s.value();
}

namespace {

int orient(Point a, Point b, Point c) {
    double v = cross(b - a, c - a);
    return (v > 0) - (v < 0);
}

bool on_segment(Point a, Point b, Point p) {
    return std::min(a.x1, b.x1) <= p.x1 && p.x1 <= std::max(a.x1, b.x1) && std::min(a.x2, b.x2) <= p.x2 &&
           p.x2 <= std::max(a.x2, b.x2);
}

bool segments_intersect(Point a, Point b, Point c, Point d) {
    int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

struct Box {
    double lo1, hi1, lo2, hi2;
};

Box seg_box(Point a, Point b) {
    return {std::min(a.x1, b.x1), std::max(a.x1, b.x1), std::min(a.x2, b.x2), std::max(a.x2, b.x2)};
}

double box_gap(const Box& a, const Box& b) {
    double g1 = std::max({0.0, a.lo1 - b.hi1, b.lo1 - a.hi1});
    double g2 = std::max({0.0, a.lo2 - b.hi2, b.lo2 - a.hi2});
    return std::hypot(g1, g2);
}

}  // namespace

double point_segment_distance(Point p, Point a, Point b) {
    Vec2 d = b - a;
    double l2 = norm2(d);
    if (l2 == 0.0) return norm(p - a);
    double t = std::clamp(dot(p - a, d) / l2, 0.0, 1.0);
    return norm(p - (a + t * d));
}

double segment_distance(Point a, Point b, Point c, Point d) {
    if (segments_intersect(a, b, c, d)) return 0.0;
    return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                     point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

double min_distance(const ClosedCurve& a, const ClosedCurve& b) {
    std::vector<Box> bb(b.size());
    for (std::size_t j = 0; j < b.size(); ++j) bb[j] = seg_box(b[j], b[b.next(j)]);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i) {
        Point p = a[i], q = a[a.next(i)];
        Box ba = seg_box(p, q);
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (box_gap(ba, bb[j]) >= best) continue;
            best = std::min(best, segment_distance(p, q, b[j], b[b.next(j)]));
            if (best == 0.0) return 0.0;
        }
    }
    return best;
}

double distance_to_curve(Point p, const ClosedCurve& c) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.size(); ++i) best = std::min(best, point_segment_distance(p, c[i], c[c.next(i)]));
    return best;
}

int winding_number(const ClosedCurve& c, Point p) {
    int wn = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        Point a = c[i], b = c[c.next(i)];
        if (a.x2 <= p.x2) {
            if (b.x2 > p.x2 && cross(b - a, p - a) > 0) ++wn;
        } else {
            if (b.x2 <= p.x2 && cross(b - a, p - a) < 0) --wn;
        }
    }
    return wn;
}

bool is_simple(const ClosedCurve& c) {
    const std::size_t n = c.size();
    std::vector<Box> bb(n);
    for (std::size_t i = 0; i < n; ++i) bb[i] = seg_box(c[i], c[c.next(i)]);
    for (std::size_t i = 0; i < n; ++i) {
        if (c[i] == c[c.next(i)]) return false;
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            const Box& a = bb[i];
            const Box& b = bb[j];
            if (a.lo1 > b.hi1 || b.lo1 > a.hi1 || a.lo2 > b.hi2 || b.lo2 > a.hi2) continue;
            if (segments_intersect(c[i], c[c.next(i)], c[j], c[c.next(j)])) return false;
        }
    }
    return true;
}

void check_curve(const ClosedCurve& c, const DiskDomain& disk) {
    if (c.size() < ClosedCurve::min_nodes) throw Error(ErrorKind::InvalidResolution, "curve has fewer than 8 nodes");
    for (const auto& p : c.nodes())
        if (!disk.contains(p)) throw Error(ErrorKind::InvalidPatch, "node outside the disk");
    if (signed_area(c) <= 0.0) throw Error(ErrorKind::InvalidPatch, "curve is not counterclockwise");
    if (!is_simple(c)) throw Error(ErrorKind::InvalidPatch, "curve is not simple");
}

// ---------------------------------------------------------------- spline

std::vector<double> chord_knots(const ClosedCurve& c, double& period) {
    std::vector<double> t(c.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        t[i] = acc;
        double h = norm(c[c.next(i)] - c[i]);
        if (!(h > 0.0)) throw Error(ErrorKind::DegenerateGeometry, "duplicate adjacent nodes at index " + std::to_string(i));
        acc += h;
    }
    period = acc;
    return t;
}

PeriodicSpline::PeriodicSpline(const ClosedCurve& c) {
    double period = 0.0;
    auto t = chord_knots(c, period);
    *this = PeriodicSpline(t, period, c.nodes());
}

PeriodicSpline::PeriodicSpline(const std::vector<double>& knots, double period, const std::vector<Vec2>& values)
    : t_(knots), y_(values), period_(period) {
    const std::size_t n = y_.size();
    if (n < 3 || knots.size() != n) throw Error(ErrorKind::Misuse, "spline needs matching knots and values");
    h_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double nxt = (i + 1 < n) ? t_[i + 1] : period_;
        h_[i] = nxt - t_[i];
        if (!(h_[i] > 0.0)) throw Error(ErrorKind::DegenerateGeometry, "non-increasing spline knots");
    }
    // cyclic tridiagonal: h_{i-1} M_{i-1} + 2(h_{i-1}+h_i) M_i + h_i M_{i+1} = rhs_i
    std::vector<double> a(n), b(n), cc(n);
    std::vector<Vec2> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t im = (i + n - 1) % n, ip = (i + 1) % n;
        a[i] = h_[im];
        b[i] = 2.0 * (h_[im] + h_[i]);
        cc[i] = h_[i];
        r[i] = 6.0 * ((y_[ip] - y_[i]) / h_[i] - (y_[i] - y_[im]) / h_[im]);
    }
    // Sherman-Morrison on the periodic corners.
    double alpha = cc[n - 1], beta = a[0];
    double gamma = -b[0];
    std::vector<double> bb(b);
    bb[0] = b[0] - gamma;
    bb[n - 1] = b[n - 1] - alpha * beta / gamma;
    auto solve = [&](std::vector<Vec2> rhs) {
        std::vector<double> cp(n);
        std::vector<Vec2> x(n);
        double beta0 = bb[0];
        x[0] = rhs[0] / beta0;
        for (std::size_t j = 1; j < n; ++j) {
            cp[j] = cc[j - 1] / beta0;
            beta0 = bb[j] - a[j] * cp[j];
            x[j] = (rhs[j] - a[j] * x[j - 1]) / beta0;
        }
        for (std::size_t j = n - 1; j-- > 0;) x[j] -= cp[j + 1] * x[j + 1];
        return x;
    };
    std::vector<Vec2> x = solve(r);
    std::vector<Vec2> u(n, Vec2{0.0, 0.0});
    u[0] = Vec2{gamma, gamma};
    u[n - 1] = Vec2{alpha, alpha};
    std::vector<Vec2> z = solve(u);
    double fact1 = (x[0].x1 + beta * x[n - 1].x1 / gamma) / (1.0 + z[0].x1 + beta * z[n - 1].x1 / gamma);
    double fact2 = (x[0].x2 + beta * x[n - 1].x2 / gamma) / (1.0 + z[0].x2 + beta * z[n - 1].x2 / gamma);
    m_.resize(n);
    for (std::size_t j = 0; j < n; ++j) m_[j] = {x[j].x1 - fact1 * z[j].x1, x[j].x2 - fact2 * z[j].x2};
}

Vec2 PeriodicSpline::value(std::size_t i, double u) const {
    std::size_t ip = (i + 1) % y_.size();
    double h = h_[i], v = h - u;
    return (v * v * v / (6.0 * h)) * m_[i] + (u * u * u / (6.0 * h)) * m_[ip] + (v / h) * (y_[i] - (h * h / 6.0) * m_[i]) +
           (u / h) * (y_[ip] - (h * h / 6.0) * m_[ip]);
}

Vec2 PeriodicSpline::d1(std::size_t i, double u) const {
    std::size_t ip = (i + 1) % y_.size();
    double h = h_[i], v = h - u;
    return (-v * v / (2.0 * h)) * m_[i] + (u * u / (2.0 * h)) * m_[ip] + (y_[ip] - y_[i]) / h -
           (h / 6.0) * (m_[ip] - m_[i]);
}

Vec2 PeriodicSpline::d2(std::size_t i, double u) const {
    std::size_t ip = (i + 1) % y_.size();
    double h = h_[i];
    return ((h - u) / h) * m_[i] + (u / h) * m_[ip];
}

std::size_t PeriodicSpline::locate(double t, double& u) const {
    t = std::fmod(t, period_);
    if (t < 0) t += period_;
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t i = (it == t_.begin()) ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
    u = std::clamp(t - t_[i], 0.0, h_[i]);
    return i;
}

Vec2 PeriodicSpline::at(double t) const {
    double u = 0.0;
    std::size_t i = locate(t, u);
    return value(i, u);
}

double spline_arclength(const PeriodicSpline& s, std::size_t i, double u) {
    const GaussRule& g = gauss_legendre(10);
    double acc = 0.0;
    for (std::size_t k = 0; k < g.x.size(); ++k) acc += g.w[k] * norm(s.d1(i, g.x[k] * u));
    return acc * u;
}

ClosedCurve resample_constant_speed(const ClosedCurve& c, std::size_t n) {
    if (n < ClosedCurve::min_nodes) throw Error(ErrorKind::InvalidResolution, "resample needs n >= 8");
    PeriodicSpline s(c);
    const std::size_t m = s.pieces();
    std::vector<double> cum(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) cum[i + 1] = cum[i] + spline_arclength(s, i, s.piece_length(i));
    const double total = cum[m];
    std::vector<Point> out(n);
    std::size_t piece = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double target = total * static_cast<double>(k) / static_cast<double>(n);
        while (piece + 1 < m && cum[piece + 1] <= target) ++piece;
        double local = target - cum[piece];
        double len = cum[piece + 1] - cum[piece];
        double h = s.piece_length(piece);
        double u = h * local / len;
        for (int it = 0; it < 30; ++it) {
            double f = spline_arclength(s, piece, u) - local;
            double fp = norm(s.d1(piece, u));
            double du = f / fp;
            u = std::clamp(u - du, 0.0, h);
            if (std::abs(du) < 1e-15 * h) break;
        }
        out[k] = (local == 0.0) ? c[piece] : s.value(piece, u);
    }
    return ClosedCurve(std::move(out));
}

std::vector<double> curvature(const ClosedCurve& c) {
    PeriodicSpline s(c);
    std::vector<double> k(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        Vec2 a = s.d1(i, 0.0), b = s.d2(i, 0.0);
        double sp = norm(a);
        k[i] = cross(a, b) / (sp * sp * sp);
    }
    return k;
}

std::vector<Vec2> unit_tangents(const ClosedCurve& c) {
    PeriodicSpline s(c);
    std::vector<Vec2> t(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        Vec2 a = s.d1(i, 0.0);
        t[i] = a / norm(a);
    }
    return t;
}

}  // namespace diskpatch
