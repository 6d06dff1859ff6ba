#include <algorithm>
#include <cmath>
#include <numbers>

#include "diskpatch/error.hpp"
#include "diskpatch/kernel.hpp"
#include "diskpatch/quadrature.hpp"

namespace diskpatch {

namespace {

constexpr double kPi = std::numbers::pi;

// Tanh-sinh nodes on [lo, hi]; endpoints may carry integrable singularities.
template <class F>
void tanh_sinh(double lo, double hi, int n, F&& f) {
    const double tmax = 3.2;
    const double h = tmax / n;
    const double half = 0.5 * (hi - lo);
    for (int k = -n; k <= n; ++k) {
        double t = k * h;
        double s = 0.5 * kPi * std::sinh(t);
        double ch = std::cosh(s);
        double w = h * 0.5 * kPi * std::cosh(t) / (ch * ch) * half;
        // distance to the nearer endpoint, computed without cancellation
        double gap = half * 2.0 / (std::exp(2.0 * std::abs(s)) + 1.0);
        double y = s >= 0 ? hi - gap : lo + gap;
        if (gap <= 0.0 || w <= 0.0) continue;
        f(y, w);
    }
}

}  // namespace

RowRegion polygon_region(const Patch& p) {
    RowRegion r;
    r.theta = p.theta;
    const auto& c = p.boundary;
    r.lo2 = r.hi2 = c[0].x2;
    for (const auto& q : c.nodes()) {
        r.lo2 = std::min(r.lo2, q.x2);
        r.hi2 = std::max(r.hi2, q.x2);
    }
    std::vector<Point> nodes = c.nodes();
    r.crossings = [nodes](double y) {
        std::vector<double> xs;
        const std::size_t n = nodes.size();
        for (std::size_t i = 0; i < n; ++i) {
            Point a = nodes[i], b = nodes[(i + 1) % n];
            if ((a.x2 <= y) != (b.x2 <= y)) xs.push_back(a.x1 + (y - a.x2) * (b.x1 - a.x1) / (b.x2 - a.x2));
        }
        std::sort(xs.begin(), xs.end());
        return xs;
    };
    return r;
}

Vec2 oracle_velocity_area(const DiskDomain& disk, const std::vector<RowRegion>& regions, Point x, int cells) {
    if (cells < 64) throw Error(ErrorKind::InvalidResolution, "oracle needs at least 64 cells");
    if (!disk.contains(x, 1e-8)) throw Error(ErrorKind::Domain, "oracle point outside the closed disk");
    const GaussRule& g = gauss_legendre(20);
    CompSum<double> s1, s2;
    for (const auto& reg : regions) {
        const double th = reg.theta;
        auto row = [&](double y2, double wy) {
            auto xs = reg.crossings(y2);
            const double d = x.x2 - y2;
            for (std::size_t m = 0; m + 1 < xs.size(); m += 2) {
                const double l = xs[m], r = xs[m + 1];
                if (!(r > l)) continue;
                // free part: closed form along the row
                double i1 = 0.0;
                if (d != 0.0) i1 = std::atan((x.x1 - l) / d) - std::atan((x.x1 - r) / d);
                const double el = x.x1 - l, er = x.x1 - r;
                double i2 = 0.5 * std::log((er * er + d * d) / (el * el + d * d));
                if (!std::isfinite(i2)) i2 = 0.0;
                double f1 = -th / (2 * kPi) * i1;
                double f2 = -th / (2 * kPi) * i2;
                // image part: (x - y*)^perp / |x - y*|^2 over the row
                int pieces = std::max(1, static_cast<int>(std::ceil((r - l) / (disk.radius * 0.05))));
                double g1 = 0.0, g2 = 0.0;
                for (int p = 0; p < pieces; ++p) {
                    double a = l + (r - l) * p / pieces, b = l + (r - l) * (p + 1) / pieces;
                    for (std::size_t q = 0; q < g.x.size(); ++q) {
                        Point y{a + (b - a) * g.x[q], y2};
                        Point ys = invert_point(y, disk);
                        Vec2 e = x - ys;
                        double ww = g.w[q] * (b - a) / norm2(e);
                        g1 += ww * e.x2;
                        g2 -= ww * e.x1;
                    }
                }
                f1 += th / (2 * kPi) * g1;
                f2 += th / (2 * kPi) * g2;
                s1.add(wy * f1);
                s2.add(wy * f2);
            }
        };
        // split the rows at x2 so the free part's jump sits on an endpoint
        std::vector<double> cuts{reg.lo2};
        if (x.x2 > reg.lo2 && x.x2 < reg.hi2) cuts.push_back(x.x2);
        cuts.push_back(reg.hi2);
        const double span = reg.hi2 - reg.lo2;
        if (!(span > 0.0)) continue;
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            double lo = cuts[c], hi = cuts[c + 1];
            int n = std::max(16, static_cast<int>(std::lround(0.5 * cells * (hi - lo) / span)));
            tanh_sinh(lo, hi, n, row);
        }
    }
    return {s1.value(), s2.value()};
}

Vec2 oracle_velocity_area(const PatchSet& ps, Point x, int cells) {
    std::vector<RowRegion> regs;
    for (const auto& p : ps.patches) regs.push_back(polygon_region(p));
    return oracle_velocity_area(ps.disk, regs, x, cells);
}

}  // namespace diskpatch
