#include "diskpatch/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "diskpatch/error.hpp"
#include "diskpatch/quadrature.hpp"

namespace diskpatch {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// uniform in [0, 1) from the top 53 bits; same on every platform
double unit(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

}  // namespace

double holder_quotient(const std::vector<Point>& x, const std::vector<Vec2>& w, double gamma, std::uint64_t seed) {
    const std::size_t n = x.size();
    if (n < 2 || w.size() != n) return 0.0;
    double best = 0.0;
    auto pair = [&](std::size_t i, std::size_t j) {
        if (i == j) return;
        double dx = norm(x[i] - x[j]);
        if (!(dx > 0.0)) return;
        best = std::max(best, norm(w[i] - w[j]) / std::pow(dx, gamma));
    };
    for (std::size_t i = 0; i < n; ++i) pair(i, (i + 1) % n);
    for (std::size_t i = 0; i < n; ++i) pair(i, (i + n / 2) % n);
    std::mt19937_64 g(seed);
    const int m = 1000;
    for (int k = 0; k < m; ++k) {
        double u = unit(g);
        std::size_t i = std::min<std::size_t>(n - 1, static_cast<std::size_t>((k + u) * n / m));
        std::size_t j = static_cast<std::size_t>(g() % n);
        pair(i, j);
    }
    return best;
}

CornerIntegrator::CornerIntegrator(const PatchSet& ps, int rows) {
    StripFrame fr(ps.disk);
    ytop_ = 2.0 * ps.disk.radius;
    ymin_ = 1e-7 * ps.disk.radius;
    std::vector<double> brk{ymin_, ytop_};
    for (const auto& p : ps.patches) {
        std::vector<Point> q;
        q.reserve(p.boundary.size());
        for (const auto& v : p.boundary.nodes()) q.push_back(fr.to_frame(v));
        const std::size_t n = q.size();
        // the crossing count changes only at vertices extremal in y
        for (std::size_t i = 0; i < n; ++i) {
            double y = q[i].x2, yp = q[(i + n - 1) % n].x2, yn = q[(i + 1) % n].x2;
            if ((yp - y) * (yn - y) >= 0.0 && y > ymin_ && y < ytop_) brk.push_back(y);
        }
        poly_.push_back(std::move(q));
        theta_.push_back(p.theta);
    }
    std::sort(brk.begin(), brk.end());
    std::vector<double> b;
    for (double y : brk)
        if (b.empty() || y > b.back() * (1.0 + 1e-12)) b.push_back(y);

    const GaussRule& g = gauss_legendre(8);
    const int panels = std::max(1, rows / 8);
    const double L = std::log(ytop_ / ymin_);
    edges_.push_back(b[0]);
    for (std::size_t k = 0; k + 1 < b.size(); ++k) {
        double l0 = std::log(b[k]), l1 = std::log(b[k + 1]);
        int nk = std::max(1, static_cast<int>(std::lround(panels * (l1 - l0) / L)));
        for (int j = 1; j <= nk; ++j) edges_.push_back(j == nk ? b[k + 1] : std::exp(l0 + (l1 - l0) * j / nk));
    }
    for (std::size_t k = 0; k + 1 < edges_.size(); ++k) {
        first_.push_back(y_.size());
        double l0 = std::log(edges_[k]), l1 = std::log(edges_[k + 1]);
        for (std::size_t q = 0; q < g.x.size(); ++q) {
            double y = std::exp(l0 + (l1 - l0) * g.x[q]);
            y_.push_back(y);
            wt_.push_back(g.w[q] * (l1 - l0) * y);
        }
    }
    first_.push_back(y_.size());

    // sweep the edges once and drop each crossing into its rows
    std::vector<std::vector<std::vector<double>>> xs(y_.size(), std::vector<std::vector<double>>(poly_.size()));
    for (std::size_t p = 0; p < poly_.size(); ++p) {
        const auto& q = poly_[p];
        for (std::size_t i = 0; i < q.size(); ++i) {
            Point a = q[i], c = q[(i + 1) % q.size()];
            double lo = std::min(a.x2, c.x2), hi = std::max(a.x2, c.x2);
            auto it = std::lower_bound(y_.begin(), y_.end(), lo);
            for (; it != y_.end() && *it < hi; ++it) {
                double y = *it;
                if ((a.x2 <= y) == (c.x2 <= y)) continue;
                xs[it - y_.begin()][p].push_back(a.x1 + (y - a.x2) * (c.x1 - a.x1) / (c.x2 - a.x2));
            }
        }
    }
    rows_.resize(y_.size());
    for (std::size_t r = 0; r < y_.size(); ++r)
        for (std::size_t p = 0; p < poly_.size(); ++p) {
            auto& v = xs[r][p];
            std::sort(v.begin(), v.end());
            for (std::size_t m = 0; m + 1 < v.size(); m += 2) rows_[r].push_back({v[m], v[m + 1], theta_[p]});
        }
}

std::vector<CornerIntegrator::Interval> CornerIntegrator::crossings(double y) const {
    std::vector<Interval> out;
    std::vector<double> v;
    for (std::size_t p = 0; p < poly_.size(); ++p) {
        const auto& q = poly_[p];
        v.clear();
        for (std::size_t i = 0; i < q.size(); ++i) {
            Point a = q[i], c = q[(i + 1) % q.size()];
            if ((a.x2 <= y) != (c.x2 <= y)) v.push_back(a.x1 + (y - a.x2) * (c.x1 - a.x1) / (c.x2 - a.x2));
        }
        std::sort(v.begin(), v.end());
        for (std::size_t m = 0; m + 1 < v.size(); m += 2) out.push_back({v[m], v[m + 1], theta_[p]});
    }
    return out;
}

// integral over y1 >= x1 of y1 y / (y1^2 + y^2)^2 across the row's intervals
double CornerIntegrator::row_value(const std::vector<Interval>& iv, double x1, double y) {
    double acc = 0.0;
    const double y2 = y * y;
    for (const auto& s : iv) {
        if (s.r <= x1) continue;
        double l = std::max(s.l, x1);
        acc += s.theta * 0.5 * y * (1.0 / (l * l + y2) - 1.0 / (s.r * s.r + y2));
    }
    return acc;
}

double CornerIntegrator::operator()(Point corner) const {
    const double x1 = std::max(corner.x1, 0.0);
    const double x2 = std::max(corner.x2, 0.0);
    if (poly_.empty() || x2 >= ytop_) return 0.0;
    const GaussRule& g = gauss_legendre(16);
    double acc = 0.0;
    std::size_t k0 = 0;
    if (x2 < ymin_) {
        for (std::size_t q = 0; q < g.x.size(); ++q) {
            double y = x2 + (ymin_ - x2) * g.x[q];
            acc += g.w[q] * (ymin_ - x2) * row_value(crossings(y), x1, y);
        }
    } else {
        k0 = std::upper_bound(edges_.begin(), edges_.end(), x2) - edges_.begin() - 1;
        double l0 = std::log(x2), l1 = std::log(edges_[k0 + 1]);
        for (std::size_t q = 0; q < g.x.size(); ++q) {
            double y = std::exp(l0 + (l1 - l0) * g.x[q]);
            acc += g.w[q] * (l1 - l0) * y * row_value(crossings(y), x1, y);
        }
        ++k0;
    }
    for (std::size_t r = first_[k0]; r < y_.size(); ++r) acc += wt_[r] * row_value(rows_[r], x1, y_[r]);
    return 4.0 / kPi * acc;
}

double corner_integral(const SimState& s, Point corner, int rows) {
    if (s.ps.patches.empty()) return 0.0;
    return CornerIntegrator(s.ps, rows)(corner);
}

ContactResult leftmost_contact(const SimState& s, double tol) {
    StripFrame fr(s.ps.disk);
    ContactResult out;
    out.marker = s.markers.empty() ? kNaN : fr.to_frame(s.markers[0]).x1;
    double near = std::numeric_limits<double>::infinity(), all = near;
    for (const auto& p : s.ps.patches) {
        if (!(p.theta > 0.0)) continue;
        for (const auto& v : p.boundary.nodes()) {
            double xf = fr.to_frame(v).x1;
            all = std::min(all, xf);
            if (s.ps.disk.radius - norm(v - s.ps.disk.center) <= tol) near = std::min(near, xf);
        }
    }
    if (std::isfinite(near)) {
        out.value = near;
    } else {
        out.contact = false;
        out.value = std::isfinite(all) ? all : kNaN;
    }
    return out;
}

EnvelopeStep envelope_track(const SimState& s, double a_prev, double b_prev, double dt, const QuadratureSpec& q) {
    const double R = s.ps.disk.radius;
    EnvelopeStep out{a_prev, b_prev, false};
    if (!(a_prev > 0.0 && a_prev < R && b_prev > 0.0 && b_prev < R)) return out;
    StripFrame fr(s.ps.disk);
    if (s.ps.patches.empty()) {
        out.active = true;
        return out;
    }
    VelocityField vf(s.ps, q);
    // u1 over the segment {x2 < x1} of D+ at fixed frame x1
    auto sweep = [&](double x1, bool want_max) {
        double lo = R - std::sqrt(R * R - x1 * x1), hi = x1;
        double best = want_max ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
        const int m = 64;
        for (int k = 0; k < m; ++k) {
            double x2 = lo + (k + 0.5) * (hi - lo) / m;
            double u1 = fr.velocity_to_frame(vf.velocity(fr.from_frame({x1, x2}))).x1;
            best = want_max ? std::max(best, u1) : std::min(best, u1);
        }
        return best;
    };
    out.a = a_prev + dt * sweep(a_prev, true);
    out.b = b_prev + dt * sweep(b_prev, false);
    out.active = true;
    return out;
}

DiagnosticsRecord compute_record(const SimState& s, const DiagnosticsOptions& opt) {
    DiagnosticsRecord r;
    r.t = s.t;
    const auto& ps = s.ps;
    r.delta_sep = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ps.patches.size(); ++k) {
        const auto& c = ps.patches[k].boundary;
        for (double kv : curvature(c)) r.kappa_max = std::max(r.kappa_max, std::abs(kv));
        r.areas.push_back(signed_area(c));
        for (std::size_t m = k + 1; m < ps.patches.size(); ++m)
            r.delta_sep = std::min(r.delta_sep, min_distance(c, ps.patches[m].boundary));
    }
    bool first = true;
    for (std::size_t k = 0; k < s.w.size(); ++k) {
        for (const auto& v : s.w[k]) {
            double m = norm(v);
            r.A_sup = first ? m : std::max(r.A_sup, m);
            r.A_inf = first ? m : std::min(r.A_inf, m);
            first = false;
        }
        if (k < ps.patches.size())
            r.A_gamma = std::max(r.A_gamma, holder_quotient(ps.patches[k].boundary.nodes(), s.w[k], opt.gamma, opt.seed + k));
    }
    r.x1_leftmost = ps.patches.empty() ? kNaN : leftmost_contact(s, opt.contact_tol).value;
    r.omega_corner = ps.patches.empty() ? 0.0 : CornerIntegrator(ps, opt.corner_rows)(opt.corner);
    if (s.env.active) {
        r.a_env = s.env.a;
        r.b_env = s.env.b;
    }
    return r;
}

DiagnosticsRecord compute_record(const SimState& s, double gamma) {
    DiagnosticsOptions o;
    o.gamma = gamma;
    return compute_record(s, o);
}

namespace {

struct Lsq {
    double c0 = 0.0, c1 = 0.0, r2 = 0.0;
    bool ok = false;
};

// least squares y = c0 + c1 f
Lsq fit_line(const std::vector<double>& f, const std::vector<double>& y) {
    const std::size_t n = y.size();
    double mf = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mf += f[i];
        my += y[i];
    }
    mf /= n;
    my /= n;
    double sff = 0.0, sfy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sff += (f[i] - mf) * (f[i] - mf);
        sfy += (f[i] - mf) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    Lsq out;
    if (!(sff > 0.0) || !std::isfinite(sff)) return out;
    out.c1 = sfy / sff;
    out.c0 = my - out.c1 * mf;
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = y[i] - out.c0 - out.c1 * f[i];
        res += e * e;
    }
    out.r2 = syy > 0.0 ? std::clamp(1.0 - res / syy, 0.0, 1.0) : 1.0;
    out.ok = true;
    return out;
}

}  // namespace

const char* model_name(GrowthModel m) {
    return m == GrowthModel::exponential ? "exponential" : "double_exponential";
}

GrowthFit fit_growth(const std::vector<std::pair<double, double>>& series) {
    if (series.size() < 10) throw Error(ErrorKind::DegenerateInput, "growth fit needs at least 10 samples");
    std::vector<double> t, y;
    for (auto [ti, vi] : series) {
        if (!(vi > 0.0) || !std::isfinite(vi) || !std::isfinite(ti))
            throw Error(ErrorKind::DegenerateInput, "growth fit needs positive finite values");
        t.push_back(ti);
        y.push_back(std::log(vi));
    }
    GrowthFit out;
    Lsq e = fit_line(t, y);
    // a log rise under 1e-6 is drift, not growth
    if (!e.ok || !(e.c1 > 0.0) || !(y.back() - y.front() > 1e-6))
        throw Error(ErrorKind::DegenerateInput, "series shows no growth trend");
    out.exp_fit = {{e.c0, e.c1}, e.r2};

    const double t0 = t.front();
    double span = 0.0;
    for (double ti : t) span = std::max(span, ti - t0);
    auto eval = [&](double b) {
        std::vector<double> f(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) f[i] = std::exp(b * (t[i] - t0));
        return fit_line(f, y);
    };
    const double bmax = std::min(20.0, 700.0 / std::max(span, 1e-300));
    const double bmin = 1e-3;
    const int scan = 400;
    double best_b = bmin, best_r2 = -1.0;
    int best_k = 0;
    for (int k = 0; k <= scan; ++k) {
        double b = bmin * std::pow(bmax / bmin, static_cast<double>(k) / scan);
        Lsq l = eval(b);
        if (l.ok && l.r2 > best_r2) {
            best_r2 = l.r2;
            best_b = b;
            best_k = k;
        }
    }
    // golden-section refinement of the rate in log b
    double lo = std::log(bmin) + (std::log(bmax) - std::log(bmin)) * std::max(0, best_k - 1) / scan;
    double hi = std::log(bmin) + (std::log(bmax) - std::log(bmin)) * std::min(scan, best_k + 1) / scan;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    auto score = [&](double lb) {
        Lsq l = eval(std::exp(lb));
        return l.ok ? l.r2 : -1.0;
    };
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = score(c), fd = score(d);
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        if (fc >= fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = score(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = score(d);
        }
    }
    double lb = 0.5 * (lo + hi);
    if (score(lb) >= best_r2) best_b = std::exp(lb);
    Lsq dfit = eval(best_b);
    out.dexp_fit = {{dfit.c0, dfit.c1 * std::exp(-best_b * t0), best_b}, dfit.r2};

    if (dfit.ok && dfit.r2 > e.r2 + 1e-12) {
        out.model = GrowthModel::double_exponential;
        out.params = out.dexp_fit.params;
        out.r2 = out.dexp_fit.r2;
    } else {
        out.model = GrowthModel::exponential;
        out.params = out.exp_fit.params;
        out.r2 = out.exp_fit.r2;
    }
    return out;
}

}  // namespace diskpatch
