#include "diskpatch/bounds_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <json.hpp>

#include "diskpatch/error.hpp"
#include "diskpatch/parallel.hpp"
#include "diskpatch/quadrature.hpp"

namespace diskpatch {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kSeed = 20240601;

double log_plus(double a) { return a > 1.0 ? std::log(a) : 0.0; }

double unit(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

std::string key(const char* fmt, double a, double b = 0.0) {
    char buf[96];
    std::snprintf(buf, sizeof buf, fmt, a, b);
    return buf;
}

// relative change between two sups; both tiny counts as no change
double rel_change(double a, double b, double floor = 0.0) {
    double m = std::max(std::abs(a), std::abs(b));
    if (m <= floor) return 0.0;
    return std::abs(a - b) / m;
}

// Polar rule on the disk |y - p| < r for integrands with a near-singularity at
// distance gap outside it: trapezoid in angle, Gauss panels in radius graded
// toward the rim.
struct DiskRule {
    std::vector<Point> y;
    std::vector<double> w;
};

DiskRule disk_rule(Point p, double r, double gap, int cells) {
    if (cells < 4) throw Error(ErrorKind::InvalidResolution, "disk rule needs at least 4 angular cells");
    std::vector<double> edges{0.0};
    double e = 0.5 * r;
    for (int k = 0; k < 60 && r - e > 0.125 * gap; ++k) {
        edges.push_back(e);
        e = r - 0.5 * (r - e);
    }
    edges.push_back(r);
    const GaussRule& g = gauss_legendre(32);
    DiskRule out;
    out.y.reserve(static_cast<std::size_t>(cells) * 32 * (edges.size() - 1));
    const double dpsi = 2 * kPi / cells;
    for (int j = 0; j < cells; ++j) {
        double psi = dpsi * j;
        Vec2 dir{std::cos(psi), std::sin(psi)};
        for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
            double a = edges[k], b = edges[k + 1];
            for (std::size_t q = 0; q < g.x.size(); ++q) {
                double rho = a + (b - a) * g.x[q];
                out.y.push_back(p + rho * dir);
                out.w.push_back(g.w[q] * (b - a) * rho * dpsi);
            }
        }
    }
    return out;
}

Point tangent_center(double r) { return {0.0, -r}; }

}  // namespace

const char* verdict_name(Verdict v) { return v == Verdict::bounded ? "bounded" : "unbounded-trend"; }

double BoundReport::detail(const std::string& k) const {
    for (const auto& [name, v] : details)
        if (name == k) return v;
    return kNaN;
}

std::string to_json(const BoundReport& r) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["samples"] = r.samples;
    j["sup_ratio"] = r.sup_ratio;
    j["refinement_trend"] = nlohmann::ordered_json::array();
    for (auto [res, s] : r.refinement_trend) j["refinement_trend"].push_back({res, s});
    j["verdict"] = verdict_name(r.verdict);
    j["details"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.details) j["details"][k] = v;
    return j.dump();
}

// ---- reflection frame ----

Mat2 inversion_matrix(Point P, const DiskDomain& d) {
    Vec2 q = P - d.center;
    double q2 = norm2(q);
    if (q2 == 0.0) throw Error(ErrorKind::DegenerateInput, "inversion matrix at the disk center");
    double s = d.radius * d.radius / (q2 * q2);
    Mat2 m;
    m.m[0][0] = s * (q.x1 * q.x1 - q.x2 * q.x2);
    m.m[0][1] = m.m[1][0] = s * 2.0 * q.x1 * q.x2;
    m.m[1][1] = -m.m[0][0];
    return m;
}

ReflectedBoundary::ReflectedBoundary(const PatchSet& ps, const TangentField& w, double gamma)
    : disk_(ps.disk), gamma_(gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorKind::Misuse, "gamma must lie in (0, 1)");
    if (w.size() != ps.patches.size()) throw Error(ErrorKind::Misuse, "tangent field does not match the patches");
    for (std::size_t k = 0; k < ps.patches.size(); ++k) {
        const ClosedCurve& c = ps.patches[k].boundary;
        if (w[k].size() != c.size()) throw Error(ErrorKind::Misuse, "tangent field does not match the nodes");
        double period = 0.0;
        auto knots = chord_knots(c, period);
        pos_.emplace_back(knots, period, c.nodes());
        wsp_.emplace_back(knots, period, w[k]);
        std::vector<Point> inv(c.size());
        std::vector<Vec2> wt(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) {
            inv[i] = invert_point(c[i], disk_);
            wt[i] = inversion_matrix(inv[i], disk_) * w[k][i];
        }
        a_gamma_ = std::max(a_gamma_, holder_quotient(inv, wt, gamma, kSeed + k));
        inv_.push_back(std::move(inv));
        curves_.push_back(c);
    }
}

bool ReflectedBoundary::inside(Point x) const {
    if (x == disk_.center) return false;
    Point y = invert_point(x, disk_);
    for (const auto& c : curves_)
        if (winding_number(c, y) != 0) return true;
    return false;
}

ReflectedBoundary::Nearest ReflectedBoundary::nearest(Point x) const {
    if (inv_.empty()) throw Error(ErrorKind::DegenerateInput, "no patches to reflect");
    double best = std::numeric_limits<double>::infinity();
    std::size_t bk = 0, bi = 0;
    for (std::size_t k = 0; k < inv_.size(); ++k)
        for (std::size_t i = 0; i < inv_[k].size(); ++i) {
            double d = norm(x - inv_[k][i]);
            // ties within round-off go to the first index
            if (d < best * (1.0 - 1e-12)) {
                best = d;
                bk = k;
                bi = i;
            }
        }
    const PeriodicSpline& s = pos_[bk];
    const std::size_t n = inv_[bk].size();
    std::size_t prev = (bi + n - 1) % n;
    double t0 = s.knot(bi);
    double lo = t0 - s.piece_length(prev), hi = t0 + s.piece_length(bi);
    auto dist = [&](double t) { return norm(x - invert_point(s.at(t), disk_)); };
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    double fa = dist(a), fb = dist(b);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * s.period(); ++it) {
        if (fa <= fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - gr * (hi - lo);
            fa = dist(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + gr * (hi - lo);
            fb = dist(b);
        }
    }
    double t = 0.5 * (lo + hi);
    Nearest out;
    out.patch = bk;
    out.node = bi;
    if (dist(t) < best * (1.0 - 1e-12)) {
        out.P = invert_point(s.at(t), disk_);
        out.w_tilde = inversion_matrix(out.P, disk_) * wsp_[bk].at(t);
    } else {
        out.P = inv_[bk][bi];
        out.w_tilde = inversion_matrix(out.P, disk_) * wsp_[bk].at(t0);
    }
    return out;
}

ReflectionFrame reflection_frame(const ReflectedBoundary& rb, Point x) {
    if (rb.inside(x)) throw Error(ErrorKind::Domain, "query point lies inside the reflected patches");
    auto n = rb.nearest(x);
    ReflectionFrame f;
    f.x = x;
    f.P_x = n.P;
    f.d = norm(x - n.P);
    if (!(f.d > 0.0)) throw Error(ErrorKind::Domain, "query point lies on the reflected boundary");
    f.w_tilde_at_P = n.w_tilde;
    f.r_x = rb.A_gamma() > 0.0 ? std::pow(norm(n.w_tilde) / (2.0 * rb.A_gamma()), 1.0 / rb.gamma())
                               : std::numeric_limits<double>::infinity();
    return f;
}

ReflectionFrame reflection_frame(const PatchSet& ps, const TangentField& w, Point x, double gamma) {
    return reflection_frame(ReflectedBoundary(ps, w, gamma), x);
}

double hessian_norm(const std::array<Mat2, 2>& h) { return std::hypot(h[0].frob(), h[1].frob()); }

// ---- gradient bound ----

namespace {

struct GradSample {
    double lhs = 0.0, rhs = 0.0;
    bool rejected = false;
};

GradSample grad_sample(const ScenarioSpec& spec, double gamma, int grid) {
    GradSample out;
    if (spec.theta == 0.0) {
        // zero vorticity: u vanishes, the bound holds trivially
        out.rhs = 1.0;
        return out;
    }
    InitialData d = make_scenario(spec);
    double a_inf = std::numeric_limits<double>::infinity(), a_gamma = 0.0;
    for (std::size_t k = 0; k < d.w.size(); ++k) {
        for (const auto& v : d.w[k]) a_inf = std::min(a_inf, norm(v));
        a_gamma = std::max(a_gamma, holder_quotient(d.ps.patches[k].boundary.nodes(), d.w[k], gamma, kSeed + k));
    }
    if (!(a_inf > 0.0)) {
        out.rejected = true;
        return out;
    }
    out.rhs = 1.0 + log_plus(a_gamma / a_inf);
    VelocityField vf(d.ps, QuadratureSpec{});
    const DiskDomain& D = d.ps.disk;
    const std::size_t m = static_cast<std::size_t>(grid);
    std::vector<double> g(m * m, 0.0);
    parallel_for(m * m, [&](std::size_t idx) {
        std::size_t i = idx / m, j = idx % m;
        Point x{D.center.x1 - D.radius + 2 * D.radius * (i + 0.5) / m, D.center.x2 - D.radius + 2 * D.radius * (j + 0.5) / m};
        if (norm(x - D.center) >= D.radius * (1.0 - 1e-9)) return;
        if (vf.distance_to_boundary(x) < 1e-2) return;
        g[idx] = vf.gradient_unchecked(x).opnorm();
    });
    for (double v : g) out.lhs = std::max(out.lhs, v);
    return out;
}

}  // namespace

BoundReport verify_grad_log_bound(const std::vector<ScenarioSpec>& samples, double gamma, int grid) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorKind::Misuse, "gamma must lie in (0, 1)");
    BoundReport r;
    r.name = "grad_log_bound";
    for (int level : {1, 4}) {
        double sup = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            ScenarioSpec s = samples[i];
            s.N *= level;
            GradSample g = grad_sample(s, gamma, grid);
            if (g.rejected) {
                if (level == 1) r.details.push_back({key("rejected[%.0f]", double(i)), 1.0});
                continue;
            }
            double ratio = g.lhs / g.rhs;
            sup = std::max(sup, ratio);
            if (level == 4) {
                r.details.push_back({key("ratio[%.0f]", double(i)), ratio});
                r.details.push_back({key("grad[%.0f]", double(i)), g.lhs});
                r.details.push_back({key("log_term[%.0f]", double(i)), g.rhs});
                ++r.samples;
            }
        }
        r.refinement_trend.push_back({double(level), sup});
    }
    r.sup_ratio = r.refinement_trend.back().second;
    double change = rel_change(r.refinement_trend[0].second, r.refinement_trend[1].second);
    r.details.push_back({"trend_change", change});
    r.verdict = change <= 0.2 ? Verdict::bounded : Verdict::unbounded_trend;
    return r;
}

// ---- tangent disk ----

double default_source(Point y) {
    double d2 = y.x1 * y.x1 + (y.x2 - 2.0) * (y.x2 - 2.0);
    return 1.0 / (d2 * d2);
}

Vec2 tangent_disk_velocity(double r, Point x, const SourceFn& f, int cells) {
    if (!(r > 0.0)) throw Error(ErrorKind::Misuse, "tangent disk radius must be positive");
    Point p = tangent_center(r);
    double gap = norm(x - p) - r;
    if (!(gap > 0.0)) throw Error(ErrorKind::Domain, "point must lie outside the tangent disk");
    DiskRule q = disk_rule(p, r, gap, cells);
    CompSum<double> a, b;
    for (std::size_t k = 0; k < q.y.size(); ++k) {
        Vec2 d = x - q.y[k];
        double s = q.w[k] * f(q.y[k]) / norm2(d);
        a.add(s * d.x2);
        b.add(-s * d.x1);
    }
    return Vec2{a.value(), b.value()} / (2 * kPi);
}

double tangent_disk_hessian(double r, double h, const SourceFn& f, int cells) {
    if (!(r > 0.0 && r < 1.0) || !(h > 0.0)) throw Error(ErrorKind::Misuse, "need r in (0, 1) and h > 0");
    Point p = tangent_center(r);
    Point x{0.0, h};
    // U = u1 + i u2 = (-i / 2 pi) int f / conj(x - y) is anti-holomorphic in x off the disk;
    // all second derivatives have modulus |d^2 U / dxbar^2| and |hess u| = 2 |T|.
    // The constant part f(0) is done exactly by the mean value property.
    const double f0 = f({0.0, 0.0});
    DiskRule q = disk_rule(p, r, h, cells);
    CompSum<cplx> s;
    const cplx xb = std::conj(to_c(x));
    for (std::size_t k = 0; k < q.y.size(); ++k) {
        double df = f(q.y[k]) - f0;
        if (df == 0.0) continue;
        cplx z = xb - std::conj(to_c(q.y[k]));
        s.add(q.w[k] * df / (z * z * z));
    }
    cplx zp = std::conj(to_c(x - p));
    cplx T = cplx(0.0, -1.0 / kPi) * (f0 * kPi * r * r / (zp * zp * zp) + s.value());
    return 2.0 * std::abs(T);
}

BoundReport verify_hessian_tangent_disk(const std::vector<double>& r_values, const std::vector<double>& h_factors,
                                        const SourceFn& f, int cells) {
    if (r_values.size() < 2 || h_factors.empty()) throw Error(ErrorKind::Misuse, "need at least two radii and one height");
    BoundReport rep;
    rep.name = "hessian_tangent_disk";
    std::vector<std::array<double, 2>> jobs;
    for (double r : r_values)
        for (double a : h_factors) jobs.push_back({r, a * r});
    std::vector<double> val(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t k) { val[k] = jobs[k][0] * tangent_disk_hessian(jobs[k][0], jobs[k][1], f, cells); });
    for (std::size_t i = 0; i < r_values.size(); ++i) {
        double sup = 0.0;
        for (std::size_t j = 0; j < h_factors.size(); ++j) {
            std::size_t k = i * h_factors.size() + j;
            sup = std::max(sup, val[k]);
            rep.details.push_back({key("r=%g,h=%g", jobs[k][0], jobs[k][1]), val[k]});
        }
        rep.refinement_trend.push_back({r_values[i], sup});
        rep.sup_ratio = std::max(rep.sup_ratio, sup);
    }
    rep.samples = jobs.size();
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < rep.refinement_trend.size(); ++i)
        worst = std::max(worst, rel_change(rep.refinement_trend[i].second, rep.refinement_trend[i + 1].second, 1e-300));
    rep.details.push_back({"octave_change", worst});
    rep.verdict = worst <= 0.3 ? Verdict::bounded : Verdict::unbounded_trend;
    return rep;
}

Vec2 I1_closed_form(double r, Point x, double f0) {
    Vec2 d = x - tangent_center(r);
    return (0.5 * f0 * r * r / norm2(d)) * perp(d);
}

Vec2 I1_quadrature(double r, Point x, double f0, int cells) {
    return tangent_disk_velocity(r, x, [f0](Point) { return f0; }, cells);
}

double verify_I1_identity(double r, double h, double f0, int cells) {
    Point x{0.0, h};
    Vec2 q = I1_quadrature(r, x, f0, cells);
    Vec2 c = I1_closed_form(r, x, f0);
    double n = norm(c);
    return n > 0.0 ? norm(q - c) / n : norm(q);
}

// ---- key lemma ----

std::vector<KeyLemmaSample> keylemma_samples(const PatchSet& ps, double gamma, double delta, int n,
                                             const KeyLemmaOptions& opt) {
    if (!(gamma > 0.0 && gamma < kPi / 4)) throw Error(ErrorKind::Misuse, "cone angle must lie in (0, pi/4)");
    if (n < 1 || !(delta > 0.0)) throw Error(ErrorKind::Misuse, "bad cone grid");
    StripFrame fr(ps.disk);
    const double R = ps.disk.radius;
    std::vector<KeyLemmaSample> pts;
    for (int cone = 1; cone <= 2; ++cone) {
        double lo = cone == 1 ? 0.0 : gamma, hi = cone == 1 ? kPi / 2 - gamma : kPi / 2;
        for (int i = 0; i <= n; ++i) {
            double rad = delta * std::pow(100.0, double(i) / n - 1.0);
            for (int j = 0; j <= n; ++j) {
                double phi = lo + (hi - lo) * j / n;
                Point xi{rad * std::cos(phi), rad * std::sin(phi)};
                if (norm(xi - Point{0.0, R}) >= R * (1.0 - 1e-12)) continue;
                if ((cone == 1 ? xi.x1 : xi.x2) < opt.x1_floor) continue;
                KeyLemmaSample s;
                s.cone = cone;
                s.x = xi;
                pts.push_back(s);
            }
        }
    }
    if (ps.patches.empty()) return pts;

    PatchSet refined = ps;
    for (auto& p : refined.patches) p.boundary = ClosedCurve(refine_curve(p.boundary, opt.quad.refinement));
    CornerIntegrator ci(refined, opt.corner_rows);
    VelocityField vf(ps, opt.quad);
    parallel_for(pts.size(), [&](std::size_t k) {
        auto& s = pts[k];
        Vec2 u = fr.velocity_to_frame(vf.velocity(fr.from_frame(s.x)));
        s.u1 = u.x1;
        s.u2 = u.x2;
        s.omega = ci(s.x);
        s.B1 = u.x1 / s.x.x1 + s.omega;
        s.B2 = u.x2 / s.x.x2 - s.omega;
    });
    return pts;
}

namespace {

void check_odd_pair(const PatchSet& ps) {
    if (ps.patches.empty()) return;
    const double R = ps.disk.radius;
    if (ps.patches.size() != 2 || ps.patches[0].theta != -ps.patches[1].theta || !(ps.patches[0].theta > 0.0))
        throw Error(ErrorKind::InvalidPatch, "key lemma needs a positive patch and its negative mirror");
    const auto& a = ps.patches[0].boundary.nodes();
    std::vector<Point> m;
    std::vector<Vec2> mw, w(a.size());
    mirror_patch(a, w, ps.disk, m, mw);
    const auto& b = ps.patches[1].boundary.nodes();
    if (b.size() != m.size()) throw Error(ErrorKind::InvalidPatch, "patch set is not odd in x1");
    for (std::size_t i = 0; i < m.size(); ++i)
        if (norm(m[i] - b[i]) > 1e-9 * R) throw Error(ErrorKind::InvalidPatch, "patch set is not odd in x1");
    double cx = 0.0;
    for (const auto& p : a) cx += p.x1 - ps.disk.center.x1;
    if (cx < 0.0) throw Error(ErrorKind::InvalidPatch, "positive patch must sit right of the axis");
}

struct ConeSup {
    double b1 = 0.0, b2 = 0.0;
    std::size_t count = 0, sign_checked = 0, sign_bad = 0;
};

ConeSup cone_sup(const std::vector<KeyLemmaSample>& pts) {
    ConeSup c;
    for (const auto& s : pts) {
        if (s.cone == 1) c.b1 = std::max(c.b1, std::abs(s.B1));
        else c.b2 = std::max(c.b2, std::abs(s.B2));
    }
    c.count = pts.size();
    for (const auto& s : pts)
        if (s.cone == 1 && s.omega > 2.0 * c.b1) {
            ++c.sign_checked;
            if (!(s.u1 * s.x.x1 < 0.0)) ++c.sign_bad;
        }
    return c;
}

}  // namespace

BoundReport verify_keylemma(const std::vector<PatchSet>& shapes, double gamma, const KeyLemmaOptions& opt) {
    if (shapes.empty()) throw Error(ErrorKind::Misuse, "no shapes");
    for (const auto& ps : shapes) check_odd_pair(ps);
    BoundReport rep;
    rep.name = "keylemma";
    double sup_coarse = 0.0, sup_fine = 0.0;
    bool any_bounded = false;
    std::size_t sign_checked = 0, sign_bad = 0;
    for (double delta : opt.deltas) {
        double grid_change = 0.0, s1 = 0.0, s2 = 0.0;
        double min1 = std::numeric_limits<double>::infinity(), min2 = min1;
        for (const auto& ps : shapes) {
            ConeSup c = cone_sup(keylemma_samples(ps, gamma, delta, opt.coarse, opt));
            ConeSup f = cone_sup(keylemma_samples(ps, gamma, delta, opt.fine, opt));
            grid_change = std::max({grid_change, rel_change(c.b1, f.b1, 1e-12), rel_change(c.b2, f.b2, 1e-12)});
            s1 = std::max(s1, f.b1);
            s2 = std::max(s2, f.b2);
            min1 = std::min(min1, f.b1);
            min2 = std::min(min2, f.b2);
            sup_coarse = std::max({sup_coarse, c.b1, c.b2});
            sup_fine = std::max({sup_fine, f.b1, f.b2});
            sign_checked += f.sign_checked;
            sign_bad += f.sign_bad;
            rep.samples += f.count;
        }
        auto spread = [](double hi, double lo) { return hi <= 1e-12 ? 1.0 : (lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity()); };
        double sp = std::max(spread(s1, min1), spread(s2, min2));
        bool ok = std::isfinite(s1) && std::isfinite(s2) && grid_change <= opt.grid_tol && sp <= opt.shape_factor;
        any_bounded = any_bounded || ok;
        rep.details.push_back({key("delta=%g:sup_B1", delta), s1});
        rep.details.push_back({key("delta=%g:sup_B2", delta), s2});
        rep.details.push_back({key("delta=%g:grid_change", delta), grid_change});
        rep.details.push_back({key("delta=%g:shape_spread", delta), sp});
        rep.details.push_back({key("delta=%g:bounded", delta), ok ? 1.0 : 0.0});
    }
    rep.details.push_back({"sign_checked", double(sign_checked)});
    rep.details.push_back({"sign_violations", double(sign_bad)});
    rep.refinement_trend = {{double(opt.coarse), sup_coarse}, {double(opt.fine), sup_fine}};
    rep.sup_ratio = sup_fine;
    rep.verdict = any_bounded ? Verdict::bounded : Verdict::unbounded_trend;
    return rep;
}

std::vector<PatchSet> keylemma_shapes(std::size_t count, std::uint64_t seed, std::size_t N) {
    std::mt19937_64 g(seed);
    std::vector<PatchSet> out;
    for (std::size_t k = 0; k < count; ++k) {
        ScenarioSpec s;
        s.kind = ScenarioKind::ks_example;
        s.N = N;
        s.strip = 0.03 + 0.07 * unit(g);
        s.rounding = s.strip * (0.1 + 0.2 * unit(g));
        out.push_back(make_ks_example(s).ps);
    }
    return out;
}

// ---- A-quantity inequalities ----

namespace {

struct AConstants {
    double c_sup = 0.0, c_inf = 0.0, c_gamma = 0.0;
};

AConstants fit_a_constants(const std::vector<DiagnosticsRecord>& rs) {
    if (rs.size() < 2) throw Error(ErrorKind::DegenerateInput, "A-ODE check needs at least two records");
    AConstants c;
    for (std::size_t k = 0; k + 1 < rs.size(); ++k) {
        const auto& a = rs[k];
        const auto& b = rs[k + 1];
        double dt = b.t - a.t;
        if (!(dt > 0.0)) throw Error(ErrorKind::DegenerateInput, "records must be strictly increasing in t");
        if (!(a.A_inf > 0.0)) throw Error(ErrorKind::DegenerateInput, "A_inf vanished");
        double L = 1.0 + log_plus(a.A_gamma / a.A_inf);
        c.c_sup = std::max(c.c_sup, (b.A_sup - a.A_sup) / dt / (a.A_sup * L));
        c.c_inf = std::max(c.c_inf, -(b.A_inf - a.A_inf) / dt / (a.A_inf * L));
        if (a.A_gamma > 0.0) c.c_gamma = std::max(c.c_gamma, ((b.A_gamma - a.A_gamma) / dt - a.A_sup) / (a.A_gamma * L));
    }
    return c;
}

}  // namespace

BoundReport verify_a_ode(const std::vector<std::pair<double, std::vector<DiagnosticsRecord>>>& runs) {
    if (runs.empty()) throw Error(ErrorKind::DegenerateInput, "no runs");
    BoundReport rep;
    rep.name = "a_ode";
    std::vector<AConstants> cs;
    for (const auto& [dt, rs] : runs) {
        AConstants c = fit_a_constants(rs);
        cs.push_back(c);
        rep.samples += rs.size() - 1;
        rep.details.push_back({key("dt=%g:C_sup", dt), c.c_sup});
        rep.details.push_back({key("dt=%g:C_inf", dt), c.c_inf});
        rep.details.push_back({key("dt=%g:C_gamma", dt), c.c_gamma});
        double m = std::max({c.c_sup, c.c_inf, c.c_gamma});
        rep.refinement_trend.push_back({dt, m});
        rep.sup_ratio = std::max(rep.sup_ratio, m);
    }
    // constants below the floor are "any C >= 0 works"
    const double floor = 1e-6;
    double worst = 0.0;
    bool finite = true;
    for (std::size_t k = 0; k < cs.size(); ++k) finite = finite && std::isfinite(cs[k].c_sup) && std::isfinite(cs[k].c_inf) && std::isfinite(cs[k].c_gamma);
    for (std::size_t k = 0; k + 1 < cs.size(); ++k) {
        worst = std::max({worst, rel_change(cs[k].c_sup, cs[k + 1].c_sup, floor), rel_change(cs[k].c_inf, cs[k + 1].c_inf, floor),
                          rel_change(cs[k].c_gamma, cs[k + 1].c_gamma, floor)});
    }
    rep.details.push_back({"dt_change", worst});
    rep.verdict = finite && worst <= 0.3 ? Verdict::bounded : Verdict::unbounded_trend;
    return rep;
}

BoundReport verify_a_ode(const std::vector<DiagnosticsRecord>& run) {
    double dt = run.size() >= 2 ? run[1].t - run[0].t : 0.0;
    return verify_a_ode({{dt, run}});
}

// ---- image Hessian spot check ----

BoundReport verify_image_hessian_bound(const std::vector<ScenarioSpec>& samples, double gamma, int grid) {
    BoundReport rep;
    rep.name = "image_hessian_bound";
    for (int level : {1, 4}) {
        double sup = 0.0;
        std::size_t used = 0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            ScenarioSpec s = samples[i];
            s.N *= level;
            // zero vorticity: same geometry, the velocity and its Hessian vanish
            const double scale = s.theta == 0.0 ? 0.0 : 1.0;
            if (s.theta == 0.0) s.theta = 1.0;
            InitialData d = make_scenario(s);
            ReflectedBoundary rb(d.ps, d.w, gamma);
            VelocityField vf(d.ps, QuadratureSpec{});
            const DiskDomain& D = d.ps.disk;
            const std::size_t m = static_cast<std::size_t>(grid);
            std::vector<double> val(m * m, -1.0);
            parallel_for(m * m, [&](std::size_t idx) {
                double rho = D.radius * (0.5 + 0.499 * double(idx / m) / (m - 1));
                double psi = 2 * kPi * double(idx % m) / m;
                Point x = D.center + rho * Vec2{std::cos(psi), std::sin(psi)};
                if (rb.inside(x)) return;
                ReflectionFrame f = reflection_frame(rb, x);
                if (f.d > 0.25 * f.r_x) return;
                val[idx] = scale * hessian_norm(vf.image_hessian(x)) * std::pow(f.d, 1.0 - gamma) * std::pow(f.r_x, gamma);
            });
            double ssup = 0.0;
            for (double v : val)
                if (v >= 0.0) {
                    ssup = std::max(ssup, v);
                    ++used;
                }
            sup = std::max(sup, ssup);
            if (level == 4) rep.details.push_back({key("ratio[%.0f]", double(i)), ssup});
        }
        rep.refinement_trend.push_back({double(level), sup});
        if (level == 4) rep.samples = used;
    }
    rep.sup_ratio = rep.refinement_trend.back().second;
    double change = rel_change(rep.refinement_trend[0].second, rep.refinement_trend[1].second);
    rep.details.push_back({"trend_change", change});
    rep.verdict = rep.samples > 0 && change <= 0.2 ? Verdict::bounded : Verdict::unbounded_trend;
    return rep;
}

}  // namespace diskpatch
