#include "diskpatch/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "diskpatch/error.hpp"
#include "diskpatch/quadrature.hpp"

namespace diskpatch {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInv4Pi = 0.25 / std::numbers::pi;

inline cplx cdiv(cplx a, cplx b) {
    double n = b.real() * b.real() + b.imag() * b.imag();
    return {(a.real() * b.real() + a.imag() * b.imag()) / n, (a.imag() * b.real() - a.real() * b.imag()) / n};
}
inline cplx cinv(cplx b) {
    double n = b.real() * b.real() + b.imag() * b.imag();
    return {b.real() / n, -b.imag() / n};
}
inline double cabs2(cplx a) { return a.real() * a.real() + a.imag() * a.imag(); }

// two-point Gauss-Legendre abscissae on [0,1]
constexpr double kG2a = 0.21132486540518711775;
constexpr double kG2b = 0.78867513459481288225;

double seg_dist(cplx p, cplx a, cplx b) {
    cplx d = b - a;
    double l2 = cabs2(d);
    double t = l2 > 0 ? std::clamp(((p - a).real() * d.real() + (p - a).imag() * d.imag()) / l2, 0.0, 1.0) : 0.0;
    return std::sqrt(cabs2(p - (a + t * d)));
}

// Image integrands on the contour: kind 0 velocity, 1 velocity with the pole
// term subtracted, 2 gradient, 3 hessian.
template <int K>
inline cplx image_integrand(cplx y, cplx k, double c, double p2) {
    double y2 = cabs2(y);
    cplx den = c - k * y;
    if constexpr (K == 0) return y2 * cinv(den);
    if constexpr (K == 1) return (y2 - p2) * cinv(den);
    if constexpr (K == 2) return cdiv(y2 * y, den * den);
    if constexpr (K == 3) return cdiv(2.0 * y2 * y * y, den * den * den);
}

template <int K>
cplx image_segment(cplx a, cplx b, cplx k, double c, cplx pole, bool has_pole, double p2, int depth) {
    cplx d = b - a;
    double h = std::sqrt(cabs2(d));
    if (h == 0.0) return 0.0;
    int n = 2;
    if (has_pole) {
        double dist = seg_dist(pole, a, b);
        double t = dist > 0 ? h / dist : std::numeric_limits<double>::infinity();
        if (t <= 0.01) n = 2;
        else if (t <= 0.05) n = 4;
        else if (t <= 0.2) n = 6;
        else if (t <= 0.5) n = 8;
        else if (t <= 1.0 || depth >= 50 || (K == 1 && dist <= 1e-12 * std::sqrt(c))) n = 12;  // pole on the contour up to round-off: bounded integrand
        else {
            cplx m = 0.5 * (a + b);
            return image_segment<K>(a, m, k, c, pole, has_pole, p2, depth + 1) +
                   image_segment<K>(m, b, k, c, pole, has_pole, p2, depth + 1);
        }
    }
    const GaussRule& g = gauss_legendre(n);
    cplx acc = 0.0;
    for (int i = 0; i < n; ++i) acc += g.w[i] * image_integrand<K>(a + g.x[i] * d, k, c, p2);
    return acc * d;
}

// atan2(cr, dt): angle subtended by a segment; short-series fast path for
// the common far-field case |cr| <= dt / 8.
inline double subtended_angle(double cr, double dt) {
    if (dt > 0.0 && std::abs(cr) <= 0.125 * dt) {
        const double x = cr / dt, x2 = x * x;
        double p = 1.0 / 17.0;
        p = p * x2 - 1.0 / 15.0;
        p = p * x2 + 1.0 / 13.0;
        p = p * x2 - 1.0 / 11.0;
        p = p * x2 + 1.0 / 9.0;
        p = p * x2 - 1.0 / 7.0;
        p = p * x2 + 1.0 / 5.0;
        p = p * x2 - 1.0 / 3.0;
        return x + x * x2 * p;
    }
    return std::atan2(cr, dt);
}

}  // namespace

std::vector<Point> refine_curve(const ClosedCurve& c, int refinement) {
    if (refinement < 1) throw Error(ErrorKind::InvalidResolution, "refinement must be >= 1");
    if (refinement == 1) return c.nodes();
    PeriodicSpline s(c);
    std::vector<Point> out;
    out.reserve(c.size() * refinement);
    for (std::size_t i = 0; i < c.size(); ++i) {
        out.push_back(c[i]);
        double h = s.piece_length(i);
        for (int j = 1; j < refinement; ++j) out.push_back(s.value(i, h * j / refinement));
    }
    return out;
}

void validate(const PatchSet& ps) {
    if (!(ps.disk.radius > 0.0) || !std::isfinite(ps.disk.radius))
        throw Error(ErrorKind::InvalidPatch, "disk radius must be positive");
    for (std::size_t i = 0; i < ps.patches.size(); ++i) {
        const Patch& p = ps.patches[i];
        if (!(p.theta != 0.0) || !std::isfinite(p.theta))
            throw Error(ErrorKind::InvalidPatch, "patch " + std::to_string(i) + " has zero or non-finite strength");
        check_curve(p.boundary, ps.disk);
    }
    for (std::size_t i = 0; i < ps.patches.size(); ++i)
        for (std::size_t j = i + 1; j < ps.patches.size(); ++j) {
            const auto& a = ps.patches[i].boundary;
            const auto& b = ps.patches[j].boundary;
            if (min_distance(a, b) <= 0.0 || winding_number(a, b[0]) != 0 || winding_number(b, a[0]) != 0)
                throw Error(ErrorKind::InvalidPatch,
                            "patches " + std::to_string(i) + " and " + std::to_string(j) + " are not disjoint");
        }
}

VelocityField::VelocityField(const PatchSet& ps, const QuadratureSpec& q) : disk_(ps.disk), spec_(q) {
    if (q.refinement < 1) throw Error(ErrorKind::InvalidResolution, "refinement must be >= 1");
    const cplx c0 = to_c(ps.disk.center);
    for (const auto& p : ps.patches) {
        Contour ct;
        ct.theta = p.theta;
        auto pts = refine_curve(p.boundary, q.refinement);
        const std::size_t n = pts.size();
        ct.v.resize(n);
        ct.lo1 = ct.lo2 = std::numeric_limits<double>::infinity();
        ct.hi1 = ct.hi2 = -ct.lo1;
        for (std::size_t k = 0; k < n; ++k) {
            ct.v[k] = to_c(pts[k]) - c0;
            ct.lo1 = std::min(ct.lo1, ct.v[k].real());
            ct.hi1 = std::max(ct.hi1, ct.v[k].real());
            ct.lo2 = std::min(ct.lo2, ct.v[k].imag());
            ct.hi2 = std::max(ct.hi2, ct.v[k].imag());
        }
        ct.d.resize(n);
        ct.rho.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            ct.d[k] = ct.v[k + 1 == n ? 0 : k + 1] - ct.v[k];
            ct.rho[k] = cdiv(ct.d[k], std::conj(ct.d[k]));
            ct.hmax = std::max(ct.hmax, std::sqrt(cabs2(ct.d[k])));
        }
        contours_.push_back(std::move(ct));
    }
}

void VelocityField::check_in_disk(cplx z) const {
    if (!(std::sqrt(cabs2(z)) <= disk_.radius * (1.0 + 1e-8)))
        throw Error(ErrorKind::Domain, "evaluation point outside the closed disk");
}

double VelocityField::distance_to_boundary(Point x) const {
    cplx z = to_c(x - disk_.center);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& ct : contours_) {
        double g1 = std::max({0.0, ct.lo1 - z.real(), z.real() - ct.hi1});
        double g2 = std::max({0.0, ct.lo2 - z.imag(), z.imag() - ct.hi2});
        if (std::hypot(g1, g2) >= best) continue;
        const std::size_t n = ct.v.size();
        for (std::size_t k = 0; k < n; ++k) best = std::min(best, seg_dist(z, ct.v[k], ct.v[k + 1 == n ? 0 : k + 1]));
    }
    return best;
}

void VelocityField::check_exclusion(Point x) const {
    if (distance_to_boundary(x) < spec_.pv_exclusion)
        throw Error(ErrorKind::NearSingular, "point within the exclusion distance of a patch boundary");
}

VelocityField::Raw VelocityField::eval(cplx z, unsigned need) const {
    Raw out;
    const double R2 = disk_.radius * disk_.radius;
    const bool want_free = need & kFree;
    const bool want_image = need & kImage;
    if (want_image) check_in_disk(z);

    // image pole data
    const cplx k = std::conj(z);
    const double zabs2 = cabs2(z);
    const bool has_pole = zabs2 > 0.0;
    const cplx pole = has_pole ? R2 * cinv(k) : cplx{};
    const double p2 = has_pole ? R2 * R2 / zabs2 : 0.0;
    const bool subtract = zabs2 > 0.25 * R2;

    for (const auto& ct : contours_) {
        const std::size_t n = ct.v.size();
        const double w = ct.theta * kInv4Pi;
        if (want_free) {
            CompSum<cplx> sv, sa, sb, st;
            cplx a = ct.v[0] - z;
            double ra = cabs2(a);
            double lga = ra > 0 ? 0.5 * std::log(ra) : 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t j = (i + 1 == n) ? 0 : i + 1;
                const cplx b = ct.v[j] - z;
                const double rb = cabs2(b);
                const double lgb = rb > 0 ? 0.5 * std::log(rb) : 0.0;
                const cplx& d = ct.d[i];
                if (ra == 0.0 || rb == 0.0) {
                    // segment ends at the evaluation point: only the velocity is finite
                    if (need & kVel) sv.add(2.0 * d * ((ra == 0.0 ? lgb : lga) - 1.0));
                } else {
                    const double cr = a.real() * b.imag() - a.imag() * b.real();
                    const double dt = a.real() * b.real() + a.imag() * b.imag();
                    const cplx L{lgb - lga, subtended_angle(cr, dt)};
                    if (need & kVel) {
                        const cplx bl = b * L;
                        sv.add(2.0 * d * (lga - 1.0) + bl + ct.rho[i] * std::conj(bl));
                    }
                    if (need & kGrad) {
                        sa.add(L);
                        sb.add(ct.rho[i] * std::conj(L));
                    }
                    if (need & kHess) st.add(ct.rho[i] * (cinv(std::conj(a)) - cinv(std::conj(b))));
                }
                a = b;
                ra = rb;
                lga = lgb;
            }
            out.U += -w * sv.value();
            out.A += w * sa.value();
            out.B += w * sb.value();
            out.T += w * st.value();
        }
        if (want_image) {
            CompSum<cplx> su, sb, st;
            // pole far from the whole contour: two-point Gauss everywhere
            const double gb1 = std::max({0.0, ct.lo1 - pole.real(), pole.real() - ct.hi1});
            const double gb2 = std::max({0.0, ct.lo2 - pole.imag(), pole.imag() - ct.hi2});
            const bool far = !has_pole || std::hypot(gb1, gb2) >= 100.0 * ct.hmax;
            const double pv = subtract ? p2 : 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t j = (i + 1 == n) ? 0 : i + 1;
                const cplx a = ct.v[i], b = ct.v[j];
                if (far) {
                    const cplx d = ct.d[i];
                    const cplx y0 = a + kG2a * d, y1 = a + kG2b * d;
                    const cplx e0 = R2 - k * y0, e1 = R2 - k * y1;
                    const double q0 = cabs2(y0), q1 = cabs2(y1);
                    if (need & kVel) su.add(0.5 * d * ((q0 - pv) * cinv(e0) + (q1 - pv) * cinv(e1)));
                    if (need & kGrad) sb.add(0.5 * d * (cdiv(q0 * y0, e0 * e0) + cdiv(q1 * y1, e1 * e1)));
                    if (need & kHess)
                        st.add(0.5 * d * (cdiv(2.0 * q0 * y0 * y0, e0 * e0 * e0) + cdiv(2.0 * q1 * y1 * y1, e1 * e1 * e1)));
                    continue;
                }
                if (need & kVel) {
                    if (subtract) su.add(image_segment<1>(a, b, k, R2, pole, has_pole, p2, 0));
                    else su.add(image_segment<0>(a, b, k, R2, pole, has_pole, p2, 0));
                }
                if (need & kGrad) sb.add(image_segment<2>(a, b, k, R2, pole, has_pole, p2, 0));
                if (need & kHess) st.add(image_segment<3>(a, b, k, R2, pole, has_pole, p2, 0));
            }
            out.U += w * su.value();
            out.B += w * sb.value();
            out.T += w * st.value();
        }
    }
    return out;
}

namespace {

Mat2 grad_from(cplx A, cplx B) {
    cplx d1 = A + B;
    cplx d2 = cplx{0, 1} * (A - B);
    Mat2 g;
    g.m[0][0] = d1.real();
    g.m[1][0] = d1.imag();
    g.m[0][1] = d2.real();
    g.m[1][1] = d2.imag();
    return g;
}

std::array<Mat2, 2> hess_from(cplx T) {
    cplx h11 = T, h12 = cplx{0, -1} * T, h22 = -T;
    std::array<Mat2, 2> h;
    h[0].m[0][0] = h11.real();
    h[0].m[0][1] = h[0].m[1][0] = h12.real();
    h[0].m[1][1] = h22.real();
    h[1].m[0][0] = h11.imag();
    h[1].m[0][1] = h[1].m[1][0] = h12.imag();
    h[1].m[1][1] = h22.imag();
    return h;
}

}  // namespace

Vec2 VelocityField::free_velocity(Point x) const { return to_v(eval(to_c(x - disk_.center), kVel | kFree).U); }

Vec2 VelocityField::image_velocity(Point x) const { return to_v(eval(to_c(x - disk_.center), kVel | kImage).U); }

Vec2 VelocityField::velocity(Point x) const {
    return to_v(eval(to_c(x - disk_.center), kVel | kFree | kImage).U);
}

Mat2 VelocityField::gradient_unchecked(Point x) const {
    Raw r = eval(to_c(x - disk_.center), kGrad | kFree | kImage);
    return grad_from(r.A, r.B);
}

Mat2 VelocityField::gradient(Point x) const {
    check_in_disk(to_c(x - disk_.center));
    if (contours_.empty()) return Mat2{};
    check_exclusion(x);
    return gradient_unchecked(x);
}

void VelocityField::velocity_and_gradient(Point x, Vec2& u, Mat2& g) const {
    Raw r = eval(to_c(x - disk_.center), kVel | kGrad | kFree | kImage);
    u = to_v(r.U);
    g = grad_from(r.A, r.B);
}

std::array<Mat2, 2> VelocityField::hessian(Point x) const {
    check_in_disk(to_c(x - disk_.center));
    if (contours_.empty()) return {};
    if (distance_to_boundary(x) < spec_.pv_exclusion)
        throw Error(ErrorKind::Domain, "hessian requested on or near the vorticity support boundary");
    return hess_from(eval(to_c(x - disk_.center), kHess | kFree | kImage).T);
}

std::array<Mat2, 2> VelocityField::image_hessian(Point x) const {
    return hess_from(eval(to_c(x - disk_.center), kHess | kImage).T);
}

Vec2 free_velocity(const PatchSet& ps, Point x, const QuadratureSpec& q) { return VelocityField(ps, q).free_velocity(x); }
Vec2 image_velocity(const PatchSet& ps, Point x, const QuadratureSpec& q) { return VelocityField(ps, q).image_velocity(x); }
Vec2 total_velocity(const PatchSet& ps, Point x, const QuadratureSpec& q) { return VelocityField(ps, q).velocity(x); }
Mat2 velocity_gradient(const PatchSet& ps, Point x, const QuadratureSpec& q) { return VelocityField(ps, q).gradient(x); }
std::array<Mat2, 2> velocity_hessian(const PatchSet& ps, Point x, const QuadratureSpec& q) {
    return VelocityField(ps, q).hessian(x);
}

VelocityJet velocity_jet(const PatchSet& ps, Point x, const QuadratureSpec& q) {
    VelocityField f(ps, q);
    VelocityJet j;
    j.u = f.velocity(x);
    j.grad = f.gradient(x);
    j.hess = f.hessian(x);
    return j;
}

double log_lipschitz_check(const PatchSet& ps, const std::vector<Point>& points, const QuadratureSpec& q) {
    VelocityField f(ps, q);
    std::vector<Vec2> u(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) u[i] = f.velocity(points[i]);
    double best = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            double d = norm(points[i] - points[j]);
            if (d == 0.0) continue;
            best = std::max(best, norm(u[i] - u[j]) / (d * std::log1p(1.0 / d)));
        }
    return best;
}

}  // namespace diskpatch
