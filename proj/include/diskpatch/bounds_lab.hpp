#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "diskpatch/diagnostics.hpp"
#include "diskpatch/scenarios.hpp"

namespace diskpatch {

enum class Verdict { bounded, unbounded_trend };
const char* verdict_name(Verdict v);

struct BoundReport {
    std::string name;
    std::size_t samples = 0;
    double sup_ratio = 0.0;
    std::vector<std::pair<double, double>> refinement_trend;  // (resolution, sup_ratio)
    Verdict verdict = Verdict::bounded;
    // named side values (fitted constants, per-shape sups, ...)
    std::vector<std::pair<std::string, double>> details;

    double detail(const std::string& key) const;  // NaN if absent
};

// One JSON object, no trailing newline.
std::string to_json(const BoundReport& r);

// Inverted patch boundaries with the transformed tangent field, built once.
class ReflectedBoundary {
public:
    ReflectedBoundary(const PatchSet& ps, const TangentField& w, double gamma);

    struct Nearest {
        Point P;
        Vec2 w_tilde;
        std::size_t patch = 0, node = 0;
    };
    Nearest nearest(Point x) const;
    bool inside(Point x) const;  // x in the closed reflected set
    double A_gamma() const { return a_gamma_; }
    double gamma() const { return gamma_; }
    const DiskDomain& disk() const { return disk_; }

private:
    DiskDomain disk_;
    double gamma_;
    std::vector<ClosedCurve> curves_;
    std::vector<std::vector<Point>> inv_;
    std::vector<PeriodicSpline> pos_, wsp_;
    double a_gamma_ = 0.0;
};

// w-tilde = M(P) w at the pre-image of P, M the inversion matrix at P.
Mat2 inversion_matrix(Point P, const DiskDomain& d);

struct ReflectionFrame {
    Point x;
    Point P_x;
    double d = 0.0;
    double r_x = 0.0;
    Vec2 w_tilde_at_P;
};
ReflectionFrame reflection_frame(const PatchSet& ps, const TangentField& w, Point x, double gamma);
ReflectionFrame reflection_frame(const ReflectedBoundary& rb, Point x);

// sqrt of the sum of squares of all second derivatives
double hessian_norm(const std::array<Mat2, 2>& h);

// ||grad u|| against 1 + log+(A_gamma / A_inf) on ellipse-family patches.
// Each sample runs at N and 4N; bounded iff the sup ratio moves by at most 20%.
BoundReport verify_grad_log_bound(const std::vector<ScenarioSpec>& samples, double gamma, int grid = 64);

// Tangent-disk lemma: B_r = disk of radius r centred (0, -r), x = (0, h).
using SourceFn = std::function<double(Point)>;
double default_source(Point y);  // 1 / |y - (0, 2)|^4
Vec2 tangent_disk_velocity(double r, Point x, const SourceFn& f, int cells = 2048);
double tangent_disk_hessian(double r, double h, const SourceFn& f, int cells = 2048);
// h = factor * r for each factor; trend is (r, max_h r |hess u|)
BoundReport verify_hessian_tangent_disk(const std::vector<double>& r_values, const std::vector<double>& h_factors,
                                        const SourceFn& f = default_source, int cells = 2048);

Vec2 I1_closed_form(double r, Point x, double f0);
Vec2 I1_quadrature(double r, Point x, double f0, int cells = 2048);
// relative error of the quadrature at x = (0, h)
double verify_I1_identity(double r, double h, double f0, int cells = 2048);

struct KeyLemmaOptions {
    std::vector<double> deltas{0.05, 0.1, 0.2};
    int coarse = 32;  // cone grid has (n+1)^2 points; the coarse grid is a subset of the fine one
    int fine = 64;
    int corner_rows = 4000;
    double x1_floor = 1e-6;
    double shape_factor = 2.0;
    double grid_tol = 0.10;
    QuadratureSpec quad{};
};
struct KeyLemmaSample {
    int cone = 1;  // 1: B1 cone, 2: B2 cone
    Point x;       // strip-frame coordinates
    double u1 = 0.0, u2 = 0.0, omega = 0.0, B1 = 0.0, B2 = 0.0;
};
// B1 on the cone 0 <= phi <= pi/2 - gamma, B2 on gamma <= phi <= pi/2, |x| <= delta.
// Both cones at once; with n = 2m the points for m are every other point.
std::vector<KeyLemmaSample> keylemma_samples(const PatchSet& ps, double gamma, double delta, int n,
                                             const KeyLemmaOptions& opt = {});
BoundReport verify_keylemma(const std::vector<PatchSet>& shapes, double gamma, const KeyLemmaOptions& opt = {});
// random strip shapes (strip half-width and fillet radius drawn from the seed)
std::vector<PatchSet> keylemma_shapes(std::size_t count, std::uint64_t seed, std::size_t N);

// Smallest constants making the three A-inequalities hold between consecutive records.
// One entry per run, keyed by its dt; bounded iff each constant moves by at most 30%.
BoundReport verify_a_ode(const std::vector<std::pair<double, std::vector<DiagnosticsRecord>>>& runs);
BoundReport verify_a_ode(const std::vector<DiagnosticsRecord>& run);

// |hess v-tilde(x)| d^(1-gamma) r_x^gamma at points with d <= r_x / 4, at N and 4N.
BoundReport verify_image_hessian_bound(const std::vector<ScenarioSpec>& samples, double gamma, int grid = 64);

}  // namespace diskpatch
