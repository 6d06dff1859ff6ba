#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "diskpatch/state.hpp"

namespace diskpatch {

struct DiagnosticsRecord {
    double t = 0.0;
    double kappa_max = 0.0;
    std::vector<double> areas;
    double delta_sep = 0.0;  // +inf for a single patch
    double A_sup = 0.0;
    double A_inf = 0.0;
    double A_gamma = 0.0;
    double x1_leftmost = 0.0;
    double omega_corner = 0.0;
    std::optional<double> a_env, b_env;
};

struct DiagnosticsOptions {
    double gamma = 0.5;
    std::uint64_t seed = 20240601;
    Point corner{1e-2, 1e-2};  // strip-frame coordinates
    int corner_rows = 4000;
    double contact_tol = 1e-3;
};

DiagnosticsRecord compute_record(const SimState& s, const DiagnosticsOptions& opt = {});
DiagnosticsRecord compute_record(const SimState& s, double gamma);

// Sampled Hoelder quotient of w over one patch: adjacent pairs, index-antipodal
// pairs and 1000 stratified random pairs.
double holder_quotient(const std::vector<Point>& x, const std::vector<Vec2>& w, double gamma, std::uint64_t seed);

// Frame of the strip scenario: reflection through the horizontal line, origin at
// the upper contact point, so D becomes B_R((0, R)). Velocities map as (u1, -u2).
struct StripFrame {
    Point c;
    double R = 1.0;
    explicit StripFrame(const DiskDomain& d) : c(d.center), R(d.radius) {}
    Point to_frame(Point x) const { return {x.x1 - c.x1, c.x2 + R - x.x2}; }
    Point from_frame(Point y) const { return {y.x1 + c.x1, c.x2 + R - y.x2}; }
    Vec2 velocity_to_frame(Vec2 u) const { return {u.x1, -u.x2}; }
};

// (4/pi) * integral over Q(x1, x2) of y1 y2 / |y|^4 omega(y) dy in frame coordinates.
// Rows in y2 sit on a log-graded grid prepared once; each row is integrated in
// y1 in closed form, so many corners can be evaluated against the same state.
class CornerIntegrator {
public:
    CornerIntegrator(const PatchSet& ps, int rows = 4000);
    double operator()(Point corner) const;

private:
    struct Interval {
        double l, r, theta;
    };
    std::vector<Interval> crossings(double y) const;
    static double row_value(const std::vector<Interval>& iv, double x1, double y);

    std::vector<std::vector<Point>> poly_;
    std::vector<double> theta_;
    double ymin_ = 1e-7, ytop_ = 2.0;
    std::vector<double> edges_;  // panel edges in y
    std::vector<double> y_, wt_;  // rows (weights include dy)
    std::vector<std::size_t> first_;  // first row of panel k
    std::vector<std::vector<Interval>> rows_;
};

double corner_integral(const SimState& s, Point corner, int rows = 4000);

struct ContactResult {
    double value = 0.0;    // min frame x1 of positive-patch nodes near the disk boundary
    bool contact = true;   // false: no node within tolerance, value is the plain minimum
    double marker = 0.0;   // frame x1 of marker 0 (NaN without markers)
};
ContactResult leftmost_contact(const SimState& s, double tol = 1e-3);

struct EnvelopeStep {
    double a = 0.0, b = 0.0;
    bool active = true;
};
EnvelopeStep envelope_track(const SimState& s, double a_prev, double b_prev, double dt, const QuadratureSpec& q = {});

enum class GrowthModel { exponential, double_exponential };
struct SingleFit {
    std::vector<double> params;
    double r2 = 0.0;
};
struct GrowthFit {
    GrowthModel model = GrowthModel::exponential;
    std::vector<double> params;
    double r2 = 0.0;
    SingleFit exp_fit;   // log v = p0 + p1 t
    SingleFit dexp_fit;  // log v = p0 + p1 exp(p2 t)
};
GrowthFit fit_growth(const std::vector<std::pair<double, double>>& series);
const char* model_name(GrowthModel m);

}  // namespace diskpatch
