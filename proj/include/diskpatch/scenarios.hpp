#pragma once

#include <cstddef>
#include <numbers>
#include <vector>

#include "diskpatch/state.hpp"

namespace diskpatch {

enum class ScenarioKind { single_patch, symmetric_pair, ks_example };
enum class Shape { ellipse, perturbed_circle };

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::single_patch;
    std::size_t N = 512;
    DiskDomain disk{};

    // single patch / base patch of the pair
    Shape shape = Shape::ellipse;
    Point center{0.0, 0.0};
    double axis_a = 0.5;
    double axis_b = 0.5;
    double tilt = 0.0;
    double perturb_amp = 0.0;  // r = a (1 + amp cos(mode t))
    int perturb_mode = 3;
    double theta = 1.0;

    // strip example: half-width s of the vortex-free strip, fillet radius
    double strip = 0.05;
    double rounding = 0.01;
    double gamma_cone = std::numbers::pi / 10;
    // frame x1 of the boundary marker; 0 puts it at the upper fillet tangency point
    double marker_x1 = 0.0;
};

struct InitialData {
    PatchSet ps;
    TangentField w;
    std::vector<Point> markers;
};

InitialData make_single_patch(const ScenarioSpec& spec);
InitialData make_symmetric_pair(const ScenarioSpec& spec);
InitialData make_ks_example(const ScenarioSpec& spec);
InitialData make_scenario(const ScenarioSpec& spec);

// Mirror through the vertical line x1 = c1 of the disk.
inline Point mirror(Point p, const DiskDomain& d) { return {2.0 * d.center.x1 - p.x1, p.x2}; }

// Fillet geometry of the strip example, in original coordinates.
struct StripGeometry {
    Point top_fillet, bottom_fillet;   // fillet centres
    Point top_touch, bottom_touch;     // tangency points on the disk boundary
    Point top_chord, bottom_chord;     // tangency points on the chord
};
StripGeometry strip_geometry(const DiskDomain& d, double s, double rho);

}  // namespace diskpatch

namespace diskpatch {

// Node j of the mirror is the reflection of node (N-j) mod N, which keeps the
// mirror counterclockwise; w maps to (w1, -w2) at the reflected point.
void mirror_patch(const std::vector<Point>& nodes, const std::vector<Vec2>& w, const DiskDomain& d,
                  std::vector<Point>& out_nodes, std::vector<Vec2>& out_w);

}  // namespace diskpatch
