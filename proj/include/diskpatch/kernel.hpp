#pragma once

#include <array>
#include <functional>
#include <vector>

#include "diskpatch/geometry.hpp"

namespace diskpatch {

struct Patch {
    double theta = 1.0;
    ClosedCurve boundary;
    bool operator==(const Patch&) const = default;
};

struct PatchSet {
    DiskDomain disk;
    std::vector<Patch> patches;
    bool operator==(const PatchSet&) const = default;
};

// Throws InvalidPatch for zero strengths, bad curves, or overlapping patches.
void validate(const PatchSet& ps);

struct QuadratureSpec {
    int refinement = 4;       // straight sub-segments per spline piece
    int oracle_cells = 1024;  // rows of the area oracle
    double pv_exclusion = 1e-3;
};

struct VelocityJet {
    Vec2 u;
    Mat2 grad;                  // grad.m[i][j] = d_j u_i
    std::array<Mat2, 2> hess;   // hess[i].m[j][k] = d_j d_k u_i
};

// Contours of a PatchSet, prepared once and evaluated at many points.
class VelocityField {
public:
    VelocityField(const PatchSet& ps, const QuadratureSpec& q);

    Vec2 free_velocity(Point x) const;
    Vec2 image_velocity(Point x) const;
    Vec2 velocity(Point x) const;
    Mat2 gradient(Point x) const;
    std::array<Mat2, 2> hessian(Point x) const;
    // image part only (x away from the reflected support)
    std::array<Mat2, 2> image_hessian(Point x) const;

    // No exclusion check; x must not lie on a contour.
    Mat2 gradient_unchecked(Point x) const;
    // Velocity plus gradient in one pass (x off the contours).
    void velocity_and_gradient(Point x, Vec2& u, Mat2& g) const;

    // Distance from x to the refined contours.
    double distance_to_boundary(Point x) const;
    const DiskDomain& disk() const { return disk_; }
    const QuadratureSpec& spec() const { return spec_; }

    struct Contour {
        double theta;
        std::vector<cplx> v;    // disk-centered sub-vertices
        std::vector<cplx> d;    // v[k+1]-v[k]
        std::vector<cplx> rho;  // d / conj(d)
        double lo1, hi1, lo2, hi2;
        double hmax = 0.0;
    };
    const std::vector<Contour>& contours() const { return contours_; }

private:
    enum Need : unsigned { kVel = 1, kGrad = 2, kHess = 4, kFree = 8, kImage = 16 };
    struct Raw {
        cplx U{}, A{}, B{}, T{};
    };
    Raw eval(cplx z, unsigned need) const;
    void check_in_disk(cplx z) const;
    void check_exclusion(Point x) const;

    DiskDomain disk_;
    QuadratureSpec spec_;
    std::vector<Contour> contours_;
};

// Refined sub-vertices of a closed curve along its periodic spline.
std::vector<Point> refine_curve(const ClosedCurve& c, int refinement);

Vec2 free_velocity(const PatchSet& ps, Point x, const QuadratureSpec& q = {});
Vec2 image_velocity(const PatchSet& ps, Point x, const QuadratureSpec& q = {});
Vec2 total_velocity(const PatchSet& ps, Point x, const QuadratureSpec& q = {});
Mat2 velocity_gradient(const PatchSet& ps, Point x, const QuadratureSpec& q = {});
std::array<Mat2, 2> velocity_hessian(const PatchSet& ps, Point x, const QuadratureSpec& q = {});
VelocityJet velocity_jet(const PatchSet& ps, Point x, const QuadratureSpec& q = {});

// Area quadrature of the Biot-Savart integral, independent of the contour path.
// Rows in x2 are integrated numerically, each row in closed form (free part)
// and by Gauss-Legendre (image part).
struct RowRegion {
    double theta = 1.0;
    double lo2 = 0.0, hi2 = 0.0;
    // sorted x1 crossings of the horizontal line at height y2
    std::function<std::vector<double>(double)> crossings;
};
RowRegion polygon_region(const Patch& p);
Vec2 oracle_velocity_area(const DiskDomain& disk, const std::vector<RowRegion>& regions, Point x, int cells);
Vec2 oracle_velocity_area(const PatchSet& ps, Point x, int cells);

// max |u(x)-u(y)| / (|x-y| log(1 + 1/|x-y|)) over distinct pairs
double log_lipschitz_check(const PatchSet& ps, const std::vector<Point>& points, const QuadratureSpec& q = {});

}  // namespace diskpatch
