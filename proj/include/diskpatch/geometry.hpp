#pragma once

#include <cstddef>
#include <vector>

#include "diskpatch/vec.hpp"

namespace diskpatch {

struct DiskDomain {
    Point center{0.0, 0.0};
    double radius = 1.0;

    // closed disk, with a relative slack
    bool contains(Point p, double tol = 1e-10) const {
        return norm(p - center) <= radius * (1.0 + tol);
    }
    bool operator==(const DiskDomain&) const = default;
};

// Closed polygonal curve; node N-1 connects back to node 0.
class ClosedCurve {
public:
    static constexpr std::size_t min_nodes = 8;

    ClosedCurve() = default;
    explicit ClosedCurve(std::vector<Point> nodes);

    std::size_t size() const { return nodes_.size(); }
    const Point& operator[](std::size_t i) const { return nodes_[i]; }
    const std::vector<Point>& nodes() const { return nodes_; }
    std::vector<Point>& mutable_nodes() { return nodes_; }
    std::size_t next(std::size_t i) const { return i + 1 == nodes_.size() ? 0 : i + 1; }
    std::size_t prev(std::size_t i) const { return i == 0 ? nodes_.size() - 1 : i - 1; }

    bool operator==(const ClosedCurve&) const = default;

private:
    std::vector<Point> nodes_;
};

// p* = c + R^2 (p - c) / |p - c|^2
Point invert_point(Point p, const DiskDomain& disk);

double signed_area(const ClosedCurve& c);
double perimeter(const ClosedCurve& c);
bool is_simple(const ClosedCurve& c);
// Throws InvalidPatch unless the curve is CCW, simple and inside the closed disk.
void check_curve(const ClosedCurve& c, const DiskDomain& disk);

double point_segment_distance(Point p, Point a, Point b);
double segment_distance(Point a, Point b, Point c, Point d);
// Minimum distance between the two polygons (0 if they touch or cross).
double min_distance(const ClosedCurve& a, const ClosedCurve& b);
// Distance from p to the polygon.
double distance_to_curve(Point p, const ClosedCurve& c);
// Winding number of the polygon about p (p not on the curve).
int winding_number(const ClosedCurve& c, Point p);

// Periodic cubic spline through the nodes, parametrised by cumulative chord length.
// Values can be any Vec2 field sampled at the nodes (positions, tangent vectors).
class PeriodicSpline {
public:
    PeriodicSpline() = default;
    PeriodicSpline(const std::vector<double>& knots, double period, const std::vector<Vec2>& values);
    // Positions of the curve itself.
    explicit PeriodicSpline(const ClosedCurve& c);

    std::size_t pieces() const { return y_.size(); }
    double period() const { return period_; }
    double knot(std::size_t i) const { return t_[i]; }
    double piece_length(std::size_t i) const { return h_[i]; }

    // Evaluation on piece i at local parameter u in [0, h_i].
    Vec2 value(std::size_t i, double u) const;
    Vec2 d1(std::size_t i, double u) const;
    Vec2 d2(std::size_t i, double u) const;
    // Evaluation at global parameter (wrapped into [0, period)).
    Vec2 at(double t) const;
    std::size_t locate(double t, double& u) const;

private:
    std::vector<double> t_;
    std::vector<double> h_;
    std::vector<Vec2> y_;
    std::vector<Vec2> m_;  // second derivatives at knots
    double period_ = 0.0;
};

std::vector<double> chord_knots(const ClosedCurve& c, double& period);

// Arclength of spline piece i between local parameters 0 and u.
double spline_arclength(const PeriodicSpline& s, std::size_t i, double u);

ClosedCurve resample_constant_speed(const ClosedCurve& c, std::size_t n);
std::vector<double> curvature(const ClosedCurve& c);
// Unit tangent (direction of traversal) at the nodes, from the spline.
std::vector<Vec2> unit_tangents(const ClosedCurve& c);

}  // namespace diskpatch
