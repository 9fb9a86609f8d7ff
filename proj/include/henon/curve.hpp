// Polyline curves with discrete tangent/curvature data and the horizontal /
// C^2(b) / vertical classification used throughout.
#ifndef HENON_CURVE_HPP
#define HENON_CURVE_HPP

#include <vector>

#include "henon/geometry.hpp"

namespace henon {

struct CurveClass {
    bool horizontal = false;  // slopes <= 1/10 and curvature <= 1/10
    bool c2b = false;         // slopes <= sqrt(b) and curvature <= sqrt(b)
    bool vertical = false;    // graph over y, |x'| <= C sqrt(b), |x''| <= C sqrt(b)
    double max_slope = 0.0;
    double max_curvature = 0.0;
    double vertical_constant = 0.0;  // measured C for the vertical clauses
};

struct Curve {
    std::vector<Vec2> pts;

    int size() const { return int(pts.size()); }
    bool empty() const { return pts.empty(); }
    const Vec2& operator[](int i) const { return pts[size_t(i)]; }

    double length() const;
    // Unit tangent at vertex i (central difference inside, one-sided at ends).
    Vec2 tangent(int i) const;
    // Discrete curvature at an interior vertex via the circumscribed circle.
    double curvature(int i) const;

    // Point at arclength s from the start (clamped).
    Vec2 at_arclength(double s) const;
    // Vertex index nearest to arclength s.
    int index_at_arclength(double s) const;

    double min_distance_to(const Vec2& p) const;
    Vec2 closest_point_to(const Vec2& p) const;

    Curve subcurve(int i0, int i1) const;  // inclusive vertex range
    void append(const Vec2& p) { pts.push_back(p); }
};

// Classification thresholds depend on the family's b; C for the vertical
// clauses is fixed at 10 and the measured constant is reported.
CurveClass classify_curve(const Curve& c, double b, double vertical_C = 10.0);

// Intersections of two polylines (transversal crossings as point + params).
struct CurveIntersection {
    Vec2 point;
    int seg_a = 0, seg_b = 0;
    double angle = 0.0;  // crossing angle between the local tangents
};
std::vector<CurveIntersection> curve_intersections(const Curve& a, const Curve& b);

}  // namespace henon

#endif
