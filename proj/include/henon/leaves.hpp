// Long stable leaves: integral curves of the most-contracting fields e_i,
// their contraction certificates, leaf/curve intersection and tangency
// classification, and projection along leaves.
#ifndef HENON_LEAVES_HPP
#define HENON_LEAVES_HPP

#include <optional>

#include "henon/curve.hpp"
#include "henon/linalg.hpp"
#include "henon/map_core.hpp"

namespace henon {

struct Leaf {
    Curve graph;      // sampled as x(y), pts ordered by increasing y
    int order = 0;    // i for Gamma_i, -1 for the limit leaf
    Vec2 base;
    double kappa = 0.0;     // measured expansion certificate min_i ||Df^i||^{1/i}
    bool marginal = false;  // kappa below kappa0^{1/2} but above delta^15

    double x_at(double y) const;
    Vec2 tangent_at(double y) const;
    double y_min() const { return graph.pts.front().y; }
    double y_max() const { return graph.pts.back().y; }
};

// Integral curve of the e_i field through z, extended to |y| = sqrt(b) and
// resampled as a graph. Throws ExpansionHypothesisViolated when the measured
// kappa falls below delta^15, FieldDegenerate for b = 0 or undefined e_i.
Leaf leaf_of_order(const FamilyParams& p, const Constants& c, const Vec2& z, int i);

// Leaf of the first order n* at which d_C2(Gamma_n, Gamma_{n-1}) < tol.
struct LimitLeafReport {
    Leaf leaf;
    std::vector<double> c2_gaps;  // successive d_C2 distances
};
LimitLeafReport limit_leaf(const FamilyParams& p, const Constants& c, const Vec2& z,
                           double tol = 1e-12, int max_order = 40);

// C^2 distance between two leaves viewed as functions on a common y-range.
double leaf_c2_distance(const Leaf& a, const Leaf& b);

enum class IntersectionKind { two_points, tangency, empty };

struct LeafCurveIntersection {
    IntersectionKind kind = IntersectionKind::empty;
    Vec2 p1, p2;          // the two crossings (kind == two_points)
    Vec2 tangency;        // kind == tangency
    double residual = 0;  // |signed distance| at the tangency/closest point
    double discriminant = 0;
};

// Classify leaf against a curve: two transversal points, a quadratic
// tangency, or empty. Roots refined below 1e-10.
LeafCurveIntersection leaf_curve_intersection(const Leaf& leaf, const Curve& curve,
                                              double tangency_tol = 1e-10);

struct ProjectionReport {
    std::vector<Vec2> projected;
    std::vector<double> lipschitz_ratios;  // projected gap / y-aligned gap
    double measured_C = 0.0;               // from ratio <= exp(C sqrt b)
};

// Project points along their limit leaves onto the target curve.
// Throws LeafMissesTarget when some leaf does not cross the target.
ProjectionReport project_along_leaves(const FamilyParams& p, const Constants& c,
                                      const std::vector<Vec2>& points, const Curve& target);

// Sign of x_a(y) - x_b(y) over the common y-range: +1, -1, or 0 when the gap
// changes sign (leaves cross) or stays below the resolution floor.
int leaf_gap_sign(const Leaf& a, const Leaf& b, double floor = 1e-13);

}  // namespace henon

#endif
