// Fixed saddles, invariant-manifold continuation, the regions R0/D0/D1/I(delta),
// and the W^s(Q) preimage curves used by the bifurcation indicators.
#ifndef HENON_MANIFOLDS_HPP
#define HENON_MANIFOLDS_HPP

#include <memory>
#include <utility>

#include "henon/curve.hpp"
#include "henon/map_core.hpp"
#include "henon/params.hpp"

namespace henon {

struct Saddle {
    Vec2 location;
    double lambda_u = 0, lambda_s = 0;
    Vec2 ev_u, ev_s;  // unit eigenvectors
    char label = '?';  // 'P' or 'Q'
};

// P near (1/2, 0), Q near (-1, 0). Closed form for the built-in coupling,
// Newton (up to 50 steps) for a user-supplied Phi.
std::pair<Saddle, Saddle> find_fixed_points(const FamilyParams& p);

struct GrowOptions {
    double max_spacing = 1e-3;
    double max_turn = 0.05;        // radians between consecutive segments
    double seed_eps = 1e-10;
    int max_vertices = 400000;
    double stop_radius = 3.0;      // abandon growth beyond this box
    int branch_sign = +1;          // +-1: which side of the eigenvector
    bool inverse = false;          // grow with f^{-1} (stable manifold)
};

struct ManifoldCurve {
    Curve curve;
    bool exits_box = false;   // some vertex left [-2,2]^2
    double arc_grown = 0.0;
    int generations = 0;
};

// Adaptive continuation of the (un)stable manifold by iterating a fundamental
// domain on the eigenvector; throws ResolutionExhausted at the vertex cap.
ManifoldCurve grow_manifold(const FamilyParams& p, const Saddle& s, double arc_budget,
                            const GrowOptions& opt = {});

inline ManifoldCurve grow_unstable_manifold(const FamilyParams& p, const Saddle& s,
                                            double arc_budget, const GrowOptions& opt = {}) {
    return grow_manifold(p, s, arc_budget, opt);
}

// W^s_loc(Q) as a curve covering |y - y_Q| <= y_halfwidth (b > 0 only).
Curve grow_stable_local(const FamilyParams& p, const Saddle& q, double y_halfwidth);

// The near-vertical component of f^{-1}(W^s_loc(Q)) on the side x > 0
// (side=+1) or x < 0 (side=-1), sampled as a graph x(y).
Curve preimage_vertical_curve(const FamilyParams& p, const Curve& ws_loc, int side,
                              double y_halfwidth, int samples = 257);

// The steep parabolic component of f^{-2}(W^s_loc(Q)) near x = 0 (a piece of
// W^s(Q) crossing the critical zone), sampled as a graph y(x).
Curve steep_parabola_piece(const FamilyParams& p, const Curve& vertical_piece,
                           double y_limit, int samples = 513);

class RegionR0 {
public:
    std::shared_ptr<const RegionGeometry> geometry;  // shared with ModifiedFamily
    Curve unstable_boundary;  // outgoing branch -> fold apex -> return branch
    Curve ws_side;            // W^s_loc(Q) piece closing the region
    Saddle P, Q;
    int apex_index = 0;       // fold vertex in unstable_boundary
    Vec2 apex;
    FamilyParams params;
    Constants consts;

    bool contains(const Vec2& z) const { return geometry->in_R0(z); }
    bool in_I(const Vec2& z, double width) const {
        return contains(z) && std::fabs(z.x) < width;
    }
    bool in_D0(const Vec2& z) const { return geometry->in_D0(z); }
    bool in_D1(const Vec2& z) const { return geometry->in_D1(z); }
    // Component of I(2 delta) \ I(delta): -1 left, +1 right, 0 neither.
    int annulus_component(const Vec2& z, double delta) const {
        if (!contains(z)) return 0;
        double ax = std::fabs(z.x);
        if (ax <= delta || ax >= 2 * delta) return 0;
        return z.x > 0 ? +1 : -1;
    }
};

// Region per Figure-1 pairing: the outer W^u loop closed against W^s_loc(Q).
// Throws BoundaryNotClosed when the loop cannot be closed near Q.
RegionR0 build_R0(const FamilyParams& p, const Constants& c,
                  const GrowOptions& opt = {});

// Discrete curvature of f^{-n}(curve) bounded by 5^{3n} at all vertices.
bool free_segment_curvature_check(const FamilyParams& p, const Curve& curve, int n);

// f^n image of a polyline with adaptive midpoint insertion (refines on the
// seed curve until the image meets the spacing/turning caps).
Curve iterate_curve(const FamilyParams& p, const Curve& seed, int n,
                    double max_spacing = 1e-3, double max_turn = 0.05,
                    int max_vertices = 2000000);

}  // namespace henon

#endif
