#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "henon/manifolds.hpp"

using namespace henon;

namespace {

FamilyParams params(double a, double b, Orientation o = Orientation::preserving) {
    FamilyParams p;
    p.a = a;
    p.b = b;
    p.orientation = o;
    return p;
}

}  // namespace

TEST_CASE("find_fixed_points: degenerate roots and small-b continuity") {
    auto [P0, Q0] = find_fixed_points(params(2, 0));
    CHECK(P0.location.x == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(Q0.location.x == doctest::Approx(-1.0).epsilon(1e-14));

    auto p = params(2, 1e-4);
    auto [P, Q] = find_fixed_points(p);
    CHECK(dist(P.location, {0.5, 0}) < 0.02);
    CHECK(dist(Q.location, {-1, 0}) < 0.02);
    CHECK(dist(apply(p, P.location), P.location) < 1e-12);
    CHECK(dist(apply(p, Q.location), Q.location) < 1e-12);
    CHECK(Q.lambda_u == doctest::Approx(4.0).epsilon(0.01));
    CHECK(std::fabs(P.lambda_u) > 1.0);
    CHECK(std::fabs(P.lambda_s) < 1.0);
    // Saddle ordering: |lambda_u| > 1 > |lambda_s|.
    CHECK(std::fabs(Q.lambda_s) < 1.0);
}

TEST_CASE("grow_manifold: fundamental-segment stretch factor") {
    auto p = params(2, 1e-4);
    auto [P, Q] = find_fixed_points(p);
    // One iterate of a tiny segment on the unstable eigenvector stretches by
    // about |lambda_u|.
    Vec2 z0 = Q.location + Q.ev_u * 1e-6;
    Vec2 z1 = Q.location + Q.ev_u * 2e-6;
    double len0 = dist(z0, z1);
    double len1 = dist(apply(p, z0), apply(p, z1));
    CHECK(len1 / len0 == doctest::Approx(std::fabs(Q.lambda_u)).epsilon(0.1));
}

TEST_CASE("grow_manifold: invariance within tube") {
    auto p = params(2, 1e-4);
    auto [P, Q] = find_fixed_points(p);
    GrowOptions opt;
    ManifoldCurve mc = grow_manifold(p, Q, 2.0, opt);
    const Curve& c = mc.curve;
    REQUIRE(c.size() > 100);
    // Map a sample of vertices; images must stay near the extended polyline.
    ManifoldCurve longer = grow_manifold(p, Q, 4.5, opt);
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> pick(0, c.size() - 1);
    for (int k = 0; k < 60; ++k) {
        Vec2 img = apply(p, c[pick(rng)]);
        double d = longer.curve.min_distance_to(img);
        CHECK(d < 10 * opt.max_spacing);
    }
}

TEST_CASE("grow_manifold: degenerate 1-D stays in the invariant interval") {
    auto p = params(2, 0);
    auto [P, Q] = find_fixed_points(p);
    ManifoldCurve mc = grow_manifold(p, Q, 3.5);
    for (const auto& z : mc.curve.pts) {
        CHECK(z.y == 0.0);
        CHECK(z.x >= 1 - 2 * p.a - 1e-9);
        CHECK(z.x <= 1 + 1e-9);
    }
}

TEST_CASE("build_R0: membership of landmark points") {
    auto p = params(2.0, 1e-4);
    Constants c;
    RegionR0 r = build_R0(p, c);
    CHECK(r.contains({0, 0}));
    CHECK(r.contains(r.P.location));
    CHECK(!r.contains({1.5, 0}));
    CHECK(r.in_D0({1.5, 0}));
    CHECK(r.in_D1({-2.5, 0.0}));
    CHECK(r.in_D1({-2.5, 0.5 * p.sqrt_b()}));
    CHECK(!r.in_D1({-2.5, 2 * p.sqrt_b()}));
    // I(delta) strip.
    CHECK(r.in_I({0, 0}, c.delta));
    CHECK(!r.in_I({0.2, 0}, c.delta));
    CHECK(r.annulus_component({0.07, 0}, c.delta) == +1);
    CHECK(r.annulus_component({-0.07, 0}, c.delta) == -1);
    CHECK(r.annulus_component({0.02, 0}, c.delta) == 0);
    // Apex near (1, 0): the first fold.
    CHECK(r.apex.x == doctest::Approx(1.0).epsilon(0.05));
    // Thin lens: height at x = 0 is O(sqrt b).
    CHECK(!r.contains({0, 3 * p.sqrt_b()}));
    CHECK(!r.contains({0, -3 * p.sqrt_b()}));
}

TEST_CASE("build_R0: exits never re-enter under the modified family") {
    auto p = params(2.02, 1e-4);
    Constants c;
    RegionR0 r = build_R0(p, c);
    ModifiedFamily fam(p, r.geometry);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ux(-1.0, 1.0), uy(-0.02, 0.02);
    int sampled = 0;
    int reentered = 0;
    while (sampled < 2000) {
        Vec2 z{ux(rng), uy(rng)};
        if (!r.contains(z)) continue;
        ++sampled;
        // An exit counts once the orbit has stayed out for 3 consecutive
        // steps (hairline flicker at the polyline resolution is not an exit).
        int consecutive_out = 0;
        Vec2 w = z;
        for (int i = 0; i < 1000; ++i) {
            w = fam.apply_modified(w).first;
            if (std::fabs(w.x) > 1e5) break;
            bool in = r.contains(w);
            if (consecutive_out >= 3 && in) {
                ++reentered;
                break;
            }
            consecutive_out = in ? 0 : consecutive_out + 1;
        }
    }
    CHECK(reentered == 0);
}

TEST_CASE("classify_curve") {
    double b = 1e-4, rb = 1e-2;
    // Straight horizontal segment: horizontal and C2(b).
    Curve flat;
    for (int i = 0; i <= 50; ++i) flat.append({-0.5 + 0.02 * i, 0.1});
    CurveClass cf = classify_curve(flat, b);
    CHECK(cf.horizontal);
    CHECK(cf.c2b);
    CHECK(!cf.vertical);

    // Parabola with slope exceeding sqrt(b): not C2(b).
    Curve par;
    for (int i = 0; i <= 100; ++i) {
        double x = -0.5 + 0.01 * i;
        par.append({x, x * x / (2 * rb)});
    }
    CurveClass cp = classify_curve(par, b);
    CHECK(!cp.c2b);

    // A near-vertical graph x(y) with |x'|, |x''| <= sqrt(b): vertical class.
    Curve vert;
    for (int i = 0; i <= 100; ++i) {
        double y = -rb + 2 * rb * i / 100.0;
        vert.append({0.3 + 0.5 * rb * y * y, y});
    }
    CurveClass cv = classify_curve(vert, b);
    CHECK(cv.vertical);
    CHECK(cv.vertical_constant <= 1.5);
}

TEST_CASE("free_segment_curvature_check") {
    auto p = params(2.0, 1e-4);
    // Straight horizontal segment through I(delta) region: n = 0 trivially fine.
    Curve seg;
    for (int i = 0; i <= 200; ++i) seg.append({-0.2 + 0.4 * i / 200.0, 0.0});
    CHECK(free_segment_curvature_check(p, seg, 0));
    CHECK(free_segment_curvature_check(p, seg, 1));
}

TEST_CASE("preimage curves: vertical piece and steep parabola") {
    auto p = params(2.0, 1e-4);
    auto [P, Q] = find_fixed_points(p);
    double rb = p.sqrt_b();
    Curve ws = grow_stable_local(p, Q, 5 * rb);
    REQUIRE(ws.size() > 10);
    // W^s_loc(Q) is a near-vertical curve through Q.
    double span_x = 0;
    for (const auto& z : ws.pts) span_x = std::max(span_x, std::fabs(z.x - Q.location.x));
    CHECK(span_x < 0.05);
    CHECK(ws.min_distance_to(Q.location) < 1e-6);

    // The right preimage component sits near x = +1 and maps onto W^s_loc(Q).
    Curve vp = preimage_vertical_curve(p, ws, +1, 2 * rb);
    REQUIRE(vp.size() > 10);
    for (const auto& z : vp.pts) {
        CHECK(std::fabs(z.x - 1.0) < 0.05);
        Vec2 img = apply(p, z);
        CHECK(std::fabs(img.x - Q.location.x) < 0.02);
    }

    // The steep parabola passes near the origin and maps onto the vertical piece.
    Curve sp = steep_parabola_piece(p, vp, 1.5 * rb);
    REQUIRE(sp.size() > 10);
    double best = 1e300;
    for (const auto& z : sp.pts) best = std::min(best, z.norm());
    CHECK(best < 0.05);
    for (size_t i = 0; i < sp.pts.size(); i += 7) {
        Vec2 img = apply(p, sp.pts[i]);
        CHECK(std::fabs(img.x - 1.0) < 0.05);
    }
}
