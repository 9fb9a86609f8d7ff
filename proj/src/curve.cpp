#include "henon/curve.hpp"

#include <algorithm>
#include <cmath>

namespace henon {

double Curve::length() const {
    double L = 0;
    for (size_t i = 1; i < pts.size(); ++i) L += dist(pts[i - 1], pts[i]);
    return L;
}

Vec2 Curve::tangent(int i) const {
    int n = size();
    if (n < 2) return {1, 0};
    int a = std::max(0, i - 1), b = std::min(n - 1, i + 1);
    return normalized(pts[size_t(b)] - pts[size_t(a)]);
}

double Curve::curvature(int i) const {
    int n = size();
    if (i <= 0 || i >= n - 1) return 0.0;
    const Vec2& p0 = pts[size_t(i - 1)];
    const Vec2& p1 = pts[size_t(i)];
    const Vec2& p2 = pts[size_t(i + 1)];
    double a = dist(p0, p1), b = dist(p1, p2), c = dist(p0, p2);
    if (a == 0 || b == 0 || c == 0) return 0.0;
    double cr = cross(p1 - p0, p2 - p1);
    return 2.0 * std::fabs(cr) / (a * b * c);
}

Vec2 Curve::at_arclength(double s) const {
    if (pts.empty()) return {};
    if (s <= 0) return pts.front();
    double acc = 0;
    for (size_t i = 1; i < pts.size(); ++i) {
        double seg = dist(pts[i - 1], pts[i]);
        if (acc + seg >= s) {
            double t = seg > 0 ? (s - acc) / seg : 0.0;
            return pts[i - 1] + (pts[i] - pts[i - 1]) * t;
        }
        acc += seg;
    }
    return pts.back();
}

int Curve::index_at_arclength(double s) const {
    if (pts.empty()) return 0;
    double acc = 0;
    for (size_t i = 1; i < pts.size(); ++i) {
        acc += dist(pts[i - 1], pts[i]);
        if (acc >= s) return int(i);
    }
    return size() - 1;
}

double Curve::min_distance_to(const Vec2& p) const {
    return dist(p, closest_point_to(p));
}

Vec2 Curve::closest_point_to(const Vec2& p) const {
    if (pts.empty()) return {};
    Vec2 best = pts[0];
    double bd = dist(p, best);
    for (size_t i = 1; i < pts.size(); ++i) {
        Vec2 ab = pts[i] - pts[i - 1];
        double L2 = ab.norm2();
        double t = L2 > 0 ? std::clamp(dot(p - pts[i - 1], ab) / L2, 0.0, 1.0) : 0.0;
        Vec2 q = pts[i - 1] + ab * t;
        double d = dist(p, q);
        if (d < bd) {
            bd = d;
            best = q;
        }
    }
    return best;
}

Curve Curve::subcurve(int i0, int i1) const {
    Curve c;
    i0 = std::clamp(i0, 0, size() - 1);
    i1 = std::clamp(i1, 0, size() - 1);
    if (i0 > i1) std::swap(i0, i1);
    c.pts.assign(pts.begin() + i0, pts.begin() + i1 + 1);
    return c;
}

CurveClass classify_curve(const Curve& c, double b, double vertical_C) {
    CurveClass out;
    int n = c.size();
    if (n < 3) return out;
    double rb = std::sqrt(b);
    double max_slope = 0, max_curv = 0;
    bool graph_over_y = true;
    double max_xp = 0, max_xpp = 0;
    for (int i = 0; i < n; ++i) {
        Vec2 t = c.tangent(i);
        max_slope = std::max(max_slope, slope_of(t));
        max_curv = std::max(max_curv, c.curvature(i));
        if (i > 0 && (c[i].y - c[i - 1].y) * (i > 1 ? (c[i - 1].y - c[i - 2].y) : (c[i].y - c[i - 1].y)) < 0)
            graph_over_y = false;
        if (t.y == 0)
            graph_over_y = false;
        else
            max_xp = std::max(max_xp, std::fabs(t.x / t.y));
    }
    // |x''(y)| from curvature of the y-graph: kappa = |x''| / (1+x'^2)^{3/2}.
    for (int i = 1; i < n - 1; ++i) {
        double k = c.curvature(i);
        Vec2 t = c.tangent(i);
        if (t.y != 0) {
            double xp = std::fabs(t.x / t.y);
            max_xpp = std::max(max_xpp, k * std::pow(1 + xp * xp, 1.5));
        }
    }
    out.max_slope = max_slope;
    out.max_curvature = max_curv;
    out.horizontal = max_slope <= 0.1 && max_curv <= 0.1;
    out.c2b = rb > 0 && max_slope <= rb && max_curv <= rb;
    if (graph_over_y && rb > 0) {
        double cc = std::max(max_xp, max_xpp) / rb;
        out.vertical_constant = cc;
        out.vertical = cc <= vertical_C;
    }
    return out;
}

std::vector<CurveIntersection> curve_intersections(const Curve& a, const Curve& b) {
    std::vector<CurveIntersection> out;
    BBox bb;
    for (const auto& p : b.pts) bb.absorb(p);
    for (int i = 0; i + 1 < a.size(); ++i) {
        const Vec2& a0 = a[i];
        const Vec2& a1 = a[i + 1];
        BBox sb;
        sb.absorb(a0);
        sb.absorb(a1);
        if (sb.xmax < bb.xmin || sb.xmin > bb.xmax || sb.ymax < bb.ymin || sb.ymin > bb.ymax)
            continue;
        for (int j = 0; j + 1 < b.size(); ++j) {
            double t, u;
            if (segment_intersect(a0, a1, b[j], b[j + 1], &t, &u)) {
                CurveIntersection ci;
                ci.point = a0 + (a1 - a0) * t;
                ci.seg_a = i;
                ci.seg_b = j;
                ci.angle = line_angle(a1 - a0, b[j + 1] - b[j]);
                out.push_back(ci);
            }
        }
    }
    return out;
}

}  // namespace henon
