#include "henon/geometry.hpp"

#include <algorithm>

namespace henon {

Svd2 svd2(const Mat2& m) {
    // Right singular vectors are the eigenvectors of M^T M (symmetric 2x2).
    Svd2 out;
    double p = m.a * m.a + m.c * m.c;
    double r = m.b * m.b + m.d * m.d;
    double q = m.a * m.b + m.c * m.d;
    double mean = (p + r) / 2;
    double disc = std::hypot((p - r) / 2, q);
    double l1 = mean + disc, l2 = std::max(mean - disc, 0.0);
    out.s1 = std::sqrt(l1);
    out.s2 = std::sqrt(l2);
    if (disc == 0.0) {
        out.v1 = {1, 0};
        out.v2 = {0, 1};
    } else {
        // (M^T M - l1 I) v = 0: pick the better-conditioned expression.
        Vec2 v1 = std::fabs(p - l1) > std::fabs(r - l1) ? Vec2{q, l1 - p} : Vec2{l1 - r, q};
        if (v1.norm() == 0.0) v1 = {1, 0};
        out.v1 = normalized(v1);
        out.v2 = {-out.v1.y, out.v1.x};
    }
    Vec2 mv1 = m * out.v1;
    out.u1 = out.s1 > 0 ? mv1 / out.s1 : Vec2{1, 0};
    Vec2 mv2 = m * out.v2;
    out.u2 = out.s2 > 0 ? mv2 / out.s2 : Vec2{-out.u1.y, out.u1.x};
    return out;
}

PolygonRegion::PolygonRegion(std::vector<Vec2> boundary, int columns) : pts_(std::move(boundary)) {
    if (pts_.size() < 3) return;
    for (const auto& p : pts_) box_.absorb(p);
    ncols_ = std::max(8, columns);
    col_w_ = (box_.xmax - box_.xmin) / ncols_;
    if (col_w_ <= 0) col_w_ = 1e-300;
    col_segs_.assign(ncols_, {});
    size_t n = pts_.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& p = pts_[i];
        const Vec2& q = pts_[(i + 1) % n];
        double lo = std::min(p.x, q.x), hi = std::max(p.x, q.x);
        int c0 = std::clamp(int((lo - box_.xmin) / col_w_), 0, ncols_ - 1);
        int c1 = std::clamp(int((hi - box_.xmin) / col_w_), 0, ncols_ - 1);
        for (int c = c0; c <= c1; ++c) col_segs_[c].push_back(uint32_t(i));
    }
}

bool PolygonRegion::contains(const Vec2& p) const {
    if (empty() || !box_.contains(p)) return false;
    int c = std::clamp(int((p.x - box_.xmin) / col_w_), 0, ncols_ - 1);
    // Even-odd rule with a vertical upward ray.
    int crossings = 0;
    size_t n = pts_.size();
    for (uint32_t i : col_segs_[c]) {
        const Vec2& a = pts_[i];
        const Vec2& b = pts_[(i + 1) % n];
        // Half-open on x so shared vertices are not double counted.
        if ((a.x <= p.x) == (b.x <= p.x)) continue;
        double yi = a.y + (b.y - a.y) * (p.x - a.x) / (b.x - a.x);
        if (yi > p.y) ++crossings;
    }
    return (crossings & 1) != 0;
}

double PolygonRegion::boundary_distance(const Vec2& p) const {
    double best = std::numeric_limits<double>::infinity();
    size_t n = pts_.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = pts_[i];
        const Vec2& b = pts_[(i + 1) % n];
        Vec2 ab = b - a;
        double L2 = ab.norm2();
        double t = L2 > 0 ? std::clamp(dot(p - a, ab) / L2, 0.0, 1.0) : 0.0;
        best = std::min(best, dist(p, a + ab * t));
    }
    return best;
}

double PolygonRegion::boundary_distance_within(const Vec2& p, double cutoff) const {
    if (empty()) return cutoff;
    if (box_.dist(p) >= cutoff) return cutoff;
    int c0 = std::clamp(int((p.x - cutoff - box_.xmin) / col_w_), 0, ncols_ - 1);
    int c1 = std::clamp(int((p.x + cutoff - box_.xmin) / col_w_), 0, ncols_ - 1);
    double best = cutoff;
    size_t n = pts_.size();
    uint32_t last = UINT32_MAX;
    for (int c = c0; c <= c1; ++c) {
        for (uint32_t i : col_segs_[size_t(c)]) {
            if (i == last) continue;
            last = i;
            const Vec2& a = pts_[i];
            const Vec2& b = pts_[(i + 1) % n];
            Vec2 ab = b - a;
            double L2 = ab.norm2();
            double t = L2 > 0 ? std::clamp(dot(p - a, ab) / L2, 0.0, 1.0) : 0.0;
            best = std::min(best, dist(p, a + ab * t));
        }
    }
    return best;
}

bool segment_intersect(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1,
                       double* t, double* u) {
    Vec2 r = a1 - a0, s = b1 - b0;
    double den = cross(r, s);
    if (den == 0.0) return false;
    Vec2 qp = b0 - a0;
    double tt = cross(qp, s) / den;
    double uu = cross(qp, r) / den;
    if (tt < 0.0 || tt > 1.0 || uu < 0.0 || uu > 1.0) return false;
    if (t) *t = tt;
    if (u) *u = uu;
    return true;
}

}  // namespace henon
