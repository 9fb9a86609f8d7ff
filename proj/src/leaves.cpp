#include "henon/leaves.hpp"

#include <algorithm>
#include <cmath>

namespace henon {

double Leaf::x_at(double y) const {
    const auto& v = graph.pts;
    if (v.size() < 2) return v.empty() ? 0.0 : v[0].x;
    auto it = std::lower_bound(v.begin(), v.end(), y,
                               [](const Vec2& a, double yy) { return a.y < yy; });
    size_t i = std::clamp<size_t>(size_t(it - v.begin()), 1, v.size() - 1);
    double t = (y - v[i - 1].y) / (v[i].y - v[i - 1].y);
    return v[i - 1].x + t * (v[i].x - v[i - 1].x);
}

Vec2 Leaf::tangent_at(double y) const {
    const auto& v = graph.pts;
    if (v.size() < 2) return {0, 1};
    auto it = std::lower_bound(v.begin(), v.end(), y,
                               [](const Vec2& a, double yy) { return a.y < yy; });
    size_t i = std::clamp<size_t>(size_t(it - v.begin()), 1, v.size() - 1);
    return normalized(v[i] - v[i - 1]);
}

namespace {

// e_i field evaluation with sign continuity against a reference direction.
Vec2 field_e(const FamilyParams& p, int order, const Vec2& w, const Vec2& ref) {
    Mat2 prod{1, 0, 0, 1};
    Vec2 z = w;
    for (int k = 0; k < order; ++k) {
        prod = jacobian(p, z) * prod;
        double n = prod.norm();
        if (!(n > 0)) throw FieldDegenerate("zero cocycle norm in e_i field");
        prod = {prod.a / n, prod.b / n, prod.c / n, prod.d / n};
        z = apply(p, z);
    }
    Vec2 e = most_contracting(prod);
    if (dot(e, ref) < 0) e = e * -1.0;
    return e;
}

}  // namespace

Leaf leaf_of_order(const FamilyParams& p, const Constants& c, const Vec2& z, int i) {
    if (p.degenerate()) throw FieldDegenerate("e_i undefined for the b = 0 family");
    if (i < 1) throw ExpansionHypothesisViolated("leaf order must be >= 1");

    // Expansion certificate: ||Df^j(z)|| >= kappa^j for j <= i.
    CocycleHistory h = df_cocycle(p, z, i);
    double kappa = 1e300;
    for (int j = 1; j <= i; ++j)
        kappa = std::min(kappa, std::exp(h.log_norms[size_t(j - 1)] / j));
    double floor = std::pow(c.delta, 15.0);
    if (!(kappa >= floor))
        throw ExpansionHypothesisViolated("measured kappa below delta^15");

    Leaf leaf;
    leaf.order = i;
    leaf.base = z;
    leaf.kappa = kappa;
    leaf.marginal = kappa < std::sqrt(c.kappa0());

    double rb = p.sqrt_b();
    double hstep = rb / 64.0;
    // Integrate the field from z in both directions until |y| covers sqrt(b).
    auto integrate = [&](double dir) {
        std::vector<Vec2> pts;
        Vec2 w = z;
        Vec2 ref = field_e(p, i, w, {0, dir});
        int guard = int(6.0 * rb / hstep) + 16;
        for (int step = 0; step < guard; ++step) {
            // RK4 in arclength.
            Vec2 k1 = field_e(p, i, w, ref);
            Vec2 k2 = field_e(p, i, w + k1 * (hstep / 2), k1);
            Vec2 k3 = field_e(p, i, w + k2 * (hstep / 2), k2);
            Vec2 k4 = field_e(p, i, w + k3 * hstep, k3);
            Vec2 delta = (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (hstep / 6.0);
            w = w + delta;
            ref = normalized(delta);
            pts.push_back(w);
            if (std::fabs(w.y) > rb) break;
        }
        return pts;
    };
    std::vector<Vec2> up = integrate(+1.0);
    std::vector<Vec2> down = integrate(-1.0);
    std::reverse(down.begin(), down.end());
    Curve g;
    g.pts = std::move(down);
    g.append(z);
    for (const auto& q : up) g.append(q);
    // Monotone resample as a graph over y.
    std::sort(g.pts.begin(), g.pts.end(), [](const Vec2& a, const Vec2& b) { return a.y < b.y; });
    g.pts.erase(std::unique(g.pts.begin(), g.pts.end(),
                            [](const Vec2& a, const Vec2& b) {
                                return std::fabs(a.y - b.y) < 1e-16;
                            }),
                g.pts.end());
    if (g.size() < 3) throw FieldDegenerate("leaf integration produced too few points");
    leaf.graph = std::move(g);
    return leaf;
}

double leaf_c2_distance(const Leaf& a, const Leaf& b) {
    double lo = std::max(a.y_min(), b.y_min());
    double hi = std::min(a.y_max(), b.y_max());
    if (!(hi > lo)) return std::numeric_limits<double>::infinity();
    const int n = 65;
    double hh = (hi - lo) / (n - 1);
    double d0 = 0, d1 = 0, d2 = 0;
    std::vector<double> ga(n), gb(n);
    for (int k = 0; k < n; ++k) {
        double y = lo + k * hh;
        ga[size_t(k)] = a.x_at(y);
        gb[size_t(k)] = b.x_at(y);
        d0 = std::max(d0, std::fabs(ga[size_t(k)] - gb[size_t(k)]));
    }
    for (int k = 1; k + 1 < n; ++k) {
        double da = (ga[size_t(k + 1)] - ga[size_t(k - 1)]) / (2 * hh);
        double db = (gb[size_t(k + 1)] - gb[size_t(k - 1)]) / (2 * hh);
        d1 = std::max(d1, std::fabs(da - db));
        double sa = (ga[size_t(k + 1)] - 2 * ga[size_t(k)] + ga[size_t(k - 1)]) / (hh * hh);
        double sb = (gb[size_t(k + 1)] - 2 * gb[size_t(k)] + gb[size_t(k - 1)]) / (hh * hh);
        d2 = std::max(d2, std::fabs(sa - sb));
    }
    return d0 + d1 + d2;
}

LimitLeafReport limit_leaf(const FamilyParams& p, const Constants& c, const Vec2& z,
                           double tol, int max_order) {
    LimitLeafReport rep;
    Leaf prev = leaf_of_order(p, c, z, 1);
    for (int i = 2; i <= max_order; ++i) {
        Leaf cur = leaf_of_order(p, c, z, i);
        double d = leaf_c2_distance(cur, prev);
        rep.c2_gaps.push_back(d);
        if (d < tol) {
            cur.order = -1;
            cur.kappa = std::min(cur.kappa, prev.kappa);
            rep.leaf = std::move(cur);
            return rep;
        }
        prev = std::move(cur);
    }
    prev.order = -1;
    rep.leaf = std::move(prev);
    return rep;
}

LeafCurveIntersection leaf_curve_intersection(const Leaf& leaf, const Curve& curve,
                                              double tangency_tol) {
    LeafCurveIntersection out;
    // Signed horizontal distance from curve points to the leaf graph,
    // restricted to the leaf's y-range.
    int n = curve.size();
    std::vector<double> d(size_t(n), std::numeric_limits<double>::quiet_NaN());
    for (int i = 0; i < n; ++i) {
        double y = curve[i].y;
        if (y < leaf.y_min() || y > leaf.y_max()) continue;
        d[size_t(i)] = curve[i].x - leaf.x_at(y);
    }
    // Transversal crossings: sign changes, refined by bisection on the segment.
    std::vector<Vec2> roots;
    for (int i = 0; i + 1 < n; ++i) {
        double d0 = d[size_t(i)], d1 = d[size_t(i + 1)];
        if (std::isnan(d0) || std::isnan(d1)) continue;
        if ((d0 < 0) != (d1 < 0)) {
            Vec2 a = curve[i], b = curve[i + 1];
            for (int it = 0; it < 100; ++it) {
                Vec2 m = (a + b) * 0.5;
                double dm = m.x - leaf.x_at(m.y);
                if ((dm < 0) == (d0 < 0)) a = m;
                else b = m;
                if (dist(a, b) < 1e-12) break;
            }
            roots.push_back((a + b) * 0.5);
        }
    }
    if (roots.size() >= 2) {
        out.kind = IntersectionKind::two_points;
        out.p1 = roots.front();
        out.p2 = roots.back();
        return out;
    }
    // No (or one) sign change: quadratic least-squares fit of d around its
    // minimum-|d| vertex over 7 samples; a double root signals tangency.
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        if (std::isnan(d[size_t(i)])) continue;
        if (std::fabs(d[size_t(i)]) < bd) {
            bd = std::fabs(d[size_t(i)]);
            best = i;
        }
    }
    if (best < 0) {
        out.kind = IntersectionKind::empty;
        return out;
    }
    double base_arc = 0;
    for (int k = 0; k < best; ++k) base_arc += dist(curve[k], curve[k + 1]);

    int lo = std::max(0, best - 3), hi = std::min(n - 1, best + 3);
    std::vector<std::pair<double, double>> samples;  // (arclength offset, d)
    for (int i = lo; i <= hi; ++i) {
        if (std::isnan(d[size_t(i)])) continue;
        double si = 0;
        for (int k = std::min(i, best); k < std::max(i, best); ++k)
            si += dist(curve[k], curve[k + 1]);
        if (i < best) si = -si;
        samples.push_back({si, d[size_t(i)]});
    }
    if (samples.size() < 3) {
        out.kind = bd <= tangency_tol ? IntersectionKind::tangency : IntersectionKind::empty;
        out.tangency = curve[best];
        out.residual = bd;
        return out;
    }
    // Fit d ~ A s^2 + B s + C (normal equations, 3x3 elimination).
    double S0 = 0, S1 = 0, S2 = 0, S3 = 0, S4 = 0, T0 = 0, T1 = 0, T2 = 0;
    for (auto [si, di] : samples) {
        double s2 = si * si;
        S0 += 1;
        S1 += si;
        S2 += s2;
        S3 += s2 * si;
        S4 += s2 * s2;
        T0 += di;
        T1 += di * si;
        T2 += di * s2;
    }
    double M[3][4] = {{S0, S1, S2, T0}, {S1, S2, S3, T1}, {S2, S3, S4, T2}};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r2 = col + 1; r2 < 3; ++r2)
            if (std::fabs(M[r2][col]) > std::fabs(M[piv][col])) piv = r2;
        for (int c2 = 0; c2 < 4; ++c2) std::swap(M[col][c2], M[piv][c2]);
        for (int r2 = 0; r2 < 3; ++r2) {
            if (r2 == col || M[col][col] == 0) continue;
            double f = M[r2][col] / M[col][col];
            for (int c2 = col; c2 < 4; ++c2) M[r2][c2] -= f * M[col][c2];
        }
    }
    double C = M[0][3] / M[0][0], B = M[1][3] / M[1][1], A = M[2][3] / M[2][2];
    double disc = B * B - 4 * A * C;
    out.discriminant = disc;
    out.residual = bd;
    double scale = std::max({A * A, B * B, std::fabs(A * C), 1e-300});
    bool near_double_root = std::fabs(disc) <= 1e-12 * scale;
    if (near_double_root || bd <= tangency_tol) {
        if (A != 0 && disc > 0 && std::sqrt(disc) / std::fabs(2 * A) > 1e-4)
            throw AmbiguousTangency();  // near-zero discriminant, separated roots
        double sstar = A != 0 ? -B / (2 * A) : 0.0;
        out.kind = IntersectionKind::tangency;
        out.tangency = curve.at_arclength(base_arc + sstar);
        return out;
    }
    if (disc > 0 && A != 0) {
        // Two nearby roots the vertex sampling may have missed.
        double r1 = (-B - std::sqrt(disc)) / (2 * A);
        double r2 = (-B + std::sqrt(disc)) / (2 * A);
        // Only accept roots inside the sampled window.
        if (r1 >= samples.front().first && r2 <= samples.back().first) {
            out.kind = IntersectionKind::two_points;
            out.p1 = curve.at_arclength(base_arc + r1);
            out.p2 = curve.at_arclength(base_arc + r2);
            return out;
        }
    }
    out.kind = IntersectionKind::empty;
    return out;
}

ProjectionReport project_along_leaves(const FamilyParams& p, const Constants& c,
                                      const std::vector<Vec2>& points, const Curve& target) {
    ProjectionReport rep;
    std::vector<Leaf> leaves;
    for (const auto& z : points) {
        Leaf lf = limit_leaf(p, c, z).leaf;
        auto hits = curve_intersections(lf.graph, target);
        if (hits.empty()) throw LeafMissesTarget();
        rep.projected.push_back(hits.front().point);
        leaves.push_back(std::move(lf));
    }
    // Lipschitz ratios per consecutive pair: projected gap over the leaves'
    // y-aligned gap (Gronwall bound exp(C sqrt b)).
    double max_ratio = 1.0;
    for (size_t i = 0; i + 1 < points.size(); ++i) {
        double y0 = std::clamp(0.0, std::max(leaves[i].y_min(), leaves[i + 1].y_min()),
                               std::min(leaves[i].y_max(), leaves[i + 1].y_max()));
        double gap_src = std::fabs(leaves[i].x_at(y0) - leaves[i + 1].x_at(y0));
        double gap_dst = dist(rep.projected[i], rep.projected[i + 1]);
        if (gap_src > 1e-13) {
            double r = gap_dst / gap_src;
            rep.lipschitz_ratios.push_back(r);
            max_ratio = std::max(max_ratio, r);
        }
    }
    rep.measured_C = std::log(std::max(max_ratio, 1.0)) / p.sqrt_b();
    return rep;
}

int leaf_gap_sign(const Leaf& a, const Leaf& b, double floor) {
    double lo = std::max(a.y_min(), b.y_min());
    double hi = std::min(a.y_max(), b.y_max());
    if (!(hi > lo)) return 0;
    int sign = 0;
    const int n = 101;
    for (int k = 0; k < n; ++k) {
        double y = lo + (hi - lo) * k / (n - 1);
        double g = a.x_at(y) - b.x_at(y);
        if (std::fabs(g) <= floor) continue;
        int sg = g > 0 ? +1 : -1;
        if (sign == 0) sign = sg;
        else if (sign != sg) return 0;
    }
    return sign;
}

}  // namespace henon
