#include "henon/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace henon {

namespace {

Saddle make_saddle(const FamilyParams& p, double x, char label) {
    Saddle s;
    double rb = p.sqrt_b();
    double cs = p.coupling_sign();
    s.location = {x, cs * rb * x};
    s.label = label;
    Mat2 J = jacobian(p, s.location);
    double tr = J.a + J.d, det = J.det();
    double disc = std::sqrt(std::max(tr * tr / 4 - det, 0.0));
    double l1 = tr / 2 + disc, l2 = tr / 2 - disc;
    if (std::fabs(l1) < std::fabs(l2)) std::swap(l1, l2);
    s.lambda_u = l1;
    s.lambda_s = l2;
    auto eigvec = [&](double lam) {
        // (J - lam I) v = 0; pick the better-conditioned row.
        Vec2 r1{J.a - lam, J.b}, r2{J.c, J.d - lam};
        Vec2 v = r1.norm() > r2.norm() ? Vec2{-r1.y, r1.x} : Vec2{-r2.y, r2.x};
        return normalized(v);
    };
    s.ev_u = eigvec(s.lambda_u);
    s.ev_s = p.degenerate() ? Vec2{0, 1} : eigvec(s.lambda_s);
    if (s.ev_u.x < 0) s.ev_u = s.ev_u * -1.0;
    if (s.ev_s.y < 0) s.ev_s = s.ev_s * -1.0;
    return s;
}

}  // namespace

std::pair<Saddle, Saddle> find_fixed_points(const FamilyParams& p) {
    if (!p.phi) {
        // Fixed point: x = 1 - a x^2 + sqrt(b) y and y = s sqrt(b) x
        // gives a x^2 + (1 - s b) x - 1 = 0.
        double sb = p.coupling_sign() * p.b;
        double disc = std::sqrt((1 - sb) * (1 - sb) + 4 * p.a);
        double xp = (-(1 - sb) + disc) / (2 * p.a);
        double xq = (-(1 - sb) - disc) / (2 * p.a);
        return {make_saddle(p, xp, 'P'), make_saddle(p, xq, 'Q')};
    }
    // Newton from the degenerate seeds for a user-supplied Phi.
    auto newton = [&](Vec2 z, char label) {
        for (int it = 0; it < 50; ++it) {
            Vec2 F = apply(p, z) - z;
            if (F.norm() < 1e-13) {
                Saddle s = make_saddle(p, z.x, label);
                s.location = z;
                return s;
            }
            Mat2 J = jacobian(p, z);
            Mat2 A{J.a - 1, J.b, J.c, J.d - 1};
            z = z - A.inverse() * F;
            if (!z.finite()) break;
        }
        throw NewtonDiverged("fixed point Newton diverged for label " + std::string(1, label));
    };
    double disc = std::sqrt(1 + 4 * p.a);
    return {newton({(-1 + disc) / (2 * p.a), 0}, 'P'),
            newton({(-1 - disc) / (2 * p.a), 0}, 'Q')};
}

namespace {

struct Grower {
    const FamilyParams& p;
    const Saddle& s;
    const GrowOptions& opt;
    int k0;           // map applications per generation (2 if eigenvalue < 0)
    double growth;    // |lambda|^{k0}
    bool inverse;

    Vec2 step(const Vec2& z) const { return inverse ? inverse_apply(p, z) : apply(p, z); }

    Vec2 seed(double t) const {
        double lam = inverse ? 1.0 / s.lambda_s : s.lambda_u;
        Vec2 dir = inverse ? s.ev_s : s.ev_u;
        double mag = opt.seed_eps * std::pow(std::fabs(std::pow(lam, k0)), t);
        return s.location + dir * (opt.branch_sign * mag);
    }

    Vec2 eval(int gen, double t) const {
        Vec2 z = seed(t);
        for (int i = 0; i < gen * k0; ++i) {
            z = step(z);
            if (!z.finite() || std::fabs(z.x) > 1e6 || std::fabs(z.y) > 1e6) return z;
        }
        return z;
    }
};

}  // namespace

ManifoldCurve grow_manifold(const FamilyParams& p, const Saddle& s, double arc_budget,
                            const GrowOptions& opt) {
    ManifoldCurve out;
    double lam = opt.inverse ? 1.0 / s.lambda_s : s.lambda_u;
    if (!std::isfinite(lam) || std::fabs(lam) <= 1.0)
        throw NewtonDiverged("saddle lacks the required eigenvalue");
    Grower g{p, s, opt, lam < 0 ? 2 : 1, 0.0, opt.inverse};
    g.growth = std::pow(std::fabs(lam), g.k0);

    Curve& c = out.curve;
    c.append(g.seed(0.0));
    double arc = 0.0;
    bool done = false;

    for (int gen = 0; gen < 200 && !done; ++gen) {
        // Adaptive subdivision of t in [0,1) for this generation.
        std::function<void(double, const Vec2&, double, const Vec2&, int)> refine =
            [&](double t0, const Vec2& z0, double t1, const Vec2& z1, int depth) {
                if (done) return;
                double seg = dist(z0, z1);
                bool need = seg > opt.max_spacing;
                if (!need && c.size() >= 2 && seg > 1e-12) {
                    Vec2 prev = c.pts[c.pts.size() - 2];
                    double turn = line_angle(c.pts.back() - prev, z1 - c.pts.back());
                    need = turn > opt.max_turn && seg > 1e-10;
                }
                if (need && depth < 48) {
                    double tm = (t0 + t1) / 2;
                    Vec2 zm = g.eval(gen, tm);
                    refine(t0, z0, tm, zm, depth + 1);
                    refine(tm, zm, t1, z1, depth + 1);
                    return;
                }
                arc += seg;
                c.append(z1);
                if (std::fabs(z1.x) > 2.0 || std::fabs(z1.y) > 2.0) out.exits_box = true;
                if (int(c.pts.size()) > opt.max_vertices)
                    throw ResolutionExhausted("manifold vertex cap exceeded");
                if (arc >= arc_budget ||
                    std::fabs(z1.x) > opt.stop_radius || std::fabs(z1.y) > opt.stop_radius)
                    done = true;
            };
        const int coarse = 8;
        Vec2 prev = c.pts.back();
        double t_prev = 0.0;
        for (int i = 1; i <= coarse && !done; ++i) {
            double t = double(i) / coarse;
            Vec2 z = g.eval(gen, t);
            refine(t_prev, prev, t, z, 0);
            t_prev = t;
            prev = c.pts.back();
        }
        out.generations = gen + 1;
    }
    out.arc_grown = arc;
    return out;
}

Curve grow_stable_local(const FamilyParams& p, const Saddle& q, double y_halfwidth) {
    if (p.degenerate()) {
        Curve c;
        c.append({q.location.x, -y_halfwidth});
        c.append(q.location);
        c.append({q.location.x, y_halfwidth});
        return c;
    }
    GrowOptions opt;
    opt.inverse = true;
    opt.max_spacing = std::max(y_halfwidth / 64.0, 1e-6);
    Curve merged;
    for (int sign : {-1, +1}) {
        GrowOptions o = opt;
        o.branch_sign = sign;
        ManifoldCurve half = grow_manifold(p, q, 4.0 * y_halfwidth, o);
        // Keep only the part within the vertical window around Q.
        Curve kept;
        for (const auto& z : half.curve.pts) {
            if (std::fabs(z.y - q.location.y) <= y_halfwidth) kept.append(z);
        }
        if (sign < 0) {
            std::reverse(kept.pts.begin(), kept.pts.end());
            merged = kept;
            merged.append(q.location);
        } else {
            for (const auto& z : kept.pts) merged.append(z);
        }
    }
    // Sort by y so the curve is a graph x(y).
    std::sort(merged.pts.begin(), merged.pts.end(),
              [](const Vec2& a, const Vec2& b) { return a.y < b.y; });
    merged.pts.erase(std::unique(merged.pts.begin(), merged.pts.end(),
                                 [](const Vec2& a, const Vec2& b) {
                                     return std::fabs(a.y - b.y) < 1e-15;
                                 }),
                     merged.pts.end());
    return merged;
}

namespace {

double graph_x_at(const Curve& graph_over_y, double y) {
    const auto& v = graph_over_y.pts;
    if (v.size() < 2) return v.empty() ? 0.0 : v[0].x;
    if (y <= v.front().y) {
        double t = (y - v[0].y) / (v[1].y - v[0].y);
        return v[0].x + t * (v[1].x - v[0].x);
    }
    if (y >= v.back().y) {
        size_t n = v.size();
        double t = (y - v[n - 2].y) / (v[n - 1].y - v[n - 2].y);
        return v[n - 2].x + t * (v[n - 1].x - v[n - 2].x);
    }
    auto it = std::lower_bound(v.begin(), v.end(), y,
                               [](const Vec2& a, double yy) { return a.y < yy; });
    size_t i = size_t(it - v.begin());
    if (i == 0) return v[0].x;
    double t = (y - v[i - 1].y) / (v[i].y - v[i - 1].y);
    return v[i - 1].x + t * (v[i].x - v[i - 1].x);
}

}  // namespace

Curve preimage_vertical_curve(const FamilyParams& p, const Curve& ws_loc, int side,
                              double y_halfwidth, int samples) {
    // Solve 1 - a x^2 + sqrt(b) y = x_W(s sqrt(b) x) for x with the chosen sign.
    Curve out;
    double rb = p.sqrt_b();
    double cs = p.coupling_sign();
    for (int i = 0; i < samples; ++i) {
        double y = -y_halfwidth + 2.0 * y_halfwidth * i / (samples - 1);
        double x = side * std::sqrt(std::max((1.0 - graph_x_at(ws_loc, 0.0) + rb * y) / p.a, 0.0));
        for (int it = 0; it < 12; ++it) {
            double target = graph_x_at(ws_loc, cs * rb * x);
            double rad = (1.0 - target + rb * y) / p.a;
            if (rad <= 0) break;
            double nx = side * std::sqrt(rad);
            if (std::fabs(nx - x) < 1e-15) {
                x = nx;
                break;
            }
            x = nx;
        }
        out.append({x, y});
    }
    return out;
}

Curve steep_parabola_piece(const FamilyParams& p, const Curve& vertical_piece,
                           double y_limit, int samples) {
    // Points q with f(q) on the vertical piece: y(x) = (x_V(s sqrt(b) x) - 1 + a x^2)/sqrt(b).
    Curve out;
    double rb = p.sqrt_b();
    double cs = p.coupling_sign();
    // x-range where |y| <= y_limit.
    double xv0 = graph_x_at(vertical_piece, 0.0);
    double x_hi = std::sqrt(std::max((y_limit * rb + 1.0 - xv0) / p.a, 0.0));
    x_hi = std::min(x_hi, 2.0);
    for (int i = 0; i < samples; ++i) {
        double x = -x_hi + 2.0 * x_hi * i / (samples - 1);
        double xv = graph_x_at(vertical_piece, cs * rb * x);
        double y = (xv - 1.0 + p.a * x * x) / rb;
        if (std::fabs(y) <= y_limit) out.append({x, y});
    }
    return out;
}

RegionR0 build_R0(const FamilyParams& p, const Constants& c, const GrowOptions& opt_in) {
    RegionR0 r;
    r.params = p;
    r.consts = c;
    auto [P, Q] = find_fixed_points(p);
    r.P = P;
    r.Q = Q;

    const Saddle& src = p.orientation == Orientation::preserving ? Q : P;
    GrowOptions opt = opt_in;
    opt.branch_sign = +1;
    // The outer loop (Q -> first fold -> back toward W^s_loc(Q)) has
    // arclength just over 4; anything longer only adds interior folds.
    ManifoldCurve wu = grow_manifold(p, src, 5.5, opt);
    const Curve& w = wu.curve;

    // First fold: global max of x over the swept prefix, located by hysteresis.
    int apex = -1;
    double best = -1e300;
    for (int i = 0; i < w.size(); ++i) {
        if (w[i].x > best) {
            best = w[i].x;
            apex = i;
        }
        if (best > 0.5 && w[i].x < best - 0.5) break;  // well past the turn
    }
    if (apex <= 0) throw BoundaryNotClosed("no fold found on W^u");
    r.apex_index = apex;
    r.apex = w[apex];

    // Return branch: walk until x turns around again (second fold) or until
    // the branch crosses W^s_loc(Q).
    double rb = p.sqrt_b();
    double y_half = std::max(3.0 * rb, 1e-3);
    Curve ws = grow_stable_local(p, Q, y_half);
    int end = w.size() - 1;
    double min_x = 1e300;
    int min_idx = apex;
    for (int i = apex; i < w.size(); ++i) {
        if (w[i].x < min_x) {
            min_x = w[i].x;
            min_idx = i;
        }
        if (w[i].x > min_x + 0.25) break;  // past the second fold
    }
    end = min_idx;
    // Trim at the crossing with W^s_loc(Q) if the branch reaches it.
    int cut = -1;
    Vec2 cut_pt;
    for (int i = apex; i < end; ++i) {
        double xw0 = graph_x_at(ws, w[i].y);
        double xw1 = graph_x_at(ws, w[i + 1].y);
        double d0 = w[i].x - xw0, d1 = w[i + 1].x - xw1;
        if (d0 > 0 && d1 <= 0) {
            double t = d0 / (d0 - d1);
            cut = i;
            cut_pt = w[i] + (w[i + 1] - w[i]) * t;
            break;
        }
    }

    std::vector<Vec2> poly(w.pts.begin(), w.pts.begin() + (cut >= 0 ? cut + 1 : end + 1));
    if (cut >= 0) poly.push_back(cut_pt);
    // Closing chord back to the start (= Q up to seed_eps) stands in for the
    // W^s_loc(Q) side of the boundary.
    Vec2 gap = poly.back() - poly.front();
    if (gap.norm() > 0.6)
        throw BoundaryNotClosed("W^u loop endpoint too far from Q to close");

    r.unstable_boundary.pts = poly;
    r.ws_side.append(poly.back());
    r.ws_side.append(poly.front());

    auto geo = std::make_shared<RegionGeometry>();
    geo->r0 = PolygonRegion(poly);
    geo->x_Q = Q.location.x;
    geo->y_Q = Q.location.y;
    geo->sqrt_b = rb;
    geo->ws_y.reserve(ws.pts.size());
    geo->ws_x.reserve(ws.pts.size());
    for (const auto& z : ws.pts) {
        geo->ws_y.push_back(z.y);
        geo->ws_x.push_back(z.x);
    }
    r.geometry = std::move(geo);
    return r;
}

Curve iterate_curve(const FamilyParams& p, const Curve& seed, int n, double max_spacing,
                    double max_turn, int max_vertices) {
    Curve out;
    if (seed.size() < 2) return out;
    auto eval = [&](const Vec2& z0) {
        Vec2 z = z0;
        for (int k = 0; k < n; ++k) {
            z = apply(p, z);
            if (!z.finite() || std::fabs(z.x) > 1e8) break;
        }
        return z;
    };
    std::function<void(const Vec2&, const Vec2&, const Vec2&, int)> refine =
        [&](const Vec2& s0, const Vec2& s1, const Vec2& img1, int depth) {
            double seg = dist(out.pts.back(), img1);
            bool need = seg > max_spacing;
            if (!need && out.size() >= 2 && seg > 1e-13) {
                Vec2 prev = out.pts[out.pts.size() - 2];
                double turn = line_angle(out.pts.back() - prev, img1 - out.pts.back());
                need = turn > max_turn && seg > 1e-11;
            }
            if (need && depth < 44 && dist(s0, s1) > 1e-15) {
                Vec2 sm = (s0 + s1) * 0.5;
                refine(s0, sm, eval(sm), depth + 1);
                refine(sm, s1, img1, depth + 1);
                return;
            }
            out.append(img1);
            if (out.size() > max_vertices) throw ResolutionExhausted("iterate_curve vertex cap");
        };
    out.append(eval(seed[0]));
    for (int i = 1; i < seed.size(); ++i) refine(seed[i - 1], seed[i], eval(seed[i]), 0);
    return out;
}

bool free_segment_curvature_check(const FamilyParams& p, const Curve& curve, int n) {
    Curve back = curve;
    for (int k = 0; k < n; ++k) {
        for (auto& z : back.pts) z = inverse_apply(p, z);
    }
    double bound = std::pow(5.0, 3.0 * n);
    for (int i = 1; i + 1 < back.size(); ++i) {
        if (back.curvature(i) > bound) return false;
    }
    return true;
}

}  // namespace henon
