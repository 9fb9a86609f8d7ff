#include "henon/escape.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

namespace henon {

SurvivalCurve grid_escape(const FamilyParams& p, const RegionR0& r0, int nx, int ny, int T) {
    SurvivalCurve out;
    const BBox& box = r0.geometry->r0.bbox();
    std::vector<Vec2> pts;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            Vec2 z{box.xmin + (box.xmax - box.xmin) * (i + 0.5) / nx,
                   box.ymin + (box.ymax - box.ymin) * (j + 0.5) / ny};
            if (r0.contains(z)) pts.push_back(z);
        }
    }
    out.total_points = int(pts.size());
    // Escape = first exit from R0. After a few steps every orbit rides the
    // W^u closure below the polygon resolution, where raw membership cannot
    // be decided; exits are therefore detected by their consequence under
    // the K+ claim, |x| > 2 (from where divergence is monotone and certain).
    std::vector<int> hist(size_t(T) + 2, 0);  // escape-time histogram
    for (Vec2 z : pts) {
        int esc = T + 1;
        for (int t = 1; t <= T; ++t) {
            z = apply(p, z);
            if (std::fabs(z.x) > 2.0) {
                esc = t;
                break;
            }
        }
        ++hist[size_t(std::min(esc, T + 1))];
    }
    out.fraction.assign(size_t(T) + 1, 0.0);
    double surviving = double(pts.size());
    out.fraction[0] = 1.0;
    for (int t = 1; t <= T; ++t) {
        surviving -= hist[size_t(t)];
        out.fraction[size_t(t)] = pts.empty() ? 0.0 : surviving / double(pts.size());
    }
    return out;
}

namespace {

// Orbit image of the omega_0 point at arclength u after t steps.
Vec2 image_at(const FamilyParams& p, const Curve& omega0, double u, int t) {
    Vec2 z = omega0.at_arclength(u);
    for (int i = 0; i < t; ++i) z = apply(p, z);
    return z;
}

}  // namespace

StoppingPartition segment_stopping_times(const FamilyParams& p, const Constants& c,
                                         const RegionR0& r0, const Curve& omega0,
                                         const BindingAnchor& anchor, int depth) {
    (void)r0;
    // The partition tree branches like the fold count of the iterated image,
    // so it is sampled pointwise: each tracer follows its own partition
    // element (the interval between the cut boundaries around it), which
    // yields |{S > n}| as the tracer survival function.
    StoppingPartition out;
    double L = omega0.length();
    out.tail_mass.assign(size_t(depth) + 1, 0.0);
    double delta = c.delta;
    const int tracers = 1500;

    // Nearest image-crossing of x = +-delta on one side of u at time t.
    auto nearest_cut = [&](double u_from, double u_to, int t) -> double {
        // Scan from u_from toward u_to; first bracketing pair wins.
        const int ns = 24;
        double prev_u = u_from;
        Vec2 pz = image_at(p, omega0, prev_u, t);
        for (int i = 1; i <= ns; ++i) {
            double ui = u_from + (u_to - u_from) * i / ns;
            Vec2 zi = image_at(p, omega0, ui, t);
            for (double thr : {-delta, delta}) {
                double d0 = pz.x - thr, d1 = zi.x - thr;
                if ((d0 < 0) != (d1 < 0)) {
                    double lo = prev_u, hi = ui;
                    for (int it = 0; it < 36; ++it) {
                        double mid = (lo + hi) / 2;
                        double dm = image_at(p, omega0, mid, t).x - thr;
                        if ((dm < 0) == (d0 < 0)) lo = mid;
                        else hi = mid;
                    }
                    return (lo + hi) / 2;
                }
            }
            prev_u = ui;
            pz = zi;
        }
        return u_to;
    };

    std::vector<int> stop_time(size_t(tracers), -1);
    for (int tr = 0; tr < tracers; ++tr) {
        double u = L * (tr + 0.5) / tracers;
        double lo = 0.0, hi = L;
        int t = 0, release = 0;
        const int es = 7;  // element image samples
        Vec2 s[es];
        auto refresh = [&] {
            for (int i = 0; i < es; ++i)
                s[i] = image_at(p, omega0, lo + (hi - lo) * i / (es - 1), t);
        };
        refresh();
        while (t <= depth) {
            double xmin = 1e300, xmax = -1e300;
            bool diverged = false;
            for (int i = 0; i < es; ++i) {
                if (std::fabs(s[i].x) > 2.5) {
                    diverged = true;
                    break;
                }
                xmin = std::min(xmin, s[i].x);
                xmax = std::max(xmax, s[i].x);
            }
            if (diverged) {
                stop_time[size_t(tr)] = t;
                break;
            }
            bool touches = xmin < delta && xmax > -delta;
            bool free_now = t >= release;
            if (free_now && !touches) {
                bool across = (xmin <= delta + 1e-12 && xmax >= 2 * delta - 1e-12) ||
                              (xmax >= -delta - 1e-12 && xmin <= -2 * delta + 1e-12);
                if (across) {
                    stop_time[size_t(tr)] = t;
                    break;
                }
            }
            if (free_now && touches) {
                // Cutting time: shrink the element to the cut boundaries
                // around the tracer, then bind or continue.
                double new_lo = lo, new_hi = hi;
                Vec2 zu = image_at(p, omega0, u, t);
                if (lo < u) new_lo = nearest_cut(u, lo, t);
                if (hi > u) new_hi = nearest_cut(u, hi, t);
                lo = std::min(new_lo, u);
                hi = std::max(new_hi, u);
                if (std::fabs(zu.x) < delta) {
                    int k = -1;
                    try {
                        k = annulus_index(anchor, apply(p, zu), c);
                    } catch (const CriticalPosition&) {
                        k = -2;
                    }
                    int period = k >= 0 ? std::max(1, anchor.chi(k)) : 1;
                    release = t + period;
                } else {
                    release = t + 1;
                }
                refresh();
                continue;
            }
            for (int i = 0; i < es; ++i) s[i] = apply(p, s[i]);
            ++t;
        }
        if (stop_time[size_t(tr)] >= 0) {
            out.elements.push_back({lo, hi, stop_time[size_t(tr)]});
        } else {
            out.elements.push_back({lo, hi, -1});
            out.unresolved_mass += L / tracers;
        }
    }
    // Tail masses from the tracer survival counts.
    for (int n = 0; n <= depth; ++n) {
        int alive = 0;
        for (int tr = 0; tr < tracers; ++tr)
            if (stop_time[size_t(tr)] < 0 || stop_time[size_t(tr)] > n) ++alive;
        out.tail_mass[size_t(n)] = L * double(alive) / tracers;
    }
    // Tail fit over the statistically resolved range: at least 20 tracers
    // alive and below the initial plateau.
    std::vector<double> xs_fit, ys_fit;
    double floor_mass = std::max(L * 20.0 / tracers, 10.0 * out.unresolved_mass);
    for (int n = 0; n <= depth; ++n) {
        double m = out.tail_mass[size_t(n)];
        if (m > floor_mass && m < L * (1 - 1e-12)) {
            xs_fit.push_back(double(n));
            ys_fit.push_back(std::log(m));
        }
    }
    out.tail_fit = linear_fit(xs_fit, ys_fit);

    // Distortion along stopped elements (Lemma izo flavour).
    for (const auto& el : out.elements) {
        if (el.stop_time <= 0 || el.stop_time > depth) continue;
        if (out.distortion_checks >= 40) break;
        Vec2 xi = omega0.at_arclength(el.u_lo);
        Vec2 eta = omega0.at_arclength(el.u_hi);
        Vec2 txi = omega0.tangent(omega0.index_at_arclength(el.u_lo));
        Vec2 teta = omega0.tangent(omega0.index_at_arclength(el.u_hi));
        double lg1 = 0, lg2 = 0;
        Vec2 v1 = txi, v2 = teta, z1 = xi, z2 = eta;
        for (int i = 0; i < el.stop_time; ++i) {
            Vec2 i1 = jacobian(p, z1) * v1, i2 = jacobian(p, z2) * v2;
            lg1 += std::log(i1.norm());
            lg2 += std::log(i2.norm());
            v1 = normalized(i1);
            v2 = normalized(i2);
            z1 = apply(p, z1);
            z2 = apply(p, z2);
        }
        out.max_log_distortion = std::max(out.max_log_distortion, std::fabs(lg1 - lg2));
        ++out.distortion_checks;
    }
    return out;
}

ProportionEstimate leaf_intersection_proportion(const FamilyParams& p, const RegionR0& r0,
                                                const Curve& gamma, int T, int samples) {
    ProportionEstimate est;
    est.samples = samples;
    est.T = T;
    (void)r0;
    double L = gamma.length();
    int inside = 0;
    for (int i = 0; i < samples; ++i) {
        Vec2 z = gamma.at_arclength(L * (i + 0.5) / samples);
        bool in = true;
        for (int t = 0; t < T; ++t) {
            if (std::fabs(z.x) > 2.0) {  // divergence-certain exit from R0
                in = false;
                break;
            }
            z = apply(p, z);
        }
        if (in) ++inside;
    }
    est.survived_fraction = double(inside) / samples;
    return est;
}

bool BRegion::contains(const Vec2& z) const {
    if (z.x < x_lo || z.x > x_hi) return false;
    auto graph_y = [&](const Curve& g) {
        const auto& v = g.pts;
        auto it = std::lower_bound(v.begin(), v.end(), z.x,
                                   [](const Vec2& q, double xx) { return q.x < xx; });
        size_t i = std::clamp<size_t>(size_t(it - v.begin()), 1, v.size() - 1);
        double t = (z.x - v[i - 1].x) / (v[i].x - v[i - 1].x);
        return v[i - 1].y + t * (v[i].y - v[i - 1].y);
    };
    double ylo = graph_y(lower), yhi = graph_y(upper);
    if (ylo > yhi) std::swap(ylo, yhi);
    return z.y >= ylo && z.y <= yhi;
}

std::vector<BRegion> build_A_regions(const FamilyParams& p, const Constants& c,
                                     const CriticalRegionTower& tower) {
    (void)p;
    std::vector<BRegion> out;
    for (const auto& lvl : tower.levels) {
        if (lvl.level == 0) continue;  // A-regions live at k >= 1
        BRegion r;
        r.level = lvl.level;
        double len = std::min(std::pow(c.delta, lvl.level / 10.0),
                              std::min(lvl.lower.length(), lvl.upper.length()));
        auto window = [&](const Curve& s, const Vec2& ctr) {
            Curve t;
            for (const auto& q : s.pts)
                if (std::fabs(q.x - ctr.x) <= len / 2) t.append(q);
            std::sort(t.pts.begin(), t.pts.end(),
                      [](const Vec2& a2, const Vec2& b2) { return a2.x < b2.x; });
            return t;
        };
        r.lower = window(lvl.lower, lvl.crit_lower);
        r.upper = window(lvl.upper, lvl.crit_upper);
        if (r.lower.size() < 2 || r.upper.size() < 2) continue;
        r.x_lo = std::max(r.lower.pts.front().x, r.upper.pts.front().x);
        r.x_hi = std::min(r.lower.pts.back().x, r.upper.pts.back().x);
        out.push_back(std::move(r));
    }
    return out;
}

CloseReturnLog close_returns(const FamilyParams& p, const std::vector<BRegion>& regions,
                             const Vec2& seed, int T, int k0) {
    CloseReturnLog log;
    (void)k0;
    int k_max = 0;
    for (const auto& r : regions) k_max = std::max(k_max, r.level);
    Vec2 z = seed;
    int since = 0;  // time since the last close return (relative clock)
    for (int n = 1; n <= T; ++n) {
        z = apply(p, z);
        if (std::fabs(z.x) > 3.0) break;
        ++since;
        int level_needed = since;
        if (level_needed > k_max) {
            if (log.truncated_at < 0) log.truncated_at = n;
            continue;  // regions unavailable beyond the built tower
        }
        for (const auto& r : regions) {
            if (r.level == level_needed && r.contains(z)) {
                log.nu.push_back(since);
                since = 0;
                break;
            }
        }
    }
    return log;
}

OmegaRatios omega_ratio(const FamilyParams& p, const Constants& c,
                        const std::vector<BRegion>& regions, int k0, int sample_size,
                        int levels, uint64_t seed) {
    (void)c;
    OmegaRatios out;
    const BRegion* base = nullptr;
    for (const auto& r : regions)
        if (r.level == k0) base = &r;
    if (!base) throw RegionUnavailable("A^(k0) not built");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(base->x_lo, base->x_hi), u01(0, 1);

    std::vector<Vec2> pool;
    for (int i = 0; i < sample_size; ++i) {
        double x = ux(rng);
        // Vertical extent at x.
        Vec2 probe{x, 0};
        double ylo = 0, yhi = 0;
        {
            auto gy = [&](const Curve& g) {
                const auto& v = g.pts;
                auto it = std::lower_bound(v.begin(), v.end(), x,
                                           [](const Vec2& q, double xx) { return q.x < xx; });
                size_t j = std::clamp<size_t>(size_t(it - v.begin()), 1, v.size() - 1);
                double t = (x - v[j - 1].x) / (v[j].x - v[j - 1].x);
                return v[j - 1].y + t * (v[j].y - v[j - 1].y);
            };
            ylo = gy(base->lower);
            yhi = gy(base->upper);
            if (ylo > yhi) std::swap(ylo, yhi);
        }
        probe.y = ylo + (yhi - ylo) * u01(rng);
        pool.push_back(probe);
    }
    int prev_count = int(pool.size());
    for (int k = 1; k <= levels; ++k) {
        std::vector<Vec2> survivors;
        for (const auto& z : pool) {
            CloseReturnLog log = close_returns(p, regions, z, 400, k0);
            if (int(log.nu.size()) >= k) survivors.push_back(z);
        }
        int hits = int(survivors.size());
        out.hits.push_back(hits);
        if (hits >= 30) {
            out.ratio.push_back(double(hits) / prev_count);
            out.upper_95.push_back(double(hits) / prev_count * 1.5);
            pool = std::move(survivors);  // importance re-seeding
            prev_count = hits;
        } else {
            out.starved = true;
            // Rule-of-three upper bound from the observed zero/low counts.
            double ub = hits > 0 ? double(hits + 3) / prev_count : 3.0 / prev_count;
            out.ratio.push_back(hits > 0 ? double(hits) / prev_count : 0.0);
            out.upper_95.push_back(ub);
            break;
        }
    }
    return out;
}

ProjectivizationCheck angle_propagation_check(const FamilyParams& p, int samples,
                                              uint64_t seed) {
    ProjectivizationCheck out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-2, 2), uth(0, M_PI);
    auto fstar = [&](const Vec2& xi, const Vec2& v) { return normalized(jacobian(p, xi) * v); };
    const double h = 1e-7;
    for (int i = 0; i < samples; ++i) {
        Vec2 xi{ux(rng), ux(rng)};
        double th = uth(rng);
        Vec2 v{std::cos(th), std::sin(th)};
        Mat2 J = jacobian(p, xi);
        double denom = (J * v).norm();
        if (denom < 1e-6) continue;
        // (pro1): |d_v f_*| <= 2 |det Df| / ||Df v||^2.
        Vec2 vperp{-v.y, v.x};
        Vec2 f0 = fstar(xi, v);
        Vec2 f1 = fstar(xi, normalized(v + vperp * h));
        double dv = line_angle(f0, f1) / h;
        double bound1 = 2 * std::fabs(J.det()) / (denom * denom);
        if (bound1 > 0) out.max_dv_ratio = std::max(out.max_dv_ratio, dv / bound1);
        // (pro2): |d_xi f_*| <= ||D^2 f|| ||v|| / ||Df v||; for the built-in
        // coupling ||D^2 f|| = 2a.
        double d2f = 2 * p.a;
        for (Vec2 dxi : {Vec2{h, 0}, Vec2{0, h}}) {
            Vec2 g1 = fstar(xi + dxi, v);
            double dxi_rate = line_angle(f0, g1) / h;
            double bound2 = d2f / denom;
            out.max_dxi_ratio = std::max(out.max_dxi_ratio, dxi_rate / bound2);
        }
        ++out.samples;
    }
    return out;
}

TransitivityWitness transitivity_witness(const FamilyParams& p, const Constants& c,
                                         double angle_floor) {
    TransitivityWitness out;
    if (p.degenerate()) {
        out.applicable = false;
        return out;
    }
    auto [P, Q] = find_fixed_points(p);
    GrowOptions opt;
    opt.max_spacing = 5e-4;
    ManifoldCurve wu = grow_manifold(p, Q, 9.0, opt);
    double rb = p.sqrt_b();
    Curve ws = grow_stable_local(p, Q, std::max(5.0 * rb, 1.5e-3));
    Curve vp_r = preimage_vertical_curve(p, ws, +1, std::max(4.0 * rb, 1e-3));
    Curve vp_l = preimage_vertical_curve(p, ws, -1, std::max(4.0 * rb, 1e-3));
    Curve parab = steep_parabola_piece(p, vp_r, std::max(5.0 * rb, 1.5e-3));

    double min_transverse = 1e300;
    for (const Curve* piece : {&ws, &vp_r, &vp_l, &parab}) {
        auto hits = curve_intersections(wu.curve, *piece);
        for (const auto& hit : hits) {
            if (dist(hit.point, Q.location) < 1e-5) continue;  // Q itself
            if (hit.angle >= angle_floor) {
                ++out.transverse_count;
                min_transverse = std::min(min_transverse, hit.angle);
                if (out.samples.size() < 8) out.samples.push_back(hit.point);
            } else {
                ++out.tangential_count;
            }
        }
    }
    (void)c;
    out.min_angle = out.transverse_count > 0 ? min_transverse : 0.0;
    return out;
}

}  // namespace henon
