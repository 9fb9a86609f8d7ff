#include "henon/critical.hpp"

#include <algorithm>
#include <cmath>

namespace henon {

namespace {

Vec2 curve_tangent_at_arclength(const Curve& c, double s) {
    double h = std::max(c.length() / (4.0 * c.size()), 1e-9);
    Vec2 a = c.at_arclength(std::max(0.0, s - h));
    Vec2 b = c.at_arclength(std::min(c.length(), s + h));
    return normalized(b - a);
}

// e_n(f gamma(s)) as a sign-normalized unit vector (second component >= 0).
Vec2 e_n_at(const FamilyParams& p, const Vec2& fz, int n) {
    Mat2 prod{1, 0, 0, 1};
    Vec2 z = fz;
    for (int k = 0; k < n; ++k) {
        prod = jacobian(p, z) * prod;
        double nn = prod.norm();
        if (!(nn > 0)) throw FieldDegenerate();
        prod = {prod.a / nn, prod.b / nn, prod.c / nn, prod.d / nn};
        z = apply(p, z);
    }
    return most_contracting(prod);
}

// Tangency defect g(s) = e_n(f gamma(s)) x Df t(gamma(s)). The e_n factor is
// sign-normalized; Df t keeps the orientation induced by the curve so the
// defect changes sign across the fold.
double tangency_defect(const FamilyParams& p, const Curve& curve, double s, int n) {
    Vec2 z = curve.at_arclength(s);
    Vec2 t = curve_tangent_at_arclength(curve, s);
    Vec2 dft = normalized(jacobian(p, z) * t);
    Vec2 e = e_n_at(p, apply(p, z), n);
    return cross(e, dft);
}

}  // namespace

Curve primary_segment(const RegionR0& r0, double width) {
    Curve out;
    const Curve& w = r0.unstable_boundary;
    for (int i = 0; i < r0.apex_index; ++i) {
        if (std::fabs(w[i].x) <= width) out.append(w[i]);
    }
    return out;
}

CriticalApprox find_critical_approx(const FamilyParams& p, const Constants& c,
                                    const Curve& curve, int n) {
    if (curve.size() < 3) throw NoSignChange("curve too short");
    CriticalApprox out;
    out.order = n;
    out.host = curve;

    double L = curve.length();
    const int scan = std::max(64, curve.size());
    double s_root = -1;

    if (p.degenerate()) {
        // 1-D reduction: g(s) ~ -2 a x(s); root where the curve crosses x = 0.
        double prev_s = 0;
        double prev_v = curve.at_arclength(0).x;
        for (int i = 1; i <= scan; ++i) {
            double s = L * i / scan;
            double v = curve.at_arclength(s).x;
            if ((prev_v < 0) != (v < 0)) {
                double lo = prev_s, hi = s;
                for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
                    double mid = (lo + hi) / 2;
                    if ((curve.at_arclength(mid).x < 0) == (prev_v < 0)) lo = mid;
                    else hi = mid;
                }
                s_root = (lo + hi) / 2;
                break;
            }
            prev_s = s;
            prev_v = v;
        }
        if (s_root < 0) throw NoSignChange();
        out.point = curve.at_arclength(s_root);
        out.wi = wi_sequence(p, out.point, 20 * n);
        out.tangency_residual = std::fabs(out.point.x);
        out.expanding_ok = true;
        out.good = check_good_behavior(p, c, out.point, n);
        return out;
    }

    double prev_s = 0;
    double prev_v = tangency_defect(p, curve, 0, n);
    for (int i = 1; i <= scan; ++i) {
        double s = L * i / scan;
        double v = tangency_defect(p, curve, s, n);
        if ((prev_v < 0) != (v < 0)) {
            double lo = prev_s, hi = s;
            bool lo_neg = prev_v < 0;
            for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
                double mid = (lo + hi) / 2;
                if ((tangency_defect(p, curve, mid, n) < 0) == lo_neg) lo = mid;
                else hi = mid;
            }
            s_root = (lo + hi) / 2;
            break;
        }
        prev_s = s;
        prev_v = v;
    }
    if (s_root < 0) throw NoSignChange();

    out.point = curve.at_arclength(s_root);
    out.tangency_residual = std::fabs(tangency_defect(p, curve, s_root, n));
    out.wi = wi_sequence(p, out.point, 20 * n + 1);
    // ||Df^i(f zeta)|| >= 1/10 for i <= n.
    CocycleHistory h = df_cocycle(p, apply(p, out.point), n);
    out.expanding_ok = true;
    for (int i = 1; i <= n; ++i)
        if (h.log_norms[size_t(i - 1)] < std::log(0.1)) out.expanding_ok = false;
    out.leaf = limit_leaf(p, c, apply(p, out.point)).leaf;
    out.good = check_good_behavior(p, c, out.point, n);
    return out;
}

CriticalApprox refine_critical_approx(const FamilyParams& p, const Constants& c,
                                      const Curve& gamma2, const CriticalApprox& existing,
                                      double eps) {
    int n = existing.order;
    double eps_n = std::pow(eps, n);
    // gamma2(0): the point on gamma2 sharing the x-coordinate of gamma1(0).
    double best_s = 0, best_d = 1e300;
    double L = gamma2.length();
    for (int i = 0; i <= 512; ++i) {
        double s = L * i / 512.0;
        double d = std::fabs(gamma2.at_arclength(s).x - existing.point.x);
        if (d < best_d) {
            best_d = d;
            best_s = s;
        }
    }
    Vec2 z2 = gamma2.at_arclength(best_s);
    if (dist(z2, existing.point) > eps_n)
        throw HypothesisViolated("|gamma1(0) - gamma2(0)| exceeds eps^n");
    Vec2 t1 = curve_tangent_at_arclength(existing.host, [&] {
        double acc = 0, best = 0, bd = 1e300;
        for (int i = 0; i + 1 < existing.host.size(); ++i) {
            acc += dist(existing.host[i], existing.host[i + 1]);
            double d = dist(existing.host[i + 1], existing.point);
            if (d < bd) {
                bd = d;
                best = acc;
            }
        }
        return best;
    }());
    Vec2 t2 = curve_tangent_at_arclength(gamma2, best_s);
    if (line_angle(t1, t2) > eps_n)
        throw HypothesisViolated("tangent angle exceeds eps^n");

    // Re-solve within the eps^{n/2} window around gamma2(0).
    double win = std::pow(eps, n / 2.0);
    double lo = std::max(0.0, best_s - win), hi = std::min(L, best_s + win);
    Curve piece;
    const int m = 257;
    for (int i = 0; i < m; ++i) piece.append(gamma2.at_arclength(lo + (hi - lo) * i / (m - 1)));
    return find_critical_approx(p, c, piece, n);
}

CriticalPointResult find_critical_point(const FamilyParams& p, const Constants& c,
                                        const Curve& free_segment, int max_order) {
    CriticalPointResult out;
    out.host = free_segment;
    if (p.degenerate()) {
        CriticalApprox ca = find_critical_approx(p, c, free_segment, c.M);
        out.point = ca.point;
        out.orders = {c.M};
        out.wi = std::move(ca.wi);
        out.tangency_residual = std::fabs(out.point.x);
        return out;
    }
    Vec2 prev{};
    bool have_prev = false;
    for (int n = c.M; n <= max_order; ++n) {
        CriticalApprox ca = find_critical_approx(p, c, free_segment, n);
        out.orders.push_back(n);
        if (have_prev) {
            double gap = dist(prev, ca.point);
            out.gaps.push_back(gap);
            double stop = std::max(1e-13, std::pow(p.b, n / 4.0));
            if (gap < stop) {
                out.point = ca.point;
                out.wi = std::move(ca.wi);
                out.leaf = std::move(ca.leaf);
                break;
            }
        }
        prev = ca.point;
        have_prev = true;
        out.point = ca.point;
        if (n == max_order) {
            out.wi = std::move(ca.wi);
            out.leaf = std::move(ca.leaf);
        }
    }
    if (out.wi.size() == 0) out.wi = wi_sequence(p, out.point, 20 * max_order);
    if (out.leaf.graph.empty()) out.leaf = limit_leaf(p, c, apply(p, out.point)).leaf;

    // Tangency certificate: the limit leaf through f zeta against the local
    // f-image of the host segment (quadratic tangency expected).
    double s_at = 0, acc = 0, bd = 1e300;
    for (int i = 0; i + 1 < free_segment.size(); ++i) {
        acc += dist(free_segment[i], free_segment[i + 1]);
        double d = dist(free_segment[i + 1], out.point);
        if (d < bd) {
            bd = d;
            s_at = acc;
        }
    }
    double win = std::min(0.02, free_segment.length() / 4);
    Curve local;
    for (int i = 0; i <= 256; ++i) {
        double s = std::clamp(s_at - win + 2 * win * i / 256.0, 0.0, free_segment.length());
        local.append(free_segment.at_arclength(s));
    }
    Curve image = iterate_curve(p, local, 1, 1e-4, 0.02);
    auto cls = leaf_curve_intersection(out.leaf, image, 1e-8);
    out.tangency_residual = cls.residual;
    if (cls.kind == IntersectionKind::empty && cls.residual > 1e-3)
        throw NoTangency("segment does not cross the fold region");
    return out;
}

GoodBehavior check_good_behavior(const FamilyParams& p, const Constants& c, const Vec2& zeta,
                                 int n, const std::vector<BindingAnchor>& anchors) {
    GoodBehavior out;
    int horizon = 20 * n;
    DerivativeHistory wi = wi_sequence(p, zeta, horizon + 1);
    out.chi.lambda0 = c.lambda0;
    out.chi.delta = c.delta;

    // Self-binding data when no anchors are supplied: the orbit's own leaf.
    std::vector<BindingAnchor> local;
    const std::vector<BindingAnchor>* use = &anchors;
    if (anchors.empty() && !p.degenerate()) {
        try {
            BindingAnchor self;
            self.point = zeta;
            self.order = n;
            self.wi = wi;
            self.leaf = limit_leaf(p, c, apply(p, zeta)).leaf;
            local.push_back(std::move(self));
            use = &local;
        } catch (const NumericError&) {
            // leave anchors empty: all returns stay untracked
        }
    }

    // Incremental walk: chi grows as free returns accumulate.
    Itinerary itin;
    itin.horizon = horizon;
    itin.bound_mask.assign(size_t(horizon), 0);
    double beta = c.beta(p.b);
    Vec2 w = zeta;
    int bound_until = 0;
    for (int m = 1; m <= horizon; ++m) {
        w = apply(p, w);
        if (std::fabs(w.x) > kOverflowGuard) {
            itin.horizon = m - 1;
            itin.bound_mask.resize(size_t(m - 1));
            break;
        }
        if (m <= bound_until) {
            itin.bound_mask[size_t(m - 1)] = 1;
            continue;
        }
        if (std::fabs(w.x) >= c.delta || use->empty()) continue;
        Vec2 fw = apply(p, w);
        int best = -1;
        double best_off = 1e300;
        for (size_t ai = 0; ai < use->size(); ++ai) {
            double off = std::fabs(fw.x - (*use)[ai].leaf.x_at(fw.y));
            if (off < best_off) {
                best_off = off;
                best = int(ai);
            }
        }
        const BindingAnchor& anchor = (*use)[size_t(best)];
        BindingRecord rec;
        rec.return_time = m;
        rec.anchor_id = best;
        rec.distance = dist(w, anchor.point);
        try {
            Vec2 fz2 = apply(p, w);
            int k = annulus_index(anchor, fz2, c);
            if (k < 0) continue;
            rec.annulus = k;
            rec.bound_period = out.chi(k);  // chi built so far
            rec.fold_period = fold_period(anchor, rec.distance, rec.bound_period, beta);
            rec.position = PositionClass::admissible;
        } catch (const CriticalPosition&) {
            rec.position = PositionClass::critical;
            rec.bound_period = 0;
        }
        itin.records.push_back(rec);
        if (rec.bound_period > 0) out.chi.add(m, rec.bound_period);
        bound_until = m + rec.bound_period;
        for (int i = m + 1; i <= std::min(bound_until, itin.horizon); ++i)
            itin.bound_mask[size_t(i - 1)] = 1;
    }
    flag_deep_returns(itin);

    // (G1): ||w_i|| >= e^{lambda (i-1)}.
    out.g1 = true;
    out.g1_margin = 1e300;
    double lambda = c.lambda();
    for (int i = 1; i <= std::min(horizon, itin.horizon == 0 ? horizon : horizon); ++i) {
        if (i > wi.size()) break;
        double margin = wi.log_norm(i) - lambda * (i - 1);
        out.g1_margin = std::min(out.g1_margin, margin);
        if (margin < 0) out.g1 = false;
    }
    // (G2): ||w_j|| >= e^{-2 alpha i} ||w_i|| for i < j.
    out.g2 = true;
    double running = -1e300;  // max over i<j of log||w_i|| - 2 alpha i
    for (int j = 2; j <= std::min(horizon, wi.size()); ++j) {
        running = std::max(running, wi.log_norm(j - 1) - 2 * c.alpha * (j - 1));
        if (wi.log_norm(j) < running) out.g2 = false;
    }
    // (G3): (1 - sqrt alpha) j <= chi(j) <= j and ||w_chi(j)|| >= delta ||w_i||.
    out.g3 = true;
    out.g3_ratio = 1.0;
    double sqa = std::sqrt(c.alpha);
    double log_delta = std::log(c.delta);
    std::vector<double> run_max(size_t(wi.size()) + 1, -1e300);
    for (int i = 1; i <= wi.size(); ++i)
        run_max[size_t(i)] = std::max(run_max[size_t(i - 1)], wi.log_norm(i));
    for (int j = c.M; j <= std::min(horizon, wi.size()); ++j) {
        int h = out.chi(j);
        out.g3_ratio = std::min(out.g3_ratio, double(h) / j);
        if (h < (1 - sqa) * j || h > j) out.g3 = false;
        if (h >= 2 && wi.log_norm(h) < log_delta + run_max[size_t(h - 1)]) out.g3 = false;
    }
    out.itinerary = std::move(itin);
    return out;
}

BindingAnchor to_anchor(const CriticalApprox& ca) {
    BindingAnchor a;
    a.point = ca.point;
    a.order = ca.order;
    a.wi = ca.wi;
    a.leaf = ca.leaf;
    a.chi = ca.good.chi;
    return a;
}

BindingAnchor to_anchor(const CriticalPointResult& cp) {
    BindingAnchor a;
    a.point = cp.point;
    a.order = cp.orders.empty() ? 1 : cp.orders.back();
    a.wi = cp.wi;
    a.leaf = cp.leaf;
    return a;
}

namespace {

// Sub-polylines of the f^k image of the R0 unstable boundary crossing the
// x-window; adaptive in the seed parameter.
std::vector<Curve> boundary_stubs(const FamilyParams& p, const RegionR0& r0, int k,
                                  double x_lo, double x_hi) {
    const Curve& seed = r0.unstable_boundary;
    double arc = seed.length();
    // Sampling pitch fine enough to catch every window crossing of f^k.
    double stretch = std::pow(4.2, k);
    int nsamp = int(std::min(400000.0, std::max(4000.0, arc * stretch / ((x_hi - x_lo) / 8))));
    auto eval = [&](double s) {
        Vec2 z = seed.at_arclength(s);
        for (int i = 0; i < k; ++i) z = apply(p, z);
        return z;
    };
    std::vector<Curve> stubs;
    Curve cur;
    double margin = (x_hi - x_lo) * 0.02;
    for (int i = 0; i <= nsamp; ++i) {
        double s = arc * i / nsamp;
        Vec2 z = eval(s);
        bool in = z.x >= x_lo - margin && z.x <= x_hi + margin && std::fabs(z.y) < 0.1;
        if (in) {
            // local refinement: subdivide against the previous sample
            if (!cur.empty()) {
                double s_prev = arc * (i - 1) / nsamp;
                int extra = 8;
                for (int j = 1; j < extra; ++j) {
                    Vec2 zm = eval(s_prev + (s - s_prev) * j / extra);
                    if (zm.x >= x_lo - margin && zm.x <= x_hi + margin) cur.append(zm);
                }
            }
            cur.append(z);
        } else if (!cur.empty()) {
            if (cur.size() >= 5) stubs.push_back(cur);
            cur = Curve{};
        }
    }
    if (cur.size() >= 5) stubs.push_back(cur);
    return stubs;
}

double stub_mid_y(const Curve& c) {
    double lo = 1e300, hi = -1e300;
    for (const auto& q : c.pts) {
        lo = std::min(lo, q.y);
        hi = std::max(hi, q.y);
    }
    return (lo + hi) / 2;
}

double hausdorff_between(const Curve& a, const Curve& b) {
    auto one_sided = [](const Curve& u, const Curve& v) {
        double worst = 0;
        for (int i = 0; i < u.size(); i += std::max(1, u.size() / 64))
            worst = std::max(worst, v.min_distance_to(u[i]));
        return worst;
    };
    return std::max(one_sided(a, b), one_sided(b, a));
}

}  // namespace

CriticalRegionTower build_critical_regions(const FamilyParams& p, const Constants& c,
                                           const RegionR0& r0, int k_max) {
    CriticalRegionTower tower;
    tower.k_requested = k_max;
    double delta = c.delta;
    double kappa0 = c.kappa0();

    // Level 0: the strip |x| <= delta with the two unstable-boundary pieces.
    CriticalRegion lvl0;
    lvl0.level = 0;
    const Curve& wb = r0.unstable_boundary;
    Curve lower, upper;
    for (int i = 0; i < r0.apex_index; ++i)
        if (std::fabs(wb[i].x) <= delta) lower.append(wb[i]);
    for (int i = r0.apex_index; i < wb.size(); ++i)
        if (std::fabs(wb[i].x) <= delta) upper.append(wb[i]);
    if (lower.size() < 5 || upper.size() < 5) {
        tower.cap_reason = "level-0 boundary pieces too short";
        return tower;
    }
    if (stub_mid_y(lower) > stub_mid_y(upper)) std::swap(lower, upper);
    lvl0.lower = lower;
    lvl0.upper = upper;
    lvl0.target_length = 2 * delta;
    lvl0.horizontal_length = std::min(lower.length(), upper.length());
    lvl0.lower_trim = lvl0.lower;
    lvl0.upper_trim = lvl0.upper;
    lvl0.hausdorff_gap = hausdorff_between(lower, upper);
    CriticalPointResult cl = find_critical_point(p, c, lower);
    CriticalPointResult cu = find_critical_point(p, c, upper);
    lvl0.crit_lower = cl.point;
    lvl0.crit_upper = cu.point;
    lvl0.midpoint_offset_lower = dist(cl.point, lower.at_arclength(lower.length() / 2));
    lvl0.midpoint_offset_upper = dist(cu.point, upper.at_arclength(upper.length() / 2));
    lvl0.stub_count = 2;
    tower.levels.push_back(lvl0);
    tower.k_built = 0;

    Vec2 anchor_pt = cl.point;  // primary chain follows this critical point
    double x_lo = -delta, x_hi = delta;
    double y_center = stub_mid_y(lower);

    for (int k = 1; k <= k_max; ++k) {
        double target = std::min(2 * delta, std::pow(kappa0, k));
        double res_floor = std::max(1e5 * std::fabs(anchor_pt.x) * 2.2e-16, 1e-12);
        if (target < res_floor) {
            tower.cap_reason = "ComponentResolutionLost: kappa0^k below resolution at k = " +
                               std::to_string(k);
            break;
        }
        if (std::pow(p.b, k / 2.0) < 1e-12) {
            tower.cap_reason = "ComponentResolutionLost: b^{k/2} below tolerance at k = " +
                               std::to_string(k);
            break;
        }
        std::vector<Curve> stubs = boundary_stubs(p, r0, k, x_lo, x_hi);
        // Keep stubs inside the previous component's vertical extent.
        const CriticalRegion& prevR = tower.levels.back();
        double ylo = std::min(stub_mid_y(prevR.lower), stub_mid_y(prevR.upper)) - 1e-3;
        double yhi = std::max(stub_mid_y(prevR.lower), stub_mid_y(prevR.upper)) + 1e-3;
        std::vector<Curve> inside;
        for (auto& s : stubs) {
            double my = stub_mid_y(s);
            if (my > ylo && my < yhi && s.length() > target / 2) inside.push_back(std::move(s));
        }
        if (inside.size() < 2) {
            tower.cap_reason = "ComponentResolutionLost: fewer than two dR_k stubs at k = " +
                               std::to_string(k);
            break;
        }
        // The image of the primary critical point rides its boundary stub;
        // pick that stub and its neighbor across the R_k-interior.
        Vec2 img = anchor_pt;
        for (int i = 0; i < k; ++i) img = apply(p, img);
        std::sort(inside.begin(), inside.end(), [&](const Curve& a2, const Curve& b2) {
            return a2.min_distance_to(img) < b2.min_distance_to(img);
        });
        Curve s1 = inside[0];
        Curve s2 = inside[1];
        if (stub_mid_y(s1) > stub_mid_y(s2)) std::swap(s1, s2);

        CriticalRegion lvl;
        lvl.level = k;
        lvl.stub_count = int(inside.size());
        lvl.lower = s1;
        lvl.upper = s2;
        lvl.hausdorff_gap = hausdorff_between(s1, s2);
        lvl.target_length = target;

        CriticalPointResult cl2, cu2;
        try {
            cl2 = find_critical_point(p, c, lvl.lower);
            cu2 = find_critical_point(p, c, lvl.upper);
        } catch (const NumericError& e) {
            tower.cap_reason = std::string("critical point lost at level ") +
                               std::to_string(k) + ": " + e.what();
            break;
        }
        lvl.crit_lower = cl2.point;
        lvl.crit_upper = cu2.point;
        lvl.midpoint_offset_lower =
            dist(cl2.point, lvl.lower.at_arclength(lvl.lower.length() / 2));
        lvl.midpoint_offset_upper =
            dist(cu2.point, lvl.upper.at_arclength(lvl.upper.length() / 2));

        // Vertical-line trim to length min(2 delta, kappa0^k) around the
        // critical points.
        auto trim = [&](const Curve& s, const Vec2& ctr) {
            Curve t;
            for (const auto& q : s.pts)
                if (std::fabs(q.x - ctr.x) <= target / 2) t.append(q);
            if (t.size() < 2) {
                // Window inside one polyline segment: interpolate endpoints.
                t = Curve{};
                double yv = ctr.y;
                t.append({ctr.x - target / 2, yv});
                t.append({ctr.x, yv});
                t.append({ctr.x + target / 2, yv});
            }
            return t;
        };
        lvl.lower_trim = trim(lvl.lower, cl2.point);
        lvl.upper_trim = trim(lvl.upper, cu2.point);
        lvl.horizontal_length =
            std::max(lvl.lower_trim.pts.back().x - lvl.lower_trim.pts.front().x,
                     lvl.upper_trim.pts.back().x - lvl.upper_trim.pts.front().x);

        tower.levels.push_back(lvl);
        tower.k_built = k;
        anchor_pt = cl2.point;
        x_lo = anchor_pt.x - std::max(target, 4 * delta * std::pow(0.5, k));
        x_hi = anchor_pt.x + std::max(target, 4 * delta * std::pow(0.5, k));
        x_lo = std::max(x_lo, -delta);
        x_hi = std::min(x_hi, delta);
        y_center = stub_mid_y(s1);
        (void)y_center;
    }
    if (tower.k_built < k_max && tower.cap_reason.empty())
        tower.cap_reason = "construction stopped early";
    return tower;
}

std::vector<CriticalPartitionElement> critical_partition(const FamilyParams& p,
                                                         const Constants& c,
                                                         const Curve& free_segment,
                                                         const BindingAnchor& zeta,
                                                         int k_cap) {
    std::vector<CriticalPartitionElement> out;
    double L = free_segment.length();
    // Arclength position of zeta on the segment.
    double s0 = 0, acc = 0, bd = 1e300;
    for (int i = 0; i + 1 < free_segment.size(); ++i) {
        acc += dist(free_segment[i], free_segment[i + 1]);
        double d = dist(free_segment[i + 1], zeta.point);
        if (d < bd) {
            bd = d;
            s0 = acc;
        }
    }
    auto offset_at = [&](double s) {
        Vec2 fz = apply(p, free_segment.at_arclength(s));
        return std::fabs(fz.x - zeta.leaf.x_at(fz.y));
    };
    int n_cap = std::min(20 * zeta.order - 1, zeta.wi.size() - 1);
    for (int side : {+1, -1}) {
        double s_end = side > 0 ? L : 0.0;
        // Threshold arclengths: offset(s_k) = D_k / 2, monotone in |s - s0|.
        auto threshold = [&](int k) -> double {
            double lD = log_Dk(zeta.wi, c.alpha, k) - std::log(2.0);
            double target = std::exp(lD);
            double lo = s0, hi = s_end;
            if (offset_at(hi) <= target) return hi;  // whole side inside V_k
            for (int it = 0; it < 120; ++it) {
                double mid = (lo + hi) / 2;
                if (offset_at(mid) <= target) lo = mid;
                else hi = mid;
            }
            return (lo + hi) / 2;
        };
        double outer = threshold(c.M);
        bool merged_outer = std::fabs(outer - s_end) < 1e-12;  // segment ends early
        for (int k = c.M; k <= std::min(k_cap, n_cap - 1); ++k) {
            double inner = threshold(k + 1);
            double lo = std::min(outer, inner), hi = std::max(outer, inner);
            if (hi - lo < 1e-13) {
                outer = inner;
                continue;
            }
            // Boundary-merge rule: an outer piece cut short by the segment end
            // is taken together with the adjacent one.
            if (merged_outer && k > c.M) merged_outer = false;
            int slices = std::max(1, int(std::exp(3.0 * c.alpha * k)));
            slices = std::min(slices, 1000000);
            double w = (hi - lo) / slices;
            for (int s = 0; s < slices; ++s) {
                CriticalPartitionElement el;
                el.s_lo = lo + s * w;
                el.s_hi = lo + (s + 1) * w;
                el.annulus = k;
                el.slice = s;
                el.bound_period = zeta.chi(k);
                el.side = side;
                out.push_back(el);
            }
            outer = inner;
        }
    }
    return out;
}

}  // namespace henon
