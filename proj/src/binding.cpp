#include "henon/binding.hpp"

#include <algorithm>
#include <cmath>

namespace henon {

double log_Dk(const DerivativeHistory& wi, double alpha, int k) {
    // min over 1<=i<=k of min over i<=j<=k+1 of (2 log||w_j|| - 3 log||w_i||).
    double best = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= k; ++i) {
        double inner = std::numeric_limits<double>::infinity();
        for (int j = i; j <= k + 1; ++j)
            inner = std::min(inner, 2.0 * wi.log_norm(j));
        best = std::min(best, inner - 3.0 * wi.log_norm(i));
    }
    return -3.0 * alpha * k + best;
}

int ChiTable::operator()(int j) const {
    double margin = std::log(10.0 * delta) / lambda0;  // negative for delta < 0.1
    int h = j;
    while (true) {
        // Largest recorded free return strictly before h.
        const Event* prev = nullptr;
        for (const auto& e : events) {
            if (e.time < h && (!prev || e.time > prev->time)) prev = &e;
        }
        if (!prev) break;
        if (double(h - prev->time - prev->period) <= margin)
            h = prev->time;
        else
            break;
    }
    return h;
}

int annulus_index(const BindingAnchor& anchor, const Vec2& fz, const Constants& c) {
    double offset = std::fabs(fz.x - anchor.leaf.x_at(fz.y));
    double log_off = offset > 0 ? std::log(offset) : -1e300;
    int cap = 20 * anchor.order - 1;
    int kmax_avail = anchor.wi.size() - 1;
    int k = -1;
    for (int kk = c.M; kk <= std::min(cap, kmax_avail); ++kk) {
        double lD = log_Dk(anchor.wi, c.alpha, kk) - std::log(2.0);
        // Ties resolve outward: an offset within 1e-13 of D_k/2 keeps the
        // previous (smaller) annulus.
        if (log_off <= lD && std::fabs(offset - std::exp(lD)) > 1e-13)
            k = kk;
        else if (log_off > lD)
            break;
    }
    if (k < 0) return -1;
    if (k >= cap) throw CriticalPosition();
    return k;
}

std::optional<BoundPeriod> bound_period(const FamilyParams& p, const BindingAnchor& anchor,
                                        const Vec2& z, const Constants& c) {
    Vec2 fz = apply(p, z);
    int k = annulus_index(anchor, fz, c);
    if (k < 0) return std::nullopt;
    return BoundPeriod{k, anchor.chi(k)};
}

int fold_period(const BindingAnchor& anchor, double dist_to_zeta, int p, double beta) {
    if (p < 2) return 0;
    double logd = dist_to_zeta > 0 ? std::log(dist_to_zeta) : -1e300;
    // Largest j in [1, p) violating beta log d + log||w_{j+1}|| >= 0, plus 1.
    // Boundary ties (within 1e-12) count as satisfied.
    int q = 1;
    for (int j = p - 1; j >= 1; --j) {
        if (j + 1 > anchor.wi.size()) continue;
        if (beta * logd + anchor.wi.log_norm(j + 1) < -1e-12) {
            q = j + 1;
            break;
        }
    }
    return std::min(q, p - 1);
}

Itinerary decompose_orbit(const FamilyParams& p, const Constants& c, const Vec2& z, int T,
                          const std::vector<BindingAnchor>& anchors,
                          bool throw_on_control_loss) {
    Itinerary itin;
    itin.horizon = T;
    itin.bound_mask.assign(size_t(T), 0);
    double beta = c.beta(p.b);
    Vec2 w = z;
    int bound_until = 0;  // steps <= bound_until are bound
    for (int m = 1; m <= T; ++m) {
        w = apply(p, w);
        if (std::fabs(w.x) > kOverflowGuard || std::fabs(w.y) > kOverflowGuard) {
            itin.horizon = m - 1;
            itin.bound_mask.resize(size_t(m - 1));
            break;
        }
        if (m <= bound_until) {
            itin.bound_mask[size_t(m - 1)] = 1;
            continue;
        }
        if (std::fabs(w.x) >= c.delta) continue;  // outside I(delta): free
        // Free return into I(delta): choose the nearest compatible anchor.
        int best = -1;
        double best_off = std::numeric_limits<double>::infinity();
        Vec2 fw = apply(p, w);
        for (size_t ai = 0; ai < anchors.size(); ++ai) {
            double d = std::fabs(anchors[ai].point.x - w.x);
            if (d > 2 * c.delta) continue;
            double off = std::fabs(fw.x - anchors[ai].leaf.x_at(fw.y));
            if (off < best_off) {
                best_off = off;
                best = int(ai);
            }
        }
        if (best < 0) {
            itin.control_lost = true;
            itin.control_lost_at = m;
            if (throw_on_control_loss) throw ControlLost();
            continue;
        }
        const BindingAnchor& anchor = anchors[size_t(best)];
        BindingRecord rec;
        rec.return_time = m;
        rec.anchor_id = best;
        rec.distance = dist(w, anchor.point);
        try {
            auto bp = bound_period(p, anchor, w, c);
            if (!bp) continue;  // outside V_M: stays free
            rec.annulus = bp->annulus;
            rec.bound_period = bp->period;
            rec.position = PositionClass::admissible;
            rec.fold_period = fold_period(anchor, rec.distance, bp->period, beta);
        } catch (const CriticalPosition&) {
            rec.position = PositionClass::critical;
            rec.annulus = 20 * anchor.order - 1;
            rec.bound_period = 0;
        }
        itin.records.push_back(rec);
        bound_until = m + rec.bound_period;
        for (int i = m + 1; i <= std::min(bound_until, itin.horizon); ++i)
            itin.bound_mask[size_t(i - 1)] = 1;
    }
    flag_deep_returns(itin);
    return itin;
}

void flag_deep_returns(Itinerary& itin) {
    // nu_r is deep iff it is the first return, or for every earlier s:
    // sum_{j=s+1}^{r} 2 log d_j <= log d_s.
    size_t n = itin.records.size();
    std::vector<double> logd(n);
    for (size_t i = 0; i < n; ++i)
        logd[i] = itin.records[i].distance > 0 ? std::log(itin.records[i].distance) : -1e300;
    std::vector<double> prefix(n + 1, 0.0);  // prefix sums of 2 log d
    for (size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + 2.0 * logd[i];
    for (size_t r = 0; r < n; ++r) {
        bool deep = true;
        for (size_t s = 0; s < r; ++s) {
            double tail = prefix[r + 1] - prefix[s + 1];  // j in [s+2 .. r+1], 1-based
            if (!(tail <= logd[s])) {
                deep = false;
                break;
            }
        }
        itin.records[r].deep = deep;
    }
}

double theta_nu(const DerivativeHistory& wi, const Itinerary& itin, int nu, const Constants& c) {
    // log-sum-exp of -log sigma_i over free i in [1, nu).
    std::vector<double> neg_log_sigma;
    std::vector<int8_t> is_return(size_t(nu), 0);
    std::vector<double> ret_log_sigma(size_t(nu), 0.0);
    for (const auto& r : itin.records) {
        if (r.return_time < nu) {
            is_return[size_t(r.return_time - 1)] = 1;
            double logd = r.distance > 0 ? std::log(r.distance) : -1e300;
            ret_log_sigma[size_t(r.return_time - 1)] =
                (10.0 / 9.0) * logd - wi.log_norm(r.return_time);
        }
    }
    for (int i = 1; i < nu; ++i) {
        if (itin.is_bound(i)) continue;
        double ls;
        if (is_return[size_t(i - 1)]) ls = ret_log_sigma[size_t(i - 1)];
        else if (i + 1 <= wi.size())
            ls = wi.log_norm(i + 1) - 2.0 * wi.log_norm(i);
        else
            continue;
        neg_log_sigma.push_back(-ls);
    }
    if (neg_log_sigma.empty()) return c.kappa0();
    double mx = *std::max_element(neg_log_sigma.begin(), neg_log_sigma.end());
    double acc = 0;
    for (double v : neg_log_sigma) acc += std::exp(v - mx);
    double log_sum = mx + std::log(acc);
    return std::exp(std::log(c.kappa0()) - log_sum);
}

GCheck check_G_condition(const Itinerary& itin, int m, const Constants& c) {
    GCheck out;
    for (const auto& r : itin.records) {
        if (r.return_time <= m)
            out.log_sum += r.distance > 0 ? std::log(r.distance) : -1e300;
    }
    out.margin = out.log_sum + c.alpha * m;
    out.pass = out.margin >= 0;
    return out;
}

}  // namespace henon
