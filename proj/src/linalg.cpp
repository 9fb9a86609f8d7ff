#include "henon/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace henon {

Vec2 most_contracting(const Mat2& m, double gap_tol) {
    Svd2 s = svd2(m);
    if (!(s.s1 > 0) || (s.s1 - s.s2) / s.s1 < gap_tol)
        throw DegenerateSingularValues();
    Vec2 e = s.v2;
    if (e.y < 0 || (e.y == 0 && e.x < 0)) e = e * -1.0;
    return e;
}

void CocycleHistory::push(const Mat2& m) {
    steps.push_back(m);
    Mat2 prod = scaled_products.empty() ? m : m * scaled_products.back();
    double carried = log_norms.empty() ? 0.0 : log_norms.back();
    double n = prod.norm();
    double log_n = carried + std::log(n);
    log_norms.push_back(log_n);
    double det_step = std::fabs(m.det());
    double prev_det = log_dets.empty() ? 0.0 : log_dets.back();
    log_dets.push_back(prev_det + (det_step > 0 ? std::log(det_step)
                                                : -std::numeric_limits<double>::infinity()));
    scaled_products.push_back({prod.a / n, prod.b / n, prod.c / n, prod.d / n});
}

CocycleHistory df_cocycle(const FamilyParams& p, const Vec2& z, int n) {
    CocycleHistory h;
    h.base = z;
    Vec2 w = z;
    for (int i = 0; i < n; ++i) {
        h.push(jacobian(p, w));
        w = apply(p, w);
    }
    return h;
}

ContractingReport contracting_sequence(const CocycleHistory& h, double kappa) {
    ContractingReport rep;
    double log_k = std::log(kappa);
    int n = h.size();
    for (int i = 1; i <= n; ++i) {
        if (h.log_norms[size_t(i - 1)] < i * log_k)
            throw ExpansionHypothesisViolated("||M^(i)|| < kappa^i at i = " + std::to_string(i));
        // The scaled product has the same singular directions as M^(i).
        Vec2 e = most_contracting(h.scaled_products[size_t(i - 1)]);
        rep.e.push_back(e);
    }
    std::vector<double> xs, ys;
    for (int i = 2; i <= n; ++i) {
        double c = std::fabs(cross(rep.e[size_t(i - 1)], rep.e[size_t(i - 2)]));
        rep.cross_norms.push_back(c);
        if (c > 1e-14) {  // above the double-precision floor
            xs.push_back(double(i));
            ys.push_back(std::log(c));
        }
    }
    if (xs.size() >= 2) {
        LinFit f = linear_fit(xs, ys);
        rep.fitted_ratio = std::exp(f.slope);
        rep.fit_points = f.n;
    }
    return rep;
}

ExpansionCheck is_kappa_expanding(const FamilyParams& p, const Vec2& z, const Vec2& v,
                                  double kappa, int n) {
    ExpansionCheck out;
    out.expanding = true;
    double log_k = std::log(kappa);
    Vec2 w = z;
    Vec2 dir = normalized(v);
    double lg = 0.0;
    for (int i = 1; i <= n; ++i) {
        Vec2 img = jacobian(p, w) * dir;
        double step = img.norm();
        if (!(step > 0)) {
            out.expanding = false;
            if (out.witness < 0) out.witness = i;
            out.log_growth.push_back(-std::numeric_limits<double>::infinity());
            break;
        }
        lg += std::log(step);
        dir = img / step;
        out.log_growth.push_back(lg);
        if (lg < i * log_k && out.expanding) {
            out.expanding = false;
            out.witness = i;
        }
        w = apply(p, w);
    }
    return out;
}

bool is_regular(const FamilyParams& p, const Vec2& z, const Vec2& v, double r, int m,
                double delta) {
    ExpansionCheck c = is_kappa_expanding(p, z, v, 1e-300, m);  // just the growth log
    if (int(c.log_growth.size()) < m) return false;
    double lm = c.log_growth[size_t(m - 1)];
    double bar = std::log(r * delta);
    for (int i = 0; i < m; ++i) {
        double li = i == 0 ? 0.0 : c.log_growth[size_t(i - 1)];
        if (lm < li + bar) return false;
    }
    return true;
}

bool log_seq_expanding(const std::vector<double>& lg, int from, int horizon, double log_kappa) {
    // Expansion of the pushed vector Df^from v over the next `horizon` steps.
    double base = from == 0 ? 0.0 : lg[size_t(from - 1)];
    for (int j = 1; j <= horizon; ++j) {
        if (size_t(from + j) > lg.size()) return false;
        if (lg[size_t(from + j - 1)] - base < j * log_kappa) return false;
    }
    return true;
}

HyperbolicTimes hyperbolic_times_from_log_growth(const std::vector<double>& lg, int m,
                                                 const Constants& c) {
    double L = std::log(1.0 / c.delta);
    double log_k4 = std::log(c.kappa0()) / 4.0;
    auto valid = [&](int mu) {
        return mu >= 0 && mu < m && log_seq_expanding(lg, mu, m - mu, log_k4);
    };
    // Top anchor: largest mu in [m - L, m - L/2].
    int hi = int(std::floor(m - L / 2));
    int lo = int(std::ceil(m - L));
    std::vector<int> picked;
    for (int mu = hi; mu >= lo; --mu) {
        if (valid(mu)) {
            picked.push_back(mu);
            break;
        }
    }
    if (picked.empty()) throw NoHyperbolicTimes();
    // Recurse backward: gaps grow by a factor in [4, 16].
    while (picked.back() >= (m + 1) / 2) {
        int gap = m - picked.back();
        int glo = 4 * gap, ghi = 16 * gap;
        bool found = false;
        for (int g = glo; g <= ghi; ++g) {  // prefer the largest mu
            int mu = m - g;
            if (mu < 0) break;
            if (valid(mu)) {
                picked.push_back(mu);
                found = true;
                break;
            }
        }
        if (!found) break;
    }
    if (picked.size() == 1) {
        // Degenerate short horizons (m close to log(1/delta)): the ratio rule
        // has no integer room, fall back to the nearest valid earlier time.
        for (int mu = picked.back() - 1; mu >= 0; --mu) {
            if (valid(mu)) {
                picked.push_back(mu);
                break;
            }
        }
    }
    if (picked.size() < 2 || picked.back() >= (m + 1) / 2)
        throw NoHyperbolicTimes("ladder does not reach below m/2");
    std::reverse(picked.begin(), picked.end());
    return {picked};
}

HyperbolicTimes hyperbolic_times(const FamilyParams& p, const Vec2& z, const Vec2& v, int m,
                                 const Constants& c) {
    ExpansionCheck g = is_kappa_expanding(p, z, v, 1e-300, m);
    return hyperbolic_times_from_log_growth(g.log_growth, m, c);
}

DerivativeHistory wi_sequence(const FamilyParams& p, const Vec2& zeta, int n) {
    DerivativeHistory h;
    h.base = zeta;
    Vec2 w = apply(p, zeta);
    Vec2 dir{1, 0};
    double lg = 0.0;
    h.dirs.push_back(dir);      // w_1 = (1,0), norm exactly 1
    h.log_norms.push_back(0.0);
    for (int i = 2; i <= n; ++i) {
        Vec2 img = jacobian(p, w) * dir;
        double step = img.norm();
        if (step > 0) {
            lg += std::log(step);
            dir = img / step;
        } else {
            lg = -std::numeric_limits<double>::infinity();
        }
        h.dirs.push_back(dir);
        h.log_norms.push_back(lg);
        w = apply(p, w);
    }
    return h;
}

LinFit linear_fit(const std::vector<double>& y) {
    std::vector<double> x(y.size());
    for (size_t i = 0; i < y.size(); ++i) x[i] = double(i);
    return linear_fit(x, y);
}

LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    LinFit f;
    f.n = int(std::min(x.size(), y.size()));
    if (f.n < 2) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < f.n; ++i) {
        sx += x[size_t(i)];
        sy += y[size_t(i)];
        sxx += x[size_t(i)] * x[size_t(i)];
        sxy += x[size_t(i)] * y[size_t(i)];
        syy += y[size_t(i)] * y[size_t(i)];
    }
    double den = f.n * sxx - sx * sx;
    if (den == 0) return f;
    f.slope = (f.n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / f.n;
    double sst = syy - sy * sy / f.n;
    double ssr = 0;
    for (int i = 0; i < f.n; ++i) {
        double e = y[size_t(i)] - (f.intercept + f.slope * x[size_t(i)]);
        ssr += e * e;
    }
    f.r2 = sst > 0 ? 1.0 - ssr / sst : 1.0;
    return f;
}

}  // namespace henon
