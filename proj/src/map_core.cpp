#include "henon/map_core.hpp"

#include <algorithm>
#include <cmath>

namespace henon {

Vec2 apply(const FamilyParams& p, const Vec2& z) {
    if (p.phi) {
        Vec2 pert = p.phi(p.a, p.b, z.x, z.y);
        return {1.0 - p.a * z.x * z.x + p.b * pert.x, p.b * pert.y};
    }
    double rb = p.sqrt_b();
    return {1.0 - p.a * z.x * z.x + rb * z.y, p.coupling_sign() * rb * z.x};
}

Mat2 jacobian(const FamilyParams& p, const Vec2& z) {
    if (p.phi) {
        // Central differences; Phi is smooth by contract.
        const double h = 1e-6;
        Vec2 fx1 = apply(p, {z.x + h, z.y}), fx0 = apply(p, {z.x - h, z.y});
        Vec2 fy1 = apply(p, {z.x, z.y + h}), fy0 = apply(p, {z.x, z.y - h});
        return {(fx1.x - fx0.x) / (2 * h), (fy1.x - fy0.x) / (2 * h),
                (fx1.y - fx0.y) / (2 * h), (fy1.y - fy0.y) / (2 * h)};
    }
    double rb = p.sqrt_b();
    return {-2.0 * p.a * z.x, rb, p.coupling_sign() * rb, 0.0};
}

Vec2 inverse_apply(const FamilyParams& p, const Vec2& z) {
    if (p.degenerate()) throw NotInvertible("inverse_apply: b = 0 family is not invertible");
    if (p.phi) throw NotInvertible("inverse_apply: no closed form for user-supplied Phi");
    double rb = p.sqrt_b();
    double x = z.y / (p.coupling_sign() * rb);
    double y = (z.x - 1.0 + p.a * x * x) / rb;
    return {x, y};
}

Mat2 jacobian_power(const FamilyParams& p, Vec2 z, int n) {
    Mat2 m{1, 0, 0, 1};
    for (int i = 0; i < n; ++i) {
        m = jacobian(p, z) * m;
        z = apply(p, z);
    }
    return m;
}

int quad_escape_time(double a, double x, int max_steps, double radius) {
    for (int i = 0; i <= max_steps; ++i) {
        if (std::fabs(x) > radius) return i;
        x = quad_map(a, x);
    }
    return -1;
}

double RegionGeometry::ws_x_at(double y) const {
    if (ws_y.size() < 2) return x_Q;
    if (y <= ws_y.front()) {
        double t = (y - ws_y.front()) / (ws_y[1] - ws_y[0]);
        return ws_x[0] + t * (ws_x[1] - ws_x[0]);
    }
    if (y >= ws_y.back()) {
        size_t n = ws_y.size();
        double t = (y - ws_y[n - 2]) / (ws_y[n - 1] - ws_y[n - 2]);
        return ws_x[n - 2] + t * (ws_x[n - 1] - ws_x[n - 2]);
    }
    auto it = std::upper_bound(ws_y.begin(), ws_y.end(), y);
    size_t i = size_t(it - ws_y.begin());
    double t = (y - ws_y[i - 1]) / (ws_y[i] - ws_y[i - 1]);
    return ws_x[i - 1] + t * (ws_x[i] - ws_x[i - 1]);
}

ModifiedFamily::ModifiedFamily(FamilyParams params, std::shared_ptr<const RegionGeometry> geo)
    : params_(std::move(params)), geo_(std::move(geo)) {
    if (!geo_ || geo_->r0.empty())
        throw ModifiedFamilyUnavailable("modified family requires a built R0");
}

namespace {

// C^2 quintic smoothstep on [0,1] and its derivative.
double smooth01(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0);
}
double smooth01_d(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    double u = t * (1.0 - t);
    return 30.0 * u * u;
}

// x^2 continued linearly below x = -2 (C^1-blended over [-2.05, -1.95]) so
// the quadratic's horizontal expansion 2a|x| never decays on the left ray.
double quad_profile(double x) {
    if (x >= -1.95) return x * x;
    double lin = -4.0 * x - 4.0;  // tangent line of x^2 at x = -2
    if (x <= -2.05) return lin;
    double w = smooth01((-1.95 - x) / 0.1);
    return (1.0 - w) * x * x + w * lin;
}
double quad_profile_d(double x) {
    if (x >= -1.95) return 2.0 * x;
    if (x <= -2.05) return -4.0;
    double t = (-1.95 - x) / 0.1;
    double w = smooth01(t);
    double dw = -10.0 * smooth01_d(t);
    return (1.0 - w) * 2.0 * x + w * (-4.0) + dw * ((-4.0 * x - 4.0) - x * x);
}

// Odd saturation for the y argument only (bounded coupling term).
double saturate(double x) {
    double ax = std::fabs(x);
    if (ax <= 2.0) return x;
    return std::copysign(2.0 + 0.2 * std::tanh((ax - 2.0) / 0.2), x);
}
double saturate_d(double x) {
    double ax = std::fabs(x);
    if (ax <= 2.0) return 1.0;
    double c = std::cosh((ax - 2.0) / 0.2);
    return 1.0 / (c * c);
}

}  // namespace

Vec2 ModifiedFamily::eval(const Vec2& z) const {
    const RegionGeometry& g = *geo_;
    if (g.in_R0(z)) return apply(params_, z);  // (M1): f~ = f on R0 (corner snap included)

    // One smooth formula outside R0:
    //   x' from the quadratic with a linearized left tail (|dx'/dx| = 2a|x|
    //   on |x| <= 2, constant 4a beyond), blended into an affine expander on
    //   the strip a|x| <= 1.3 where the quadratic loses (M2)-expansion (real
    //   escape routes never visit that strip);
    //   y' squashed strictly inside |y| < 0.95 sqrt(b), which both traps D1
    //   vertically and keeps |det| <= b everywhere.
    double rb = params_.sqrt_b();
    double s = params_.coupling_sign();
    double xi = 1.0 - params_.a * quad_profile(z.x) + rb * saturate(z.y);
    double ax = params_.a * std::fabs(z.x);
    if (ax < 1.3) {
        double w = smooth01((1.3 - ax) / 0.2);
        xi = (1.0 - w) * xi + w * (3.0 * z.x - std::tanh(20.0 * z.x));
    }
    double yi = 0.95 * rb * std::tanh(s * z.x);
    if (g.in_D1(z)) {
        // Inward clamp: the image stays strictly left of W^s_loc(Q).
        double wall = g.ws_x_at(yi) - 1e-12;
        xi = std::min(xi, wall);
    }
    return {xi, yi};
}

std::pair<Vec2, RegionTag> ModifiedFamily::apply_modified(const Vec2& z) const {
    Vec2 img = eval(z);
    RegionTag tag = RegionTag::escaping;
    if (geo_->in_R0(img)) tag = RegionTag::in_R0;
    else if (geo_->in_D1(img)) tag = RegionTag::in_D1;
    return {img, tag};
}

Mat2 ModifiedFamily::jacobian_modified(const Vec2& z) const {
    // Analytic derivative of the branch containing z (f~ itself is glued
    // branchwise; the derivative below is the one seen by orbits staying in
    // the branch, which is all (M2) requires).
    if (geo_->in_R0(z)) return jacobian(params_, z);
    double rb = params_.sqrt_b();
    double s = params_.coupling_sign();
    double a = params_.a;

    double xi = 1.0 - a * quad_profile(z.x) + rb * saturate(z.y);
    double dxi_dx = -a * quad_profile_d(z.x);
    double dxi_dy = rb * saturate_d(z.y);
    double ax = a * std::fabs(z.x);
    if (ax < 1.3) {
        double t = (1.3 - ax) / 0.2;
        double w = smooth01(t);
        double dw_dx = smooth01_d(t) * (-(a * (z.x >= 0 ? 1.0 : -1.0)) / 0.2);
        double ch = std::cosh(20.0 * z.x);
        double fa = 3.0 * z.x - std::tanh(20.0 * z.x);
        double dfa_dx = 3.0 - 20.0 / (ch * ch);
        dxi_dx = (1.0 - w) * dxi_dx + w * dfa_dx + dw_dx * (fa - xi);
        dxi_dy = (1.0 - w) * dxi_dy;
        xi = (1.0 - w) * xi + w * fa;
    }
    double chy = std::cosh(s * z.x);
    double dyi_dx = 0.95 * rb * s / (chy * chy);
    double yi = 0.95 * rb * std::tanh(s * z.x);
    if (geo_->in_D1(z)) {
        double wall = geo_->ws_x_at(yi) - 1e-12;
        if (xi > wall) {
            // Clamp active: the x-image rides the wall graph.
            double h = 1e-9;
            double wall_slope = (geo_->ws_x_at(yi + h) - geo_->ws_x_at(yi - h)) / (2 * h);
            dxi_dx = wall_slope * dyi_dx;
            dxi_dy = 0.0;
        }
    }
    return {dxi_dx, dxi_dy, dyi_dx, 0.0};
}

namespace {

OrbitResult run_orbit(const FamilyParams& p, const ModifiedFamily* fam, const Vec2& z0, int n,
                      const RegionGeometry* geo) {
    OrbitResult out;
    out.points.reserve(size_t(n) + 1);
    out.points.push_back(z0);
    ExitRecord rec;
    bool any_event = false;
    auto classify = [&](const Vec2& z, int step) {
        if (!geo) return;
        if (rec.first_exit_r0 < 0 && !geo->in_R0(z)) {
            rec.first_exit_r0 = step;
            any_event = true;
        }
        if (rec.first_band_exit < 0 && (std::fabs(z.x) > 2.0 || std::fabs(z.y) > 2.0)) {
            rec.first_band_exit = step;
            any_event = true;
        }
        if (rec.entered_d1 < 0 && geo->in_D1(z)) {
            rec.entered_d1 = step;
            any_event = true;
        }
        if (rec.entered_d0 < 0 && geo->in_D0(z)) {
            rec.entered_d0 = step;
            any_event = true;
        }
    };
    classify(z0, 0);
    Vec2 z = z0;
    for (int i = 1; i <= n; ++i) {
        z = fam ? fam->apply_modified(z).first : apply(p, z);
        if (std::fabs(z.x) > kOverflowGuard || std::fabs(z.y) > kOverflowGuard) {
            rec.diverged_at = i;
            any_event = true;
            out.points.push_back(z);
            break;
        }
        out.points.push_back(z);
        classify(z, i);
    }
    if (any_event) out.exit = rec;
    return out;
}

}  // namespace

OrbitResult orbit(const FamilyParams& p, const Vec2& z, int n, const RegionGeometry* geo) {
    return run_orbit(p, nullptr, z, n, geo);
}

OrbitResult orbit_modified(const ModifiedFamily& fam, const Vec2& z, int n) {
    return run_orbit(fam.params(), &fam, z, n, &fam.geometry());
}

double estimate_C0(const FamilyParams& p, int samples_per_axis) {
    // For the built-in coupling all mixed partials are available in closed
    // form; the dominant one is |d/dx (1 - a x^2)| = 2 a |x|. The estimate
    // covers the spec's working window a <= 2.6 so one constant serves the
    // whole parameter sweep.
    double amax = std::max(p.a, 2.6);
    double m = 0.0;
    for (int i = 0; i < samples_per_axis; ++i) {
        double x = -2.0 + 4.0 * i / (samples_per_axis - 1);
        m = std::max(m, 2.0 * amax * std::fabs(x));
    }
    m = std::max(m, 2.0 * amax);           // second derivative in x
    m = std::max(m, 4.0);                  // d/da = -x^2
    m = std::max(m, std::sqrt(p.b) + 1.0); // coupling partials
    return m;
}

}  // namespace henon
