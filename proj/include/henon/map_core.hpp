// The Henon-like family: evaluation, derivative, inverse, orbits, and the
// modified family satisfying the (M1)-(M3) contracts outside R0.
#ifndef HENON_MAP_CORE_HPP
#define HENON_MAP_CORE_HPP

#include <memory>
#include <optional>
#include <vector>

#include "henon/geometry.hpp"
#include "henon/params.hpp"

namespace henon {

constexpr double kOverflowGuard = 1e8;

Vec2 apply(const FamilyParams& p, const Vec2& z);
Mat2 jacobian(const FamilyParams& p, const Vec2& z);

// Closed-form inverse of the built-in coupling. Throws NotInvertible for b=0
// or for params carrying a user Phi (no closed form).
Vec2 inverse_apply(const FamilyParams& p, const Vec2& z);

// n-step derivative product D f^n(z).
Mat2 jacobian_power(const FamilyParams& p, Vec2 z, int n);

// Degenerate 1-D quadratic g_a(x) = 1 - a x^2 helpers (b = 0 backbone).
inline double quad_map(double a, double x) { return 1.0 - a * x * x; }
inline double quad_deriv(double a, double x) { return -2.0 * a * x; }
// Smallest step at which |g_a^n(x)| exceeds the escape radius, or -1.
int quad_escape_time(double a, double x, int max_steps, double radius = 2.0);

enum class RegionTag { in_R0, in_D1, escaping };

struct ExitRecord {
    int first_exit_r0 = -1;   // first step with orbit point outside R0 (-1: never)
    int first_band_exit = -1; // first step outside the [-2,2]^2 box
    int entered_d1 = -1;      // first step classified in D1
    int entered_d0 = -1;      // first step classified in D0
    int diverged_at = -1;     // overflow guard tripped at this step
    bool exited() const { return first_exit_r0 >= 0; }
};

struct OrbitResult {
    std::vector<Vec2> points;  // n+1 points, z included
    std::optional<ExitRecord> exit;  // nullopt iff all iterates stay in R0
};

// Geometry handed to the modified family by the manifolds module:
// R0 membership polygon and the local stable manifold of Q as a graph x_W(y).
struct RegionGeometry {
    PolygonRegion r0;
    // W^s_loc(Q) sampled as x = x_W(y); linear extrapolation outside the table.
    std::vector<double> ws_y;  // increasing
    std::vector<double> ws_x;
    double x_Q = 0, y_Q = 0;   // the saddle Q
    double sqrt_b = 0;

    double ws_x_at(double y) const;
    // Membership with the 1e-9 corner-snap tolerance.
    bool in_R0(const Vec2& z) const {
        return r0.contains(z) || r0.boundary_distance_within(z, 1e-9) < 1e-9;
    }
    bool in_D1(const Vec2& z) const {
        return std::fabs(z.y) <= sqrt_b && z.x < ws_x_at(z.y) && !in_R0(z);
    }
    bool in_D0(const Vec2& z) const { return z.x >= std::sqrt(2.0) && !in_R0(z); }
};

// The concrete realization of f~ (M1)-(M3): equals f on R0, traps D1, and
// blends into an expanding affine model across a collar around R0.
class ModifiedFamily {
public:
    ModifiedFamily(FamilyParams params, std::shared_ptr<const RegionGeometry> geo);

    std::pair<Vec2, RegionTag> apply_modified(const Vec2& z) const;
    Mat2 jacobian_modified(const Vec2& z) const;

    const RegionGeometry& geometry() const { return *geo_; }
    const FamilyParams& params() const { return params_; }

private:
    Vec2 eval(const Vec2& z) const;
    FamilyParams params_;
    std::shared_ptr<const RegionGeometry> geo_;
    double collar_ = 0.1;
};

// Orbit under the plain family; exit/classification recorded against geo
// (pass nullptr to skip region classification entirely).
OrbitResult orbit(const FamilyParams& p, const Vec2& z, int n,
                  const RegionGeometry* geo);

// Orbit under the modified family (requires the region to be built).
OrbitResult orbit_modified(const ModifiedFamily& fam, const Vec2& z, int n);

// Max |partial^i f| over i<=4 sampled on [-2,2]^2 for this family's a
// together with the working window edge (the (M3) constant C0).
double estimate_C0(const FamilyParams& p, int samples_per_axis = 101);

}  // namespace henon

#endif
