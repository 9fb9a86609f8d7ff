// Critical approximations, genuine critical points, good critical behavior,
// the nested critical regions C^(k), and critical partitions.
#ifndef HENON_CRITICAL_HPP
#define HENON_CRITICAL_HPP

#include <optional>

#include "henon/binding.hpp"
#include "henon/manifolds.hpp"

namespace henon {

struct GoodBehavior {
    bool g1 = false;
    bool g2 = false;
    bool g3 = false;
    ChiTable chi;
    double g1_margin = 0.0;   // min over i of log||w_i|| - lambda (i-1)
    double g3_ratio = 1.0;    // min chi(j)/j over the domain
    Itinerary itinerary;      // the critical orbit's own decomposition
};

struct CriticalApprox {
    Vec2 point;
    int order = 0;
    Curve host;               // the hosting curve piece
    DerivativeHistory wi;     // cached to 20 n
    Leaf leaf;                // limit leaf through f zeta
    double tangency_residual = 0.0;  // |e_n(f zeta) x Df t(zeta)|
    GoodBehavior good;
    bool expanding_ok = false;  // ||Df^i(f zeta)|| >= 1/10 for i <= n
};

struct CriticalPointResult {
    Vec2 point;
    Curve host;
    std::vector<int> orders;       // approximation orders used
    std::vector<double> gaps;      // |zeta_{n_{k+1}} - zeta_{n_k}|
    double tangency_residual = 0;  // leaf-vs-curve tangency residual at f zeta
    DerivativeHistory wi;
    Leaf leaf;                     // limit leaf through f zeta
};

// Root of g(s) = e_n(f gamma(s)) x Df t(gamma(s)) on the curve by bracketing
// and bisection (1e-14 in arclength). Throws NoSignChange without a bracket.
// The degenerate b = 0 family reduces to the sign change of -2 a x.
CriticalApprox find_critical_approx(const FamilyParams& p, const Constants& c,
                                    const Curve& curve, int n);

// Re-solve on a nearby curve after checking the closeness/angle hypotheses
// (|gamma1(0)-gamma2(0)| <= eps^n, angle <= eps^n). Throws HypothesisViolated.
CriticalApprox refine_critical_approx(const FamilyParams& p, const Constants& c,
                                      const Curve& gamma2, const CriticalApprox& existing,
                                      double eps);

// The unique leaf-tangency point on a free segment across I(delta), located
// as the limit of critical approximations of increasing order.
CriticalPointResult find_critical_point(const FamilyParams& p, const Constants& c,
                                        const Curve& free_segment, int max_order = 12);

// (G1)(G2)(G3) report with the chi table, built from the orbit of zeta
// decomposed against the given anchors (self-binding when none supplied).
GoodBehavior check_good_behavior(const FamilyParams& p, const Constants& c, const Vec2& zeta,
                                 int n, const std::vector<BindingAnchor>& anchors = {});

// Anchor view of an approximation (for the binding module).
BindingAnchor to_anchor(const CriticalApprox& ca);
BindingAnchor to_anchor(const CriticalPointResult& cp);

struct CriticalRegion {
    int level = 0;
    Curve lower, upper;          // the two horizontal boundary stubs (by y)
    Curve lower_trim, upper_trim;  // trimmed to length min(2 delta, kappa0^k)
    Vec2 crit_lower, crit_upper;   // critical points on the two boundaries
    double hausdorff_gap = 0.0;
    double horizontal_length = 0.0;  // of the trimmed boundary
    double target_length = 0.0;      // min(2 delta, kappa0^k)
    double midpoint_offset_lower = 0.0;  // |crit - midpoint| on the across-stub
    double midpoint_offset_upper = 0.0;
    int stub_count = 0;  // number of dR_k stubs found in the window
};

struct CriticalRegionTower {
    std::vector<CriticalRegion> levels;  // the primary chain, level 0..k_built
    int k_requested = 0;
    int k_built = 0;
    std::string cap_reason;  // set when construction stopped early
};

// Nested critical regions along the primary chain (the component containing
// the level-0 critical point). Stops with ComponentResolutionLost recorded in
// cap_reason when the trim scale or the boundary gap falls below resolution.
CriticalRegionTower build_critical_regions(const FamilyParams& p, const Constants& c,
                                           const RegionR0& r0, int k_max);

struct CriticalPartitionElement {
    double s_lo = 0, s_hi = 0;  // arclength window on the host segment
    int annulus = 0;            // k
    int slice = 0;              // s
    int bound_period = 0;       // chi(k)
    int side = +1;              // +-1 of zeta
};

// Two-sided annular decomposition of the free segment around the critical
// point by pullbacks of the V_k strips, boundary-merged and sliced into
// floor(e^{3 alpha k}) equal pieces.
std::vector<CriticalPartitionElement> critical_partition(const FamilyParams& p,
                                                         const Constants& c,
                                                         const Curve& free_segment,
                                                         const BindingAnchor& zeta,
                                                         int k_cap = 60);

// The primary free segment of W^u across I(width): the outgoing-branch piece
// of the R0 boundary restricted to |x| <= width.
Curve primary_segment(const RegionR0& r0, double width);

}  // namespace henon

#endif
