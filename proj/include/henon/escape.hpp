// Escape statistics: grid survival curves, stopping-time partitions with
// exponential tails, intersection proportions on curves, close returns and
// the Omega_k ratios, projectivization-derivative checks, and the
// transitivity witness.
#ifndef HENON_ESCAPE_HPP
#define HENON_ESCAPE_HPP

#include "henon/critical.hpp"

namespace henon {

struct SurvivalCurve {
    std::vector<double> fraction;  // fraction of the grid inside R0 at t = 0..T
    int total_points = 0;
    double final_fraction() const { return fraction.empty() ? 1.0 : fraction.back(); }
    bool monotone() const {
        for (size_t i = 1; i < fraction.size(); ++i)
            if (fraction[i] > fraction[i - 1] + 1e-15) return false;
        return true;
    }
};

// Uniform grid over the R0 bounding box filtered by membership; escape is
// the first exit from R0 (sufficient by the K+ claim).
SurvivalCurve grid_escape(const FamilyParams& p, const RegionR0& r0, int nx, int ny, int T);

struct StoppingElement {
    double u_lo = 0, u_hi = 0;  // arclength window on omega_0
    int stop_time = -1;         // S(omega); -1 when unresolved at the depth cap
};

struct StoppingPartition {
    std::vector<StoppingElement> elements;
    std::vector<double> tail_mass;    // |{S > n}| for n = 0..depth
    double unresolved_mass = 0;
    LinFit tail_fit;                  // log |{S>n}| against n over the resolved range
    int distortion_checks = 0;
    double max_log_distortion = 0;    // max log-derivative ratio over elements
};

// Recursive cutting per the growth-to-fixed-size construction: free returns
// into I(delta) cut by the anchor's critical partition, escaping elements
// stop when the image stretches across a component of I(2delta)\I(delta).
StoppingPartition segment_stopping_times(const FamilyParams& p, const Constants& c,
                                         const RegionR0& r0, const Curve& omega0,
                                         const BindingAnchor& anchor, int depth);

struct ProportionEstimate {
    double survived_fraction = 0;  // fraction of samples still in R0 after T
    int samples = 0;
    int T = 0;
};

// Fraction of samples on gamma whose orbit stays in R0 for T steps (the
// |gamma cap K+| <= sigma |gamma| proxy; T is reported with the estimate).
ProportionEstimate leaf_intersection_proportion(const FamilyParams& p, const RegionR0& r0,
                                                const Curve& gamma, int T, int samples = 10000);

// One component of A^(k): the delta^{k/10}-curves around the critical pair
// on the level-k region boundaries, joined by vertical lines.
struct BRegion {
    int level = 0;
    Curve lower, upper;       // graphs y(x) over the trimmed window
    double x_lo = 0, x_hi = 0;
    bool contains(const Vec2& z) const;
};

// Build A^(k) regions for k <= tower.k_built from the region tower.
std::vector<BRegion> build_A_regions(const FamilyParams& p, const Constants& c,
                                     const CriticalRegionTower& tower);

struct CloseReturnLog {
    std::vector<int> nu;     // detected close-return times
    int truncated_at = -1;   // time horizon beyond the built regions
};

// Close returns of the seed: times nu with f^nu z in A^(nu). Levels above
// the built tower truncate the log (flagged, per RegionUnavailable).
CloseReturnLog close_returns(const FamilyParams& p, const std::vector<BRegion>& regions,
                             const Vec2& seed, int T, int k0);

struct OmegaRatios {
    std::vector<double> ratio;       // |Omega_k| / |Omega_{k-1}| estimates
    std::vector<double> upper_95;    // 95% upper bounds (rule of three when starved)
    std::vector<int> hits;           // surviving counts per level
    bool starved = false;
};

// Monte Carlo |Omega_k|/|Omega_{k-1}| with importance re-seeding; starved
// levels report deterministic upper bounds only.
OmegaRatios omega_ratio(const FamilyParams& p, const Constants& c,
                        const std::vector<BRegion>& regions, int k0, int sample_size,
                        int levels, uint64_t seed = 7);

struct ProjectivizationCheck {
    double max_dv_ratio = 0;   // FD |d_v f_*| over the (pro1) bound
    double max_dxi_ratio = 0;  // FD |d_xi f_*| over the (pro2) bound
    int samples = 0;
};

// Finite-difference estimates of the projectivization derivatives against
// the closed-form bounds 2|det Df| / ||Df v||^2 and ||D^2 f|| ||v|| / ||Df v||.
ProjectivizationCheck angle_propagation_check(const FamilyParams& p, int samples,
                                              uint64_t seed = 11);

struct TransitivityWitness {
    int transverse_count = 0;
    int tangential_count = 0;
    double min_angle = 0;       // smallest crossing angle among transverse hits
    std::vector<Vec2> samples;  // a few homoclinic points
    bool applicable = true;     // false for b = 0
};

// Transverse homoclinic intersections of W^u(Q) with W^s(Q) pieces.
TransitivityWitness transitivity_witness(const FamilyParams& p, const Constants& c,
                                         double angle_floor = 1e-6);

}  // namespace henon

#endif
