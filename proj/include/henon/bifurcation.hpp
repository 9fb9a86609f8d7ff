// Locating the first-bifurcation parameter a* and the unbounded-manifold
// threshold a**, deformation tracking of critical approximations across
// parameters, critical parameters, the exclusion diagnostic, and the
// full-density sweep.
#ifndef HENON_BIFURCATION_HPP
#define HENON_BIFURCATION_HPP

#include <functional>

#include "henon/critical.hpp"

namespace henon {

struct BifurcationReport {
    double a_star = 0;
    double a_star_bracket = 0;       // final bracket width
    double a_star_star = 0;          // 0 when not computed
    double a_star_star_bracket = 0;
    Vec2 tangency_point;             // fold apex at a*
    double tangency_residual = 0;    // |penetration| at the reported a*
    int crossings_above = 0;         // fold/W^s crossings just above a*
    int crossings_below = 0;         // and just below
    Orientation orientation = Orientation::preserving;
    double b = 0;
};

// Signed penetration of the W^u fold past the W^s(Q) preimage curve near
// x ~ +1 (parabola-fit apex minus the vertical-curve position). Positive
// means two transversal crossings, negative means none.
double fold_penetration(const FamilyParams& p, char source_saddle, int* crossings = nullptr);

// Bisection on the tangency indicator over [1.8, 2.2] (1-D escape bisection
// when b = 0). Throws NoBracket when the endpoints do not straddle.
BifurcationReport find_a_star(double b, Orientation orientation, double tol = 1e-10);

// Smallest a at which W^u(P) leaves [-2,2]^2 (orientation preserving), by
// bisection on the box-exit flag, cross-checked against the W^u(P)-W^s(Q)
// tangency indicator.
struct AStarStarResult {
    double a_box = 0;        // box-exit bisection value
    double a_tangency = 0;   // tangency-indicator bisection value
    double bracket = 0;
};
AStarStarResult find_a_star_star(double b, double a_star, double tol = 1e-6);

struct DeformationTrack {
    std::vector<double> a;
    std::vector<Vec2> zeta;
    std::vector<double> speed;   // |d zeta / d a| by central differences
    double max_speed = 0;
    bool continuous = true;      // no jump exceeds 10x the median step
};

// Re-solve the critical approximation across the parameter interval on the
// re-built host curve. Throws TrackLost when a re-solve fails mid-interval.
DeformationTrack track_deformation(double b, Orientation o, const Constants& c,
                                   double a_lo, double a_hi, int samples, int order);

// The unique parameter where the x-coordinates of two tracks cross.
// Throws NoCrossing / MultipleCrossings.
double critical_parameter(const DeformationTrack& zeta_track,
                          const DeformationTrack& binding_track);

struct ExclusionVerdict {
    bool good = true;
    int first_fail_m = -1;
    std::string reason;
    double min_margin = 0;  // min over m of the (G)_m margin
};

// (G)_m over all m <= 20 n_max for the primary critical approximation.
ExclusionVerdict exclusion_diagnostic(const FamilyParams& p, const Constants& c, int n_max);

struct SweepSample {
    double a = 0;
    bool good = false;
    bool g_condition_ok = false;
    double escape_fraction = 0;
    int first_fail_m = -1;
};

struct SweepRung {
    double eps = 0;
    std::vector<SweepSample> samples;
    double good_fraction = 0;
};

struct SweepResult {
    double a_star = 0;
    double b = 0;
    std::vector<SweepRung> rungs;   // ladder order as supplied
};

struct SweepOptions {
    int samples_per_eps = 200;
    int n_max = 4;              // exclusion horizon: m <= 20 n_max
    int grid_n = 28;            // escape grid is grid_n x grid_n
    int escape_T = 10000;
    double escape_threshold = 0.99;
    uint64_t seed = 20240901;
    int jobs = 2;
    std::function<void(int rung, int index, const SweepSample&)> on_sample;  // optional
};

// Stratified parameter sweep over the eps ladder below a*; the Delta-proxy
// verdict is (exclusion good) AND (grid escape fraction >= threshold).
SweepResult density_sweep(double b, Orientation o, const Constants& c, double a_star,
                          const std::vector<double>& eps_ladder, const SweepOptions& opt);

}  // namespace henon

#endif
