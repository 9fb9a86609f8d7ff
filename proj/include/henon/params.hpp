// Family parameters and the working set of small/large constants.
#ifndef HENON_PARAMS_HPP
#define HENON_PARAMS_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "henon/geometry.hpp"

namespace henon {

enum class Orientation { preserving, reversing };

// One Henon-like map: (x,y) -> (1 - a x^2, 0) + b * Phi(a,b,x,y).
// The built-in coupling realizes (1 - a x^2 + sqrt(b) y, +/- sqrt(b) x):
// '+' for the reversing family (det Df = -b), '-' for preserving (det Df = +b).
struct FamilyParams {
    double a = 2.0;
    double b = 1e-4;
    Orientation orientation = Orientation::preserving;

    // Optional user-supplied perturbation field. When set it overrides the
    // built-in coupling: map = (1 - a x^2, 0) + b * phi(a,b,x,y).
    // Must be smooth with bounded partials up to order 4 on [-2,2]^2.
    std::function<Vec2(double a, double b, double x, double y)> phi;

    double sqrt_b() const { return std::sqrt(b); }
    // Sign s in (..., s*sqrt(b)*x): +1 reversing, -1 preserving.
    double coupling_sign() const { return orientation == Orientation::reversing ? 1.0 : -1.0; }
    bool degenerate() const { return b == 0.0; }

    void validate() const {
        if (!(b >= 0.0) || b > 1e-2) throw std::invalid_argument("b must lie in [0, 1e-2]");
        if (!(a >= 1.3 && a <= 2.6)) throw std::invalid_argument("a outside working window [1.3, 2.6]");
    }
};

// Constructive constants, chosen in the order alpha, M, delta, then b.
// theta = alpha^3 and kappa0 = C0^-10 are exact identities; beta depends on b.
struct Constants {
    double alpha = 0.01;
    int M = 3;
    double delta = 0.05;
    double lambda0 = 0.6;  // < log 2
    double C0 = 10.5;      // derivative bound from (M3); see estimate_C0
    double C1 = 1e-4;      // lower bound for |det Df| on R0 (= b for the standard family)
    double C2 = 64.0;      // unstable-side angle Lipschitz constant, measured
    double C3 = 0.0;       // C0 * exp(6/log C0), derived

    double lambda() const { return lambda0 / 2.0; }
    double theta() const { return alpha * alpha * alpha; }
    double kappa0() const { return std::pow(C0, -10.0); }
    double beta(double b) const { return 2.0 * std::log(C0) / std::log(1.0 / b); }
    int bigN() const { return int(std::log(1.0 / delta) / theta()); }
    double c3() const { return C3 > 0 ? C3 : C0 * std::exp(6.0 / std::log(C0)); }

    void validate() const {
        if (!(alpha > 0 && alpha < 0.1)) throw std::invalid_argument("alpha must be small positive");
        if (M < 1) throw std::invalid_argument("M must be >= 1");
        if (!(delta > 0 && delta < 0.5)) throw std::invalid_argument("delta must be small positive");
        if (!(lambda0 > 0 && lambda0 < std::log(2.0)))
            throw std::invalid_argument("lambda0 must lie in (0, log 2)");
        if (!(C0 > 1.0)) throw std::invalid_argument("C0 must exceed 1");
    }
};

// Numeric failure modes named by the operation contracts.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
#define HENON_ERROR(NAME)                         \
    struct NAME : NumericError {                  \
        NAME(const std::string& m = #NAME) : NumericError(m) {} \
    }

HENON_ERROR(NotInvertible);
HENON_ERROR(ModifiedFamilyUnavailable);
HENON_ERROR(NumericOverflow);
HENON_ERROR(DegenerateSingularValues);
HENON_ERROR(ExpansionHypothesisViolated);
HENON_ERROR(NoHyperbolicTimes);
HENON_ERROR(NewtonDiverged);
HENON_ERROR(ResolutionExhausted);
HENON_ERROR(BoundaryNotClosed);
HENON_ERROR(FieldDegenerate);
HENON_ERROR(AmbiguousTangency);
HENON_ERROR(LeafMissesTarget);
HENON_ERROR(NoSignChange);
HENON_ERROR(HypothesisViolated);
HENON_ERROR(NoTangency);
HENON_ERROR(ComponentResolutionLost);
HENON_ERROR(CriticalPosition);
HENON_ERROR(NoBinding);
HENON_ERROR(LadderExhausted);
HENON_ERROR(ControlLost);
HENON_ERROR(NoBracket);
HENON_ERROR(TrackLost);
HENON_ERROR(NoCrossing);
HENON_ERROR(MultipleCrossings);
HENON_ERROR(DepthExhausted);
HENON_ERROR(RegionUnavailable);
HENON_ERROR(SampleStarved);
#undef HENON_ERROR

}  // namespace henon

#endif
