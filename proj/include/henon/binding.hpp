// Bound/fold periods, the V_k strips and D_k radii, orbit decomposition into
// bound and free states, deep returns, Theta_nu, and the (G)_m condition.
#ifndef HENON_BINDING_HPP
#define HENON_BINDING_HPP

#include <optional>
#include <string>
#include <vector>

#include "henon/leaves.hpp"
#include "henon/linalg.hpp"

namespace henon {

// D_k(zeta) = e^{-3 alpha k} min_{1<=i<=k} min_{i<=j<=k+1} ||w_j||^2 / ||w_i||^3,
// computed in log scale. Requires wi up to k+1.
double log_Dk(const DerivativeHistory& wi, double alpha, int k);
inline double compute_Dk(const DerivativeHistory& wi, double alpha, int k) {
    return std::exp(log_Dk(wi, alpha, k));
}

// chi built lazily from recorded free-return events (time, bound period):
// chains backward while the previous bound window covers the query time with
// the (1/lambda0) log(10 delta) margin; identity when no chain applies.
struct ChiTable {
    struct Event {
        int time = 0;
        int period = 0;
    };
    std::vector<Event> events;  // increasing times
    double lambda0 = 0.6;
    double delta = 0.05;

    int operator()(int j) const;
    void add(int time, int period) { events.push_back({time, period}); }
};

// A critical approximation/point in its role as binding target.
struct BindingAnchor {
    Vec2 point;             // zeta
    int order = 0;          // n (wi cached to 20 n)
    DerivativeHistory wi;   // along the orbit of f zeta
    Leaf leaf;              // limit leaf through f zeta (V_k membership)
    ChiTable chi;
    double host_tangent_slope = 0.0;  // slope of the host curve at zeta
};

enum class PositionClass { admissible, critical, tangential };

struct BindingRecord {
    int return_time = 0;   // m (f^m z in I(delta))
    int anchor_id = -1;
    int annulus = 0;       // k with f z in V_k \ V_{k+1}
    PositionClass position = PositionClass::admissible;
    int bound_period = 0;  // p = chi(k)
    int fold_period = 0;   // q
    double distance = 0.0; // |zeta - z|
    bool deep = false;
};

// Annulus index of w relative to the anchor: largest k >= M with
// |x-offset| <= D_k/2. Returns -1 when outside V_M (not bound). Throws
// CriticalPosition when k >= 20n - 1. Ties within 1e-13 of a threshold
// resolve outward (smaller k).
int annulus_index(const BindingAnchor& anchor, const Vec2& fz, const Constants& c);

struct BoundPeriod {
    int annulus = 0;
    int period = 0;
};
// (k, p) for the return point z relative to the anchor; nullopt when f z is
// outside V_M. Throws CriticalPosition for k >= 20n - 1.
std::optional<BoundPeriod> bound_period(const FamilyParams& p, const BindingAnchor& anchor,
                                        const Vec2& z, const Constants& c);

// q = min { i in [1, p) : |zeta - z|^beta ||w_{j+1}|| >= 1 for all i <= j < p }.
int fold_period(const BindingAnchor& anchor, double dist_to_zeta, int p, double beta);

struct Itinerary {
    std::vector<BindingRecord> records;  // free returns, ordered
    std::vector<int8_t> bound_mask;      // per step 1..T: 1 = bound
    int horizon = 0;
    bool control_lost = false;
    int control_lost_at = -1;

    bool is_bound(int step) const {
        return step >= 1 && step <= horizon && bound_mask[size_t(step - 1)] != 0;
    }
};

// Bound/free decomposition of the orbit of z up to time T against the given
// anchors (binding point = nearest compatible anchor, Corollary-cap style).
// Entries into I(delta) outside every anchor's V_M stay free.
Itinerary decompose_orbit(const FamilyParams& p, const Constants& c, const Vec2& z, int T,
                          const std::vector<BindingAnchor>& anchors,
                          bool throw_on_control_loss = false);

// Flags deep returns per the cumulative-log criterion; the first return to
// I(delta) is always deep.
void flag_deep_returns(Itinerary& itin);

// Theta_nu(zeta) = kappa0 [ sum_{free i < nu} sigma_i^{-1} ]^{-1}, log scale
// inside. Returns with sigma_{n_s} = d^{10/9} / ||w_{n_s}||.
double theta_nu(const DerivativeHistory& wi, const Itinerary& itin, int nu, const Constants& c);

struct GCheck {
    bool pass = false;
    double log_sum = 0.0;  // sum of log distances at free returns
    double margin = 0.0;   // log_sum - (-alpha m)
};
// (G)_m return-sum test: sum log |f^{n_i} zeta - z_i| >= -alpha m.
GCheck check_G_condition(const Itinerary& itin, int m, const Constants& c);

}  // namespace henon

#endif
