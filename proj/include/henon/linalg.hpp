// 2x2 cocycle analysis: most-contracting directions, expansion and
// regularity predicates, hyperbolic-time selection, and the w_i history.
//
// Derivative norms along orbits grow like 4^n, so every multi-step quantity
// is carried as (unit direction, accumulated log norm).
#ifndef HENON_LINALG_HPP
#define HENON_LINALG_HPP

#include <vector>

#include "henon/map_core.hpp"

namespace henon {

// Most contracting direction of M, sign-normalized (second component >= 0).
// Throws DegenerateSingularValues when the relative singular gap < 1e-10.
Vec2 most_contracting(const Mat2& m, double gap_tol = 1e-10);

// A sequence of matrices M_1, M_2, ... with products M^(i) = M_i ... M_1
// tracked in log scale. norms/dets refer to the partial products.
struct CocycleHistory {
    Vec2 base;
    std::vector<Mat2> steps;        // M_i
    std::vector<double> log_norms;  // log ||M^(i)||
    std::vector<double> log_dets;   // log |det M^(i)| (-inf if singular)
    std::vector<Mat2> scaled_products;  // M^(i) / ||M^(i)||  (direction info)

    int size() const { return int(steps.size()); }
    void push(const Mat2& m);
};

// Cocycle of Df along the orbit of z (first matrix is Df(z)).
CocycleHistory df_cocycle(const FamilyParams& p, const Vec2& z, int n);

struct ContractingReport {
    std::vector<Vec2> e;                  // e_i, sign-normalized
    std::vector<double> cross_norms;      // ||e_i x e_{i-1}||, i >= 2
    double fitted_ratio = 0.0;            // geometric ratio from log-linear fit
    int fit_points = 0;                   // cross terms above the eps floor
};

// e_i for i = 1..n given ||M^(i)|| >= kappa^i (throws
// ExpansionHypothesisViolated otherwise), plus the Lemma-fo decay report.
ContractingReport contracting_sequence(const CocycleHistory& h, double kappa);

struct ExpansionCheck {
    bool expanding = false;
    int witness = -1;  // first failing i (1-based), -1 if none
    std::vector<double> log_growth;  // log ||Df^i v|| - log ||v||, i = 1..n
};

// kappa-expansion of v at z up to time n: ||Df^i v|| >= kappa^i ||v||.
ExpansionCheck is_kappa_expanding(const FamilyParams& p, const Vec2& z, const Vec2& v,
                                  double kappa, int n);

// r-regularity up to m: ||Df^m v|| >= r * delta * ||Df^i v|| for 0 <= i < m.
bool is_regular(const FamilyParams& p, const Vec2& z, const Vec2& v, double r, int m,
                double delta);

// Same predicates on a precomputed log-growth sequence (index i = value at
// time i+1); used by the greedy hyperbolic-time search.
bool log_seq_expanding(const std::vector<double>& lg, int from, int horizon, double log_kappa);

struct HyperbolicTimes {
    std::vector<int> mu;  // mu_1 < ... < mu_s
};

// Greedy selection of well-distributed m-hyperbolic times per Lemma (htlem):
// (a) Df^{mu_j} v is kappa0^{1/4}-expanding up to m - mu_j,
// (b) 1/16 <= (m - mu_{j+1})/(m - mu_j) <= 1/4,
// (c) mu_1 < m/2 and m - log(1/delta) <= mu_s <= m - log(1/delta)/2.
HyperbolicTimes hyperbolic_times(const FamilyParams& p, const Vec2& z, const Vec2& v, int m,
                                 const Constants& c);
HyperbolicTimes hyperbolic_times_from_log_growth(const std::vector<double>& lg, int m,
                                                 const Constants& c);

// w_i(z) = Df^{i-1}(f z) (1,0)^T carried as unit directions + log norms.
struct DerivativeHistory {
    Vec2 base;                       // z itself (w_i live along the orbit of f z)
    std::vector<Vec2> dirs;          // unit w_i / ||w_i||, i = 1..n
    std::vector<double> log_norms;   // log ||w_i||, log_norms[0] = 0 exactly

    int size() const { return int(dirs.size()); }
    double log_norm(int i) const { return log_norms[size_t(i - 1)]; }  // 1-based
    Vec2 dir(int i) const { return dirs[size_t(i - 1)]; }
};

DerivativeHistory wi_sequence(const FamilyParams& p, const Vec2& zeta, int n);

// Least-squares slope/intercept of y against x (x = 0..n-1 when omitted).
struct LinFit {
    double slope = 0, intercept = 0, r2 = 0;
    int n = 0;
};
LinFit linear_fit(const std::vector<double>& y);
LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace henon

#endif
