#pragma once

#include "qsdlab/generator.hpp"

namespace qsdlab {

/// P_t restricted to E via uniformization: exp(tL) = sum_k pois(Lambda t, k) K^k
/// with K = I + L/Lambda. Non-negativity preserving; Poisson series truncated
/// at relative tail 1e-14, long horizons split into chunks with Lambda*h <= 30.
Matrix transition_matrix(const AbsorbedGenerator& gen, double t);

/// mu P_t as a row-measure (unnormalized; total mass = survival probability).
Vector propagate_measure(const AbsorbedGenerator& gen, const Vector& mu, double t);

/// P_t f as a column-function on E.
Vector propagate_function(const AbsorbedGenerator& gen, const Vector& f, double t);

/// P_t f computed with per-chunk rescaling: returns (w, logscale) with
/// P_t f = exp(logscale) * w and max|w| = 1. Safe at horizons where the
/// survival probability underflows.
struct ScaledVector {
    Vector w;
    double logscale = 0.0;
};
ScaledVector propagate_function_scaled(const AbsorbedGenerator& gen, const Vector& f, double t);
ScaledVector propagate_measure_scaled(const AbsorbedGenerator& gen, const Vector& mu, double t);

/// P_mu(t < absorption) = total mass of mu P_t.
double survival_probability(const AbsorbedGenerator& gen, const Distribution& mu, double t);

/// phi_t(mu) = P_mu(X_t in . | t < absorption). Long horizons are evaluated in
/// renormalized steps of length <= 5/lambda0_estimate so the conditioned law
/// never underflows even when the raw survival probability does.
Distribution condition(const AbsorbedGenerator& gen, const Distribution& mu, double t);

/// Floor below which a single conditioning step is considered lost to underflow.
inline constexpr double kSurvivalUnderflowFloor = 1e-280;

/// mu R^T_{s,t} for the Markov semigroup R^T_{s,t} f(x) = E_x(f(X_{t-s}) | T-s < abs):
/// each Dirac start is conditioned on surviving past the horizon T and the
/// results are mixed under mu. For a Dirac start this is
/// (delta_x P_{t-s}) .* (P_{T-t} 1), renormalized; R^T_{u,s} R^T_{s,t} = R^T_{u,t}
/// holds exactly and each application contracts total variation.
Distribution conditional_semigroup_apply(const AbsorbedGenerator& gen, const Distribution& mu,
                                         double s, double t, double T);

/// Exact survival curve t -> P_mu(t < absorption) on a time grid.
SurvivalCurve survival_curve(const AbsorbedGenerator& gen, const Distribution& mu,
                             const std::vector<double>& t_grid);

}  // namespace qsdlab
