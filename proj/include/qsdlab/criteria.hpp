#pragma once

#include <functional>
#include <optional>

#include "qsdlab/models.hpp"
#include "qsdlab/spectral.hpp"

namespace qsdlab {

/// Numerical certificate of the mixing conditions: a minorization measure nu
/// with constant c1 at horizon t0, the survival-comparison constant c2, the
/// measured c2(alpha), and the derived contraction parameters
/// gamma_bound = -log(1-c1c2)/t0 and C_bound = 2.
struct CriteriaCertificate {
    double t0 = 0.0;
    Distribution nu;
    double c1 = 0.0;
    double c2 = 0.0;
    double c2_argmin_t = 0.0;  // +inf when the asymptotic ratio attains the inf
    double c2_alpha = 0.0;
    double gamma_bound = 0.0;
    double C_bound = 2.0;
};

/// Entrywise minimum of a family of non-negative measure vectors: on a finite
/// space the infimum measure is attained by singleton partitions.
Vector infimum_measure(const std::vector<Vector>& rows);

struct A1Result {
    Distribution nu;
    double c1 = 0.0;
    double t0 = 0.0;
};

/// Builds the conditional kernel rows K(x,.) = P_x(X_{t0} in . | t0 < abs),
/// takes their infimum measure and normalizes: c1 is maximal for this nu.
A1Result certify_a1(const AbsorbedGenerator& gen, double t0);

struct A2Result {
    double c2 = 0.0;
    double argmin_t = 0.0;  // +inf when attained asymptotically
    std::vector<double> curve_t;      // certification curve (t, ratio)
    std::vector<double> curve_ratio;
};

/// c2 = inf_t P_nu(t < abs) / max_x P_x(t < abs) over {0, grid_step, ..., t_max},
/// closed with the asymptotic value nu(eta)/max eta. Requires t_max deep enough
/// that e^{lambda0 t} P_x(t < abs) is uniformly within 1% of min eta.
A2Result certify_a2(const AbsorbedGenerator& gen, const Distribution& nu, const SpectralTriple& triple,
                    double t_max, double grid_step);

/// c2(mu) = inf_{t, rho} P_mu(t < abs)/P_rho(t < abs); the inner sup over rho
/// is attained at Dirac measures on a finite space.
double c2_of_mu(const AbsorbedGenerator& gen, const Distribution& mu, const SpectralTriple& triple,
                double t_max, double grid_step);

/// The explicit mixing bound 2 (1 - c1 c2)^floor(t/t0).
double explicit_bound(const CriteriaCertificate& cert, double t);

/// Guaranteed lower bound for c2(alpha) given contraction constants (C, gamma):
/// sup_{s>0} exp(-lambda0 s - C e^{(lambda0-gamma)s} / (1 - e^{-gamma s})),
/// maximized by golden section on a log-spaced bracket.
double c2_alpha_lower_bound(double C, double gamma, double lambda0);

struct CertifyOptions {
    std::vector<double> t0_multipliers = {0.5, 1.0, 2.0, 4.0};  // times 1/lambda0
    double t_max = 0.0;        // 0: start at 12/lambda0 and double until the A2 precondition holds
    double grid_step = 0.0;    // 0: t0/4
    int max_t_max_doublings = 8;
};

/// Full certification pipeline: searches t0 over the candidate set maximizing
/// c1 c2 and assembles the certificate (including the measured c2(alpha)).
/// Throws Error when (A1) fails at every candidate t0.
CriteriaCertificate certify(const AbsorbedGenerator& gen, const SpectralTriple& triple,
                            const CertifyOptions& opts = {});

/// Certificate for a fixed t0 (grid parameters per CertifyOptions defaults).
CriteriaCertificate certify_at(const AbsorbedGenerator& gen, const SpectralTriple& triple, double t0,
                               const CertifyOptions& opts = {});

enum class SeriesVerdict { Converged, Diverging, Inconclusive };

/// Partial sums of the extinction-time series S = sum_{k>z} (1/(d_k alpha_k))
/// sum_{l>=k} alpha_l with alpha_k = prod b_i / prod d_i. All products are kept
/// as running ratios (log-scale equivalents) so k!-scale factors never touch
/// linear floating point.
struct SeriesReport {
    std::vector<double> partial_sums;  // S_K for K = z+1 .. K_max
    long long first_k = 1;             // k index of partial_sums[0]
    SeriesVerdict verdict = SeriesVerdict::Inconclusive;
    std::optional<double> tail_bound;  // geometric tail estimate when converged
    double last_term = 0.0;
};

SeriesReport s_series(const std::function<double(long long)>& b, const std::function<double(long long)>& d,
                      long long K_max, long long z = 0);
SeriesReport s_series(const BDSpec& spec, long long K_max, long long z = 0);

const char* to_string(SeriesVerdict v);

}  // namespace qsdlab
