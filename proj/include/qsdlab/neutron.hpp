#pragma once

#include <cstdint>
#include <optional>

#include "qsdlab/generator.hpp"
#include "qsdlab/geometry.hpp"
#include "qsdlab/rng.hpp"

namespace qsdlab {

/// 2-D transport process: straight flight at unit speed, direction resampled
/// uniformly on the unit circle at the events of a rate-lambda Poisson clock,
/// absorbed at the first boundary crossing.
struct NeutronSpec {
    Domain domain;
    double lambda_jump = 1.0;
};

void validate_spec(const NeutronSpec& spec);

struct PdmpState {
    Point x;
    Point u;  // unit direction
    bool alive = true;
};

/// Initial law: a Dirac point/direction or uniform position in the domain
/// with independent uniform direction.
struct InitLaw {
    enum Kind { DiracPoint, UniformDomain } kind = UniformDomain;
    Point x{0.0, 0.0};
    double angle = 0.0;

    static InitLaw dirac(const Point& x, double angle) { return InitLaw{DiracPoint, x, angle}; }
    static InitLaw uniform() { return InitLaw{UniformDomain, Point(0, 0), 0.0}; }
};

/// Piecewise-linear path record: positions and directions at t=0 and at each
/// direction jump, plus the absorption time (+infinity if still alive at the
/// horizon).
struct PathRecord {
    std::vector<double> times;    // 0 = start, then jump times
    std::vector<Point> positions; // position at each event
    std::vector<double> angles;   // direction angle from each event on
    double absorption_time = std::numeric_limits<double>::infinity();
    double horizon = 0.0;

    bool alive_at(double t) const { return t < absorption_time; }
    PdmpState state_at(double t) const;  // requires t <= horizon and alive_at(t)
};

PathRecord simulate_path(const NeutronSpec& spec, const Point& x0, double angle0, double horizon,
                         CounterStream& rng);

struct MonteCarloOptions {
    long long particles = 100000;
    uint64_t seed = 0;
    int threads = 1;
};

/// Monte Carlo survival estimates with binomial 95% confidence bands.
/// Per-particle counter streams keyed by (seed, particle index) make the
/// result independent of thread count.
SurvivalCurve estimate_survival_curve(const NeutronSpec& spec, const InitLaw& init,
                                      const std::vector<double>& t_grid, const MonteCarloOptions& mc);

struct Lambda0Estimate {
    double rate = 0.0;
    double stderr_ = 0.0;
    std::array<double, 3> window_sensitivity{};  // estimates on shifted windows
};

/// Least-squares slope of log-survival on [t_a, t_b]. Requires >= 4 grid
/// points in the window and, for Monte Carlo curves, >= 50 survivors at t_b.
Lambda0Estimate estimate_lambda0(const SurvivalCurve& curve, double t_a, double t_b);

enum class QsdMode { Naive, FlemingViot };

/// Histogram over spatial bins (bounding box of the domain) times direction
/// arcs, normalized to mass 1.
struct QsdEstimate {
    int spatial_bins = 0;
    int direction_bins = 0;
    double box_lo_x = 0, box_lo_y = 0, box_hi_x = 0, box_hi_y = 0;
    std::vector<double> mass;      // size ns*ns*nd, cell (i,j,k) at ((i*ns)+j)*nd+k
    double effective_sample_size = 0.0;
    long long survivors = 0;       // naive mode: raw survivor count
};

QsdEstimate estimate_qsd(const NeutronSpec& spec, const InitLaw& init, double t_star, QsdMode mode,
                         int spatial_bins, int direction_bins, const MonteCarloOptions& mc);

/// One cell of the free-space density lower-bound verification table.
struct BoundCell {
    int ix, iy, iarc;
    double empirical;
    double sigma;     // binomial standard deviation of `empirical`
    double rhs;       // cell-integrated lower bound
    double margin;    // empirical + 3 sigma - rhs
    bool pass;
};

struct BoundTable {
    std::vector<BoundCell> cells;
    double pass_fraction = 0.0;
    double t = 0.0;
    double lambda = 0.0;
};

/// Verifies, cell by cell, that the empirical law of (X_t, V_t) started from
/// (x, u0) dominates the explicit free-space lower-bound density
///   lambda^2 e^{-lambda t}/(4 pi t) * (t-r)^2/(t+r) on r = |z-x| < t,
/// integrated over each spatial cell (32x32 midpoint quadrature) times the
/// direction-arc measure. Requires d(x, boundary) > t.
BoundTable verify_transport_density_bound(const NeutronSpec& spec, const Point& x, double t,
                                          int spatial_cells, int direction_arcs,
                                          const MonteCarloOptions& mc);

/// Geometric mixing parameters for a disk: for any x within eps of the
/// boundary, the cone of directions within theta of the inward normal reaches
/// the concentric eps-interior disk during [s_eps, t_eps].
struct AssumptionBParams {
    double epsilon = 0.0;
    double s_eps = 0.0;
    double t_eps = 0.0;
    double sigma_lower = 0.0;  // direction measure of the cone
    double cone_half_angle = 0.0;
};

AssumptionBParams disk_assumption_b_params(double radius, double epsilon);

}  // namespace qsdlab
