#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsdlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Error carrying a mathematical verdict (as opposed to a malformed input,
/// which is reported through std::invalid_argument).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Finite absorbed continuous-time Markov chain on E = {0,...,n-1} plus a
/// cemetery state. Off-diagonal rates live in `rates`, the per-state
/// absorption rate in `kill`, and the diagonal of the generator restricted
/// to E is -(row outflow + kill), so every row of the full generator on
/// E u {cemetery} sums to zero.
class AbsorbedGenerator {
public:
    AbsorbedGenerator(Matrix rates, Vector kill);

    int size() const { return n_; }
    const Matrix& rates() const { return rates_; }
    const Vector& kill() const { return kill_; }

    /// Generator restricted to E (diagonal included). The cemetery column is
    /// implicit: row sums equal -kill.
    const Matrix& restricted() const { return L_; }

    /// Uniformization rate: the largest total outflow (including kill).
    double uniformization_rate() const { return lambda_unif_; }

    /// I + L/Lambda, the sub-stochastic uniformized kernel (row sums 1 - kill/Lambda).
    const Matrix& uniformized() const { return K_; }

private:
    int n_;
    Matrix rates_;
    Vector kill_;
    Matrix L_;
    Matrix K_;
    double lambda_unif_;
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> problems;          // human-readable, with row indices
    std::vector<int> unreachable_to_cemetery;   // states that cannot reach the cemetery
};

/// Checks non-negativity of all rates and that the cemetery is reachable from
/// every state in the directed rate graph (so absorption is a.s. finite).
ValidationReport validate(const AbsorbedGenerator& gen);

/// Probability vector on E. `normalized` marks an actual probability measure
/// (mass 1 within 1e-12); unnormalized non-negative vectors are allowed as
/// plain measures.
class Distribution {
public:
    Distribution() : normalized_(false) {}
    explicit Distribution(Vector weights, bool normalized = true);

    static Distribution dirac(int n, int state);
    static Distribution uniform(int n);

    int size() const { return static_cast<int>(w_.size()); }
    const Vector& weights() const { return w_; }
    bool normalized() const { return normalized_; }

    double operator()(const Vector& f) const { return w_.dot(f); }

private:
    Vector w_;
    bool normalized_;
};

/// Total variation distance with the total-mass convention: the mass of
/// |mu1 - mu2|, so two mutually singular probability measures are at
/// distance 2. This matches the constant in the 2(1-c1c2)^floor(t/t0) bounds.
double tv_distance(const Vector& mu1, const Vector& mu2);
double tv_distance(const Distribution& mu1, const Distribution& mu2);

/// Monte Carlo or exact survival curve: t -> P(t < absorption).
struct SurvivalCurve {
    std::vector<double> times;
    std::vector<double> values;
    // Optional Monte Carlo annotations (empty for exact/synthetic curves).
    std::vector<long long> counts;
    std::vector<double> ci_lo, ci_hi;
    long long particles = 0;
    bool all_dead_warning = false;
};

}  // namespace qsdlab
