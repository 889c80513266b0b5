#include "qsdlab/semigroup.hpp"

#include <cmath>

namespace qsdlab {

namespace {

constexpr double kPoissonTail = 1e-14;
constexpr double kMaxChunkRho = 30.0;  // keeps e^{-rho} representable and series short

// exp(h L) by the Poisson series over K, rho = Lambda*h <= kMaxChunkRho.
Matrix chunk_matrix(const AbsorbedGenerator& gen, double rho) {
    const int n = gen.size();
    const Matrix& K = gen.uniformized();
    double w = std::exp(-rho);
    double cum = w;
    Matrix term = Matrix::Identity(n, n);
    Matrix acc = w * term;
    int k = 0;
    while (cum < 1.0 - kPoissonTail) {
        ++k;
        term = term * K;
        w *= rho / k;
        acc += w * term;
        cum += w;
        if (k > 10000) break;  // unreachable for rho <= 30
    }
    return acc;
}

// v <- v * exp(h L) (measure convention) or exp(h L) * v (function convention).
Vector chunk_apply(const AbsorbedGenerator& gen, const Vector& v, double rho, bool measure) {
    const Matrix& K = gen.uniformized();
    double w = std::exp(-rho);
    double cum = w;
    Vector term = v;
    Vector acc = w * term;
    int k = 0;
    while (cum < 1.0 - kPoissonTail) {
        ++k;
        term = measure ? Vector(K.transpose() * term) : Vector(K * term);
        w *= rho / k;
        acc += w * term;
        cum += w;
        if (k > 10000) break;
    }
    return acc;
}

int chunk_count(const AbsorbedGenerator& gen, double t) {
    double rho = gen.uniformization_rate() * t;
    return rho <= kMaxChunkRho ? 1 : static_cast<int>(std::ceil(rho / kMaxChunkRho));
}

Vector apply_semigroup(const AbsorbedGenerator& gen, Vector v, double t, bool measure) {
    if (t == 0.0 || gen.uniformization_rate() == 0.0) return v;
    int m = chunk_count(gen, t);
    double rho = gen.uniformization_rate() * (t / m);
    for (int i = 0; i < m; ++i) v = chunk_apply(gen, v, rho, measure);
    return v;
}

ScaledVector apply_semigroup_scaled(const AbsorbedGenerator& gen, Vector v, double t, bool measure) {
    ScaledVector out;
    if (t == 0.0 || gen.uniformization_rate() == 0.0) {
        out.w = std::move(v);
        return out;
    }
    int m = chunk_count(gen, t);
    double rho = gen.uniformization_rate() * (t / m);
    for (int i = 0; i < m; ++i) {
        v = chunk_apply(gen, v, rho, measure);
        double s = v.cwiseAbs().maxCoeff();
        if (s > 0.0 && std::isfinite(s)) {
            v /= s;
            out.logscale += std::log(s);
        }
    }
    out.w = std::move(v);
    return out;
}

}  // namespace

Matrix transition_matrix(const AbsorbedGenerator& gen, double t) {
    if (t < 0.0) throw std::invalid_argument("transition_matrix: t must be >= 0");
    const int n = gen.size();
    if (t == 0.0 || gen.uniformization_rate() == 0.0) return Matrix::Identity(n, n);
    int m = chunk_count(gen, t);
    double rho = gen.uniformization_rate() * (t / m);
    Matrix Ph = chunk_matrix(gen, rho);
    // binary exponentiation of the chunk
    Matrix result = Matrix::Identity(n, n);
    Matrix base = std::move(Ph);
    int e = m;
    while (e > 0) {
        if (e & 1) result = result * base;
        e >>= 1;
        if (e) base = base * base;
    }
    return result;
}

Vector propagate_measure(const AbsorbedGenerator& gen, const Vector& mu, double t) {
    if (t < 0.0) throw std::invalid_argument("propagate_measure: t must be >= 0");
    return apply_semigroup(gen, mu, t, /*measure=*/true);
}

Vector propagate_function(const AbsorbedGenerator& gen, const Vector& f, double t) {
    if (t < 0.0) throw std::invalid_argument("propagate_function: t must be >= 0");
    return apply_semigroup(gen, f, t, /*measure=*/false);
}

ScaledVector propagate_function_scaled(const AbsorbedGenerator& gen, const Vector& f, double t) {
    if (t < 0.0) throw std::invalid_argument("propagate_function_scaled: t must be >= 0");
    return apply_semigroup_scaled(gen, f, t, /*measure=*/false);
}

ScaledVector propagate_measure_scaled(const AbsorbedGenerator& gen, const Vector& mu, double t) {
    if (t < 0.0) throw std::invalid_argument("propagate_measure_scaled: t must be >= 0");
    return apply_semigroup_scaled(gen, mu, t, /*measure=*/true);
}

double survival_probability(const AbsorbedGenerator& gen, const Distribution& mu, double t) {
    if (t < 0.0) throw std::invalid_argument("survival_probability: t must be >= 0");
    if (!mu.normalized()) throw std::invalid_argument("survival_probability: mu must be normalized");
    if (mu.size() != gen.size()) throw std::invalid_argument("survival_probability: size mismatch");
    return propagate_measure(gen, mu.weights(), t).sum();
}

Distribution condition(const AbsorbedGenerator& gen, const Distribution& mu, double t) {
    if (t < 0.0) throw std::invalid_argument("condition: t must be >= 0");
    if (!mu.normalized()) throw std::invalid_argument("condition: mu must be normalized");
    if (mu.size() != gen.size()) throw std::invalid_argument("condition: size mismatch");
    if (t == 0.0) return mu;

    Vector v = mu.weights();
    // Probe the decay rate so renormalized steps keep the per-step survival
    // well above the underflow floor.
    double lambda0_est;
    {
        double h0 = std::min(t, 1.0);
        double s = apply_semigroup(gen, v, h0, true).sum();
        if (s <= 0.0) throw Error("horizon too deep: renormalize stepwise");
        lambda0_est = std::max(-std::log(s) / h0, 1e-12);
    }
    double step = 5.0 / lambda0_est;
    double remaining = t;
    while (remaining > 0.0) {
        double h = std::min(step, remaining);
        v = apply_semigroup(gen, v, h, true);
        double s = v.sum();
        if (s <= kSurvivalUnderflowFloor) throw Error("horizon too deep: renormalize stepwise");
        v /= s;
        remaining -= h;
    }
    return Distribution(std::move(v));
}

Distribution conditional_semigroup_apply(const AbsorbedGenerator& gen, const Distribution& mu,
                                         double s, double t, double T) {
    if (!(0.0 <= s && s <= t && t <= T))
        throw std::invalid_argument("conditional_semigroup_apply: need 0 <= s <= t <= T");
    if (!mu.normalized()) throw std::invalid_argument("conditional_semigroup_apply: mu must be normalized");
    // mu R^T_{s,t}(dy) = int mu(dx) p(x;t-s,dy) P_y(T-t<abs) / P_x(T-s<abs):
    // a space-time Doob transform, so the scale factors of the survival
    // vectors cancel after normalization.
    ScaledVector g_s = propagate_function_scaled(gen, Vector::Ones(gen.size()), T - s);
    ScaledVector g_t = propagate_function_scaled(gen, Vector::Ones(gen.size()), T - t);
    if (!(g_s.w.minCoeff() > 0.0)) throw Error("horizon too deep: renormalize stepwise");
    Vector z = mu.weights().cwiseQuotient(g_s.w);
    double zmass = z.sum();
    if (!(zmass > 0.0)) throw Error("horizon too deep: renormalize stepwise");
    z /= zmass;
    Vector w = propagate_measure(gen, z, t - s).cwiseProduct(g_t.w);
    double mass = w.sum();
    if (!(mass > 0.0)) throw Error("horizon too deep: renormalize stepwise");
    w /= mass;
    return Distribution(std::move(w));
}

SurvivalCurve survival_curve(const AbsorbedGenerator& gen, const Distribution& mu,
                             const std::vector<double>& t_grid) {
    SurvivalCurve curve;
    curve.times = t_grid;
    curve.values.reserve(t_grid.size());
    double prev_t = 0.0;
    Vector v = mu.weights();
    for (double t : t_grid) {
        if (t < prev_t) throw std::invalid_argument("survival_curve: grid must be non-decreasing");
        v = apply_semigroup(gen, v, t - prev_t, true);
        prev_t = t;
        curve.values.push_back(v.sum());
    }
    return curve;
}

}  // namespace qsdlab
