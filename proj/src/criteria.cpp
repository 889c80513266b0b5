#include "qsdlab/criteria.hpp"

#include <cmath>
#include <limits>

namespace qsdlab {

Vector infimum_measure(const std::vector<Vector>& rows) {
    if (rows.empty()) throw std::invalid_argument("infimum_measure: empty family");
    Vector m = rows.front();
    for (const Vector& r : rows) {
        if (r.size() != m.size()) throw std::invalid_argument("infimum_measure: length mismatch");
        if (r.minCoeff() < 0.0) throw std::invalid_argument("infimum_measure: negative entry");
        m = m.cwiseMin(r);
    }
    return m;
}

A1Result certify_a1(const AbsorbedGenerator& gen, double t0) {
    if (!(t0 > 0.0)) throw std::invalid_argument("certify_a1: t0 must be > 0");
    Matrix P = transition_matrix(gen, t0);
    const int n = gen.size();
    std::vector<Vector> rows;
    rows.reserve(n);
    for (int x = 0; x < n; ++x) {
        double s = P.row(x).sum();
        if (!(s > kSurvivalUnderflowFloor))
            throw std::invalid_argument("certify_a1: survival from state " + std::to_string(x) +
                                        " underflows at t0");
        rows.push_back(Vector(P.row(x).transpose() / s));
    }
    Vector nu_raw = infimum_measure(rows);
    double c1 = nu_raw.sum();
    if (!(c1 > 0.0)) throw Error("(A1) fails at this t0: try larger t0 or report failure");
    return A1Result{Distribution(nu_raw / c1), c1, t0};
}

namespace {

// Shared sweep: inf over the grid of (numerator . w_t) / max w_t where
// w_t = P_t 1, propagated in scaled form. Checks the uniform eta-convergence
// precondition at t_max.
A2Result ratio_sweep(const AbsorbedGenerator& gen, const Vector& numerator, const SpectralTriple& triple,
                     double t_max, double grid_step, double asymptote, bool record_curve) {
    if (!(grid_step > 0.0) || !(t_max > 0.0))
        throw std::invalid_argument("certify_a2: need positive t_max and grid_step");
    A2Result out;
    out.c2 = std::numeric_limits<double>::infinity();
    ScaledVector sv{Vector::Ones(gen.size()), 0.0};
    double t = 0.0;
    const long long steps = static_cast<long long>(std::ceil(t_max / grid_step - 1e-9));
    for (long long i = 0; i <= steps; ++i) {
        if (i > 0) {
            double next = std::min(t_max, static_cast<double>(i) * grid_step);
            ScaledVector step = propagate_function_scaled(gen, sv.w, next - t);
            sv.w = step.w;
            sv.logscale += step.logscale;
            t = next;
        }
        double ratio = numerator.dot(sv.w) / sv.w.maxCoeff();
        if (record_curve) {
            out.curve_t.push_back(t);
            out.curve_ratio.push_back(ratio);
        }
        if (ratio < out.c2) {
            out.c2 = ratio;
            out.argmin_t = t;
        }
    }
    // precondition: uniform closeness of e^{lambda0 t_max} P_x(t_max<abs) to eta
    double factor = std::exp(triple.lambda0 * t_max + sv.logscale);
    double sup_err = (factor * sv.w - triple.eta).cwiseAbs().maxCoeff();
    if (sup_err > 0.01 * triple.eta.minCoeff()) throw Error("extend t_max");
    if (asymptote < out.c2) {
        out.c2 = asymptote;
        out.argmin_t = std::numeric_limits<double>::infinity();
    }
    return out;
}

}  // namespace

A2Result certify_a2(const AbsorbedGenerator& gen, const Distribution& nu, const SpectralTriple& triple,
                    double t_max, double grid_step) {
    double asymptote = nu.weights().dot(triple.eta) / triple.eta.maxCoeff();
    return ratio_sweep(gen, nu.weights(), triple, t_max, grid_step, asymptote, /*record_curve=*/true);
}

double c2_of_mu(const AbsorbedGenerator& gen, const Distribution& mu, const SpectralTriple& triple,
                double t_max, double grid_step) {
    double asymptote = mu.weights().dot(triple.eta) / triple.eta.maxCoeff();
    return ratio_sweep(gen, mu.weights(), triple, t_max, grid_step, asymptote, /*record_curve=*/false).c2;
}

double explicit_bound(const CriteriaCertificate& cert, double t) {
    if (t < 0.0) throw std::invalid_argument("explicit_bound: t must be >= 0");
    double f = std::floor(t / cert.t0);
    return 2.0 * std::pow(1.0 - cert.c1 * cert.c2, f);
}

double c2_alpha_lower_bound(double C, double gamma, double lambda0) {
    if (!(C > 0.0) || !(gamma > 0.0) || !(lambda0 > 0.0))
        throw std::invalid_argument("c2_alpha_lower_bound: C, gamma, lambda0 must be > 0");
    auto g = [&](double s) {
        double denom = -std::expm1(-gamma * s);  // 1 - e^{-gamma s}, accurate for small s
        return -lambda0 * s - C * std::exp((lambda0 - gamma) * s) / denom;
    };
    // coarse log-spaced scan to bracket the maximum
    const int scan = 600;
    double lo = std::log(1e-9), hi = std::log(1e9);
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    std::vector<double> ss(scan);
    for (int i = 0; i < scan; ++i) {
        ss[i] = std::exp(lo + (hi - lo) * i / (scan - 1));
        double v = g(ss[i]);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    double a = ss[std::max(0, best - 1)], b = ss[std::min(scan - 1, best + 1)];
    // golden section on [a, b]
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = g(x1), f2 = g(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-14 * b; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = g(x1);
        }
    }
    return std::exp(std::max(f1, f2));
}

CriteriaCertificate certify_at(const AbsorbedGenerator& gen, const SpectralTriple& triple, double t0,
                               const CertifyOptions& opts) {
    A1Result a1 = certify_a1(gen, t0);
    double grid_step = opts.grid_step > 0.0 ? opts.grid_step : t0 / 4.0;
    if (grid_step > t0 / 4.0 + 1e-12) throw std::invalid_argument("certify_at: grid_step must be <= t0/4");
    double t_max = opts.t_max > 0.0 ? opts.t_max : 12.0 / triple.lambda0;
    A2Result a2;
    int doublings = 0;
    for (;;) {
        try {
            a2 = certify_a2(gen, a1.nu, triple, t_max, grid_step);
            break;
        } catch (const Error&) {
            if (++doublings > opts.max_t_max_doublings) throw;
            t_max *= 2.0;
        }
    }
    CriteriaCertificate cert;
    cert.t0 = t0;
    cert.nu = a1.nu;
    cert.c1 = a1.c1;
    cert.c2 = a2.c2;
    cert.c2_argmin_t = a2.argmin_t;
    cert.c2_alpha = c2_of_mu(gen, triple.alpha, triple, t_max, grid_step);
    cert.gamma_bound = -std::log(1.0 - cert.c1 * cert.c2) / t0;
    cert.C_bound = 2.0;
    return cert;
}

CriteriaCertificate certify(const AbsorbedGenerator& gen, const SpectralTriple& triple,
                            const CertifyOptions& opts) {
    std::optional<CriteriaCertificate> best;
    std::string last_error = "(A1) fails at this t0: try larger t0 or report failure";
    for (double m : opts.t0_multipliers) {
        double t0 = m / triple.lambda0;
        try {
            CriteriaCertificate cert = certify_at(gen, triple, t0, opts);
            if (!best || cert.c1 * cert.c2 > best->c1 * best->c2) best = std::move(cert);
        } catch (const Error& e) {
            last_error = e.what();
        }
    }
    if (!best) throw Error(last_error);
    return *best;
}

namespace {

constexpr double kDivergenceIncrement = 1e-8;
constexpr int kDivergenceRun = 200;

}  // namespace

SeriesReport s_series(const std::function<double(long long)>& b, const std::function<double(long long)>& d,
                      long long K_max, long long z) {
    if (K_max < 10) throw std::invalid_argument("s_series: K_max must be >= 10");
    if (z < 0) throw std::invalid_argument("s_series: z must be >= 0");
    // R_k = sum_{l >= k} alpha_l / alpha_k satisfies R_k = 1 + rho_k R_{k+1}
    // with rho_k = b_k / d_{k+1}; then term_k = R_k / d_k. The backward
    // recurrence works entirely in bounded ratios.
    const long long L = 2 * K_max;  // internal horizon for the recurrence and tail estimate
    std::vector<double> rho(static_cast<size_t>(L) + 2, 0.0);
    std::vector<double> dk(static_cast<size_t>(L) + 2, 0.0);
    for (long long k = z + 1; k <= L + 1; ++k) {
        double bk = b(k), dkk = d(k);
        if (std::isnan(bk) || std::isnan(dkk)) throw std::invalid_argument("s_series: NaN rate");
        if (!(bk > 0.0) || !(dkk > 0.0))
            throw std::invalid_argument("s_series: rates must be positive at k=" + std::to_string(k));
        dk[static_cast<size_t>(k)] = dkk;
        rho[static_cast<size_t>(k)] = bk / d(k + 1);
    }
    // geometric closure of the recurrence seed when the far tail contracts
    double rho_far = 0.0;
    for (long long k = L - std::max<long long>(10, L / 20); k <= L; ++k)
        rho_far = std::max(rho_far, rho[static_cast<size_t>(k)]);
    double seedR = rho_far < 1.0 ? 1.0 / (1.0 - rho_far) : 1e6;

    std::vector<double> term(static_cast<size_t>(L) + 2, 0.0);
    double R = seedR;
    for (long long k = L; k >= z + 1; --k) {
        R = 1.0 + rho[static_cast<size_t>(k)] * R;
        if (R > 1e300) R = 1e300;
        term[static_cast<size_t>(k)] = R / dk[static_cast<size_t>(k)];
    }

    SeriesReport rep;
    rep.first_k = z + 1;
    rep.partial_sums.reserve(static_cast<size_t>(K_max - z));
    double S = 0.0;
    for (long long k = z + 1; k <= K_max; ++k) {
        S += term[static_cast<size_t>(k)];
        rep.partial_sums.push_back(S);
    }
    rep.last_term = term[static_cast<size_t>(K_max)];

    // extended sum to the internal horizon for the tail estimate
    double S_ext = S;
    for (long long k = K_max + 1; k <= L; ++k) S_ext += term[static_cast<size_t>(k)];

    // verdict: certified geometric tail first, then persistent increments
    long long w_lo = L - std::max<long long>(10, L / 20);
    double q_max = 0.0;
    bool decreasing = true;
    for (long long k = w_lo; k < L; ++k) {
        double q = term[static_cast<size_t>(k + 1)] / term[static_cast<size_t>(k)];
        q_max = std::max(q_max, q);
        if (q > 1.0 + 1e-12) decreasing = false;
    }
    if (decreasing && q_max < 1.0) {
        double tail = (S_ext - S) + term[static_cast<size_t>(L)] * q_max / (1.0 - q_max);
        if (tail <= 0.01 * std::max(S_ext, 1e-300)) {
            rep.verdict = SeriesVerdict::Converged;
            rep.tail_bound = tail;
            return rep;
        }
    }
    bool persistent = K_max - z >= kDivergenceRun;
    for (long long k = K_max - kDivergenceRun + 1; persistent && k <= K_max; ++k)
        if (!(term[static_cast<size_t>(k)] > kDivergenceIncrement)) persistent = false;
    rep.verdict = persistent ? SeriesVerdict::Diverging : SeriesVerdict::Inconclusive;
    return rep;
}

SeriesReport s_series(const BDSpec& spec, long long K_max, long long z) {
    return s_series([&](long long k) { return spec.b(k); }, [&](long long k) { return spec.d(k); }, K_max, z);
}

const char* to_string(SeriesVerdict v) {
    switch (v) {
        case SeriesVerdict::Converged: return "converged";
        case SeriesVerdict::Diverging: return "diverging";
        case SeriesVerdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

}  // namespace qsdlab
