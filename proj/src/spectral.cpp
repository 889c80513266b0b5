#include "qsdlab/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace qsdlab {

namespace {

constexpr double kDegenerateRelGap = 1e-8;

// Extracts a real, entrywise-positive eigenvector from a complex column;
// throws if the restriction looks reducible (mixed signs or zeros).
Vector positive_real_eigenvector(const Eigen::VectorXcd& v, const char* which) {
    const int n = static_cast<int>(v.size());
    double imag_norm = 0.0, real_norm = 0.0;
    for (int i = 0; i < n; ++i) {
        imag_norm = std::max(imag_norm, std::abs(v[i].imag()));
        real_norm = std::max(real_norm, std::abs(v[i].real()));
    }
    if (real_norm == 0.0 || imag_norm > 1e-8 * real_norm)
        throw Error(std::string("criteria violated: QSD not unique at this truncation (complex ") +
                    which + " eigenvector)");
    Vector r(n);
    for (int i = 0; i < n; ++i) r[i] = v[i].real();
    if (r.maxCoeff() < 0.0) r = -r;
    if (r.minCoeff() < -1e-9 * r.maxCoeff())
        throw Error(std::string("criteria violated: QSD not unique at this truncation (sign-changing ") +
                    which + " eigenvector)");
    return r.cwiseMax(0.0);
}

struct DenseEigs {
    Eigen::VectorXcd values;
    double lambda0;
    Vector alpha_raw;
    Vector eta_raw;
    double gap;
};

DenseEigs dense_solve(const Matrix& L) {
    const int n = static_cast<int>(L.rows());
    Eigen::EigenSolver<Matrix> right(L);
    Eigen::EigenSolver<Matrix> left(Matrix(L.transpose()));
    if (right.info() != Eigen::Success || left.info() != Eigen::Success)
        throw Error("solve_spectral: dense eigensolver failed to converge");

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return right.eigenvalues()[a].real() > right.eigenvalues()[b].real();
    });
    int top = order[0];
    double re0 = right.eigenvalues()[top].real();
    if (n > 1) {
        double re1 = right.eigenvalues()[order[1]].real();
        if (re0 - re1 < kDegenerateRelGap * std::max(1.0, std::abs(re0)))
            throw Error("criteria violated: QSD not unique at this truncation (top eigenvalue degenerate)");
    }

    DenseEigs out;
    out.values = right.eigenvalues();
    out.lambda0 = -re0;
    out.eta_raw = positive_real_eigenvector(right.eigenvectors().col(top), "right");
    // match the left eigenvalue closest to re0
    int ltop = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        double d = std::abs(left.eigenvalues()[i] - std::complex<double>(re0, 0.0));
        if (d < best) {
            best = d;
            ltop = i;
        }
    }
    out.alpha_raw = positive_real_eigenvector(left.eigenvectors().col(ltop), "left");
    out.gap = n > 1 ? re0 - right.eigenvalues()[order[1]].real() : 0.0;
    return out;
}

// Shifted inverse iteration polishing an eigenvector pair until the
// scale-invariant residuals (alpha at mass 1, eta at sup norm 1) meet the
// tolerance or hit the floating-point floor.
void polish(const Matrix& L, double& lambda0, Vector& alpha, Vector& eta, double tol) {
    const int n = static_cast<int>(L.rows());
    alpha /= alpha.cwiseAbs().sum();
    eta /= eta.cwiseAbs().maxCoeff();
    for (int it = 0; it < 6; ++it) {
        double res_a = (alpha.transpose() * L + lambda0 * alpha.transpose()).cwiseAbs().sum();
        double res_e = (L * eta + lambda0 * eta).cwiseAbs().maxCoeff();
        if (res_a <= 0.5 * tol && res_e <= 0.5 * tol) break;
        Matrix shifted = L + lambda0 * Matrix::Identity(n, n);
        // tiny regularization keeps the factorization usable at the eigenvalue
        shifted.diagonal().array() += 1e-13 * std::max(1.0, std::abs(lambda0));
        Eigen::PartialPivLU<Matrix> lu(shifted);
        Vector e2 = lu.solve(eta);
        Eigen::PartialPivLU<Matrix> lut(Matrix(shifted.transpose()));
        Vector a2 = lut.solve(alpha);
        // orient by the dominant sign; entrywise signs can carry tail noise
        if (e2.allFinite() && e2.cwiseAbs().maxCoeff() > 0) {
            if (e2.sum() < 0) e2 = -e2;
            eta = e2 / e2.cwiseAbs().maxCoeff();
        }
        if (a2.allFinite() && a2.cwiseAbs().maxCoeff() > 0) {
            if (a2.sum() < 0) a2 = -a2;
            alpha = a2 / a2.cwiseAbs().sum();
        }
        // two-sided Rayleigh quotient
        double denom = alpha.dot(eta);
        if (std::abs(denom) > 0) lambda0 = -(alpha.transpose() * L * eta)(0) / denom;
    }
    // entries below the noise floor are zero in exact arithmetic
    double amax = alpha.cwiseAbs().maxCoeff(), emax = eta.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        if (std::abs(alpha[i]) < 1e-15 * amax) alpha[i] = 0.0;
        if (std::abs(eta[i]) < 1e-15 * emax) eta[i] = 0.0;
    }
}

struct IterativeEigs {
    double lambda0;
    Vector alpha_raw;
    Vector eta_raw;
    double gap;
};

// Shift-invert iteration on L. The eigenvalue of smallest magnitude is
// -lambda0 (all others satisfy |mu| >= |Re mu| >= lambda0 + gamma), so
// iterating L^{-1} converges geometrically at rate lambda0/(lambda0+gamma)
// regardless of the stiffness that cripples plain power iteration on the
// uniformized kernel. The gap is estimated from a deflated iteration.
IterativeEigs iterative_solve(const AbsorbedGenerator& gen, const SolveOptions& opts) {
    const Matrix& L = gen.restricted();
    const int n = gen.size();
    Eigen::PartialPivLU<Matrix> lu(L);
    Eigen::PartialPivLU<Matrix> lut(Matrix(L.transpose()));

    Vector e = Vector::Ones(n), a = Vector::Constant(n, 1.0 / n);
    int max_iters = std::min(opts.max_power_iters, 5000);
    for (int it = 0; it < max_iters; ++it) {
        Vector e2 = lu.solve(e);
        Vector a2 = lut.solve(a);
        if (e2.sum() < 0) e2 = -e2;
        if (a2.sum() < 0) a2 = -a2;
        e2 /= e2.cwiseAbs().maxCoeff();
        a2 /= a2.cwiseAbs().sum();
        double delta = (e2 - e).cwiseAbs().maxCoeff() + (a2 - a).cwiseAbs().sum();
        e = std::move(e2);
        a = std::move(a2);
        if (delta < 1e-15 && it > 3) break;
    }
    IterativeEigs out;
    out.lambda0 = -(a.transpose() * L * e)(0) / a.dot(e);
    out.alpha_raw = a.cwiseMax(0.0);
    out.eta_raw = e.cwiseMax(0.0);
    // second-smallest magnitude via deflation against the converged pair
    double ae = a.dot(e);
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = (i % 2 == 0) ? 1.0 : -1.0;
    double inv_mu2 = 0.0;
    for (int it = 0; it < 200; ++it) {
        v -= e * (a.dot(v) / ae);
        Vector v2 = lu.solve(v);
        v2 -= e * (a.dot(v2) / ae);
        inv_mu2 = v.dot(v2) / v.dot(v);
        double nrm = v2.cwiseAbs().maxCoeff();
        if (nrm == 0.0) break;
        v = v2 / nrm;
    }
    // |mu2| approximates the modulus of the next eigenvalue; for a real
    // subdominant eigenvalue this recovers lambda0 + gamma exactly
    out.gap = std::abs(inv_mu2) > 0 ? 1.0 / std::abs(inv_mu2) - out.lambda0 : 0.0;
    return out;
}

}  // namespace

SpectralTriple solve_spectral(const AbsorbedGenerator& gen, const SolveOptions& opts) {
    const Matrix& L = gen.restricted();
    const int n = gen.size();
    double lambda0;
    Vector alpha_raw, eta_raw;
    double gap;
    if (n <= opts.dense_threshold) {
        DenseEigs d = dense_solve(L);
        lambda0 = d.lambda0;
        alpha_raw = d.alpha_raw;
        eta_raw = d.eta_raw;
        gap = d.gap;
        polish(L, lambda0, alpha_raw, eta_raw, opts.tol);
    } else {
        IterativeEigs p = iterative_solve(gen, opts);
        lambda0 = p.lambda0;
        alpha_raw = p.alpha_raw;
        eta_raw = p.eta_raw;
        gap = p.gap;
        polish(L, lambda0, alpha_raw, eta_raw, opts.tol);
        alpha_raw = alpha_raw.cwiseMax(0.0);
        eta_raw = eta_raw.cwiseMax(0.0);
    }
    if (alpha_raw.minCoeff() < 0 || eta_raw.minCoeff() < 0)
        throw Error("criteria violated: QSD not unique at this truncation (non-positive eigenvector)");
    alpha_raw /= alpha_raw.sum();
    double ae = alpha_raw.dot(eta_raw);
    if (!(ae > 0)) throw Error("solve_spectral: degenerate alpha(eta) normalization");
    eta_raw /= ae;

    SpectralTriple triple{lambda0, Distribution(alpha_raw), eta_raw, gap};
    // scale-invariant acceptance: alpha carries mass 1, eta is measured
    // relative to its sup norm
    double res_a = (alpha_raw.transpose() * L + lambda0 * alpha_raw.transpose()).cwiseAbs().sum();
    double res_e = (L * eta_raw + lambda0 * eta_raw).cwiseAbs().maxCoeff() / eta_raw.maxCoeff();
    if (res_a > opts.tol || res_e > opts.tol)
        throw Error("solve_spectral: eigen-residuals exceed tolerance");
    return triple;
}

std::vector<double> eta_limit_profile(const AbsorbedGenerator& gen, const SpectralTriple& triple,
                                      const std::vector<double>& t_grid) {
    std::vector<double> errors;
    errors.reserve(t_grid.size());
    double prev_t = 0.0;
    ScaledVector sv{Vector::Ones(gen.size()), 0.0};
    for (double t : t_grid) {
        if (t < prev_t) throw std::invalid_argument("eta_limit_profile: grid must be non-decreasing");
        ScaledVector step = propagate_function_scaled(gen, sv.w, t - prev_t);
        sv.w = step.w;
        sv.logscale += step.logscale;
        prev_t = t;
        double factor = std::exp(triple.lambda0 * t + sv.logscale);
        errors.push_back((factor * sv.w - triple.eta).cwiseAbs().maxCoeff());
    }
    return errors;
}

QProcess qprocess_generator(const AbsorbedGenerator& gen, const SpectralTriple& triple) {
    const Matrix& L = gen.restricted();
    const int n = gen.size();
    if (triple.eta.minCoeff() <= 0.0)
        throw std::invalid_argument("qprocess_generator: eta must be positive on E");
    Matrix Lt(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Lt(i, j) = (i == j) ? triple.lambda0 + L(i, i)
                                : L(i, j) * triple.eta[j] / triple.eta[i];
        }
    }
    Vector beta = triple.alpha.weights().cwiseProduct(triple.eta);
    beta /= beta.sum();
    return QProcess{std::move(Lt), Distribution(std::move(beta))};
}

Matrix qprocess_transition(const AbsorbedGenerator& gen, const SpectralTriple& triple, double t) {
    if (t < 0.0) throw std::invalid_argument("qprocess_transition: t must be >= 0");
    Matrix P = transition_matrix(gen, t);
    const int n = gen.size();
    double scale = std::exp(triple.lambda0 * t);
    Matrix Pt(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            Pt(i, j) = scale * triple.eta[j] / triple.eta[i] * P(i, j);
    return Pt;
}

SpectrumReport spectrum_report(const AbsorbedGenerator& gen, const SpectralTriple& triple,
                               double gamma_bound, double tol) {
    Eigen::EigenSolver<Matrix> solver(gen.restricted());
    if (solver.info() != Eigen::Success) throw Error("spectrum_report: eigensolver failed");
    const int n = gen.size();
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return solver.eigenvalues()[a].real() > solver.eigenvalues()[b].real();
    });
    SpectrumReport rep;
    rep.lambda0 = triple.lambda0;
    rep.gamma_bound = gamma_bound;
    for (int idx = 0; idx < n; ++idx) {
        std::complex<double> ev = solver.eigenvalues()[order[idx]];
        SpectrumEntry entry;
        entry.value = ev;
        entry.complex_pair = std::abs(ev.imag()) > 1e-10 * std::max(1.0, std::abs(ev.real()));
        if (idx == 0) {
            entry.cls = EigenvalueClass::Top;
        } else if (ev.real() <= -triple.lambda0 - gamma_bound + tol) {
            entry.cls = EigenvalueClass::BelowBound;
        } else {
            entry.cls = EigenvalueClass::ViolatesBound;
            ++rep.violations;
        }
        rep.eigenvalues.push_back(entry);
    }
    return rep;
}

}  // namespace qsdlab
