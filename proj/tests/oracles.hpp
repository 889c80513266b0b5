#pragma once

// Test-only reference computations, deliberately implemented along different
// algorithmic routes than the library: scaling-and-squaring for the matrix
// exponential (the library uses uniformization) and log-sum-exp accumulation
// for the extinction-time series (the library uses a ratio recurrence).

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;

/// Dense expm via Pade(13) scaling and squaring.
inline Matrix expm(const Matrix& A) {
    static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
    const int n = static_cast<int>(A.rows());
    double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    Matrix As = A;
    if (norm > 5.371920351148152) {
        squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 5.371920351148152))));
        As = A / std::pow(2.0, squarings);
    }
    Matrix I = Matrix::Identity(n, n);
    Matrix A2 = As * As, A4 = A2 * A2, A6 = A2 * A4;
    Matrix U = As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
    Matrix V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
    Matrix R = (V - U).partialPivLu().solve(V + U);
    for (int s = 0; s < squarings; ++s) R = R * R;
    return R;
}

/// Partial sums of sum_{k>z} (1/(d_k a_k)) sum_{l>=k} a_l with
/// a_k = prod b_i / prod d_i, all products and inner tails accumulated in
/// log space (log-sum-exp), truncating the inner tail at l = L_max.
inline std::vector<double> s_series_logspace(const std::function<double(long long)>& b,
                                             const std::function<double(long long)>& d,
                                             long long K_max, long long L_max, long long z = 0) {
    std::vector<double> log_alpha(static_cast<size_t>(L_max) + 1, 0.0);
    double acc = 0.0;
    for (long long k = 1; k <= L_max; ++k) {
        acc += (k > 1 ? std::log(b(k - 1)) : 0.0) - std::log(d(k));
        log_alpha[static_cast<size_t>(k)] = acc;
    }
    // backward log-sum-exp of the inner tails
    std::vector<double> log_tail(static_cast<size_t>(L_max) + 2, -std::numeric_limits<double>::infinity());
    for (long long k = L_max; k >= 1; --k) {
        double a = log_alpha[static_cast<size_t>(k)];
        double t = log_tail[static_cast<size_t>(k) + 1];
        double m = std::max(a, t);
        log_tail[static_cast<size_t>(k)] = m + std::log(std::exp(a - m) + std::exp(t - m));
    }
    std::vector<double> partial;
    partial.reserve(static_cast<size_t>(K_max - z));
    double S = 0.0;
    for (long long k = z + 1; k <= K_max; ++k) {
        double log_term = log_tail[static_cast<size_t>(k)] - std::log(d(k)) - log_alpha[static_cast<size_t>(k)];
        S += std::exp(log_term);
        partial.push_back(S);
    }
    return partial;
}

}  // namespace oracle
