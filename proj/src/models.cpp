#include "qsdlab/models.hpp"

#include <cmath>

namespace qsdlab {

double RateSequence::operator()(long long k) const {
    if (const double* c = std::get_if<double>(&repr_)) return *c;
    if (const Expr* e = std::get_if<Expr>(&repr_)) return e->eval(static_cast<double>(k));
    const auto& tab = std::get<std::vector<double>>(repr_);
    if (k < 1 || static_cast<size_t>(k) > tab.size())
        throw std::invalid_argument("RateSequence table: index " + std::to_string(k) + " out of range");
    return tab[static_cast<size_t>(k - 1)];
}

AbsorbedGenerator build_bd(const BDSpec& spec) {
    const int N = spec.N;
    if (N < 1) throw std::invalid_argument("build_bd: need N >= 1");
    Matrix rates = Matrix::Zero(N, N);
    Vector kill = Vector::Zero(N);
    for (int i = 0; i < N; ++i) {
        long long k = i + 1;
        double bk = spec.b(k), dk = spec.d(k), ak = spec.a(k);
        if (!(bk > 0.0) || !(dk > 0.0))
            throw std::invalid_argument("build_bd: birth/death rates must be positive at k=" + std::to_string(k));
        if (!(ak >= 0.0) || !std::isfinite(ak))
            throw std::invalid_argument("build_bd: catastrophe rate must be finite and >= 0 at k=" + std::to_string(k));
        if (k < N) rates(i, i + 1) = bk;  // up-jump at the cap is dropped
        if (k > 1) rates(i, i - 1) = dk;
        kill[i] = ak + (k == 1 ? dk : 0.0);
    }
    return AbsorbedGenerator(std::move(rates), std::move(kill));
}

namespace {

long long checked_state_count(int d, int cap, long long budget, long long lattice_minus) {
    long long count = 1;
    for (int i = 0; i < d; ++i) {
        count *= (cap + 1);
        if (count - lattice_minus > budget)
            throw std::invalid_argument("multibd: state space exceeds budget (" + std::to_string(budget) +
                                        " states); required budget >= " + std::to_string(count - lattice_minus));
    }
    return count - lattice_minus;
}

}  // namespace

MultiBDGenerator build_multibd_mutation(const MultiBDSpec& spec) {
    if (spec.mode != MultiBDMode::Mutation)
        throw std::invalid_argument("build_multibd_mutation: spec.mode must be Mutation");
    const int d = spec.d, cap = spec.cap;
    if (d < 1 || cap < 1) throw std::invalid_argument("build_multibd_mutation: need d >= 1, cap >= 1");
    if (spec.lambda_matrix.rows() != d || spec.lambda_matrix.cols() != d || spec.mu.size() != d ||
        spec.c.rows() != d || spec.c.cols() != d)
        throw std::invalid_argument("build_multibd_mutation: dimension mismatch");
    if (spec.lambda_matrix.minCoeff() <= 0.0 || spec.mu.minCoeff() <= 0.0 || spec.c.minCoeff() <= 0.0)
        throw std::invalid_argument("build_multibd_mutation: mutation mode requires lambda, mu, c > 0");

    // live states: the lattice [0,cap]^d minus the origin, lexicographic
    const long long n = checked_state_count(d, cap, spec.state_budget, 1);
    const int nn = static_cast<int>(n);
    std::vector<std::vector<int>> states(nn);
    std::vector<long long> strides(d);
    strides[d - 1] = 1;
    for (int i = d - 2; i >= 0; --i) strides[i] = strides[i + 1] * (cap + 1);
    auto rank_of = [&](const std::vector<int>& x) {
        long long r = 0;
        for (int i = 0; i < d; ++i) r += x[i] * strides[i];
        return r;
    };
    {
        std::vector<int> x(d, 0);
        for (long long rank = 1; rank <= n; ++rank) {
            // decode lattice rank
            long long r = rank;
            for (int i = 0; i < d; ++i) {
                x[i] = static_cast<int>(r / strides[i]);
                r %= strides[i];
            }
            states[rank - 1] = x;
        }
    }

    Matrix rates = Matrix::Zero(nn, nn);
    Vector kill = Vector::Zero(nn);
    for (int sid = 0; sid < nn; ++sid) {
        const auto& x = states[sid];
        for (int i = 0; i < d; ++i) {
            double birth = 0.0;
            for (int j = 0; j < d; ++j) birth += spec.lambda_matrix(j, i) * x[j];
            if (birth > 0.0 && x[i] < cap) {
                std::vector<int> y = x;
                ++y[i];
                rates(sid, rank_of(y) - 1) += birth;
            }
            if (x[i] > 0) {
                double death = spec.mu[i] * x[i];
                for (int j = 0; j < d; ++j) death += spec.c(i, j) * static_cast<double>(x[i]) * x[j];
                std::vector<int> y = x;
                --y[i];
                long long yr = rank_of(y);
                if (yr == 0) kill[sid] += death;  // total extinction
                else rates(sid, yr - 1) += death;
            }
        }
    }
    return MultiBDGenerator{AbsorbedGenerator(std::move(rates), std::move(kill)), std::move(states)};
}

MultiBDGenerator build_multibd_cooperative(const MultiBDSpec& spec) {
    if (spec.mode != MultiBDMode::Cooperative)
        throw std::invalid_argument("build_multibd_cooperative: spec.mode must be Cooperative");
    const int d = spec.d, cap = spec.cap;
    if (d < 1 || cap < 1) throw std::invalid_argument("build_multibd_cooperative: need d >= 1, cap >= 1");
    if (spec.lambda_vec.size() != d || spec.mu.size() != d || spec.c.rows() != d || spec.c.cols() != d)
        throw std::invalid_argument("build_multibd_cooperative: dimension mismatch");
    for (int i = 0; i < d; ++i) {
        if (!(spec.c(i, i) > 0.0))
            throw std::invalid_argument("build_multibd_cooperative: intra-type competition c_ii must be > 0");
        for (int j = 0; j < d; ++j)
            if (i != j && !(spec.c(i, j) >= 0.0))
                throw std::invalid_argument("build_multibd_cooperative: cooperation rates must be >= 0");
    }

    // live states: the box [1,cap]^d, lexicographic
    long long n = 1;
    for (int i = 0; i < d; ++i) {
        n *= cap;
        if (n > spec.state_budget)
            throw std::invalid_argument("multibd: state space exceeds budget (" + std::to_string(spec.state_budget) +
                                        " states); required budget >= " + std::to_string(n));
    }
    const int nn = static_cast<int>(n);
    std::vector<long long> strides(d);
    strides[d - 1] = 1;
    for (int i = d - 2; i >= 0; --i) strides[i] = strides[i + 1] * cap;
    auto id_of = [&](const std::vector<int>& x) {
        long long r = 0;
        for (int i = 0; i < d; ++i) r += (x[i] - 1) * strides[i];
        return r;
    };
    std::vector<std::vector<int>> states(nn);
    for (int sid = 0; sid < nn; ++sid) {
        long long r = sid;
        std::vector<int> x(d);
        for (int i = 0; i < d; ++i) {
            x[i] = static_cast<int>(r / strides[i]) + 1;
            r %= strides[i];
        }
        states[sid] = x;
    }

    Matrix rates = Matrix::Zero(nn, nn);
    Vector kill = Vector::Zero(nn);
    for (int sid = 0; sid < nn; ++sid) {
        const auto& x = states[sid];
        for (int i = 0; i < d; ++i) {
            double birth = spec.lambda_vec[i] * x[i];
            for (int j = 0; j < d; ++j)
                if (j != i) birth += spec.c(i, j) * static_cast<double>(x[i]) * x[j];
            if (birth > 0.0 && x[i] < cap) {
                std::vector<int> y = x;
                ++y[i];
                rates(sid, id_of(y)) += birth;
            }
            double death = spec.mu[i] * x[i] + spec.c(i, i) * static_cast<double>(x[i]) * x[i];
            if (x[i] > 1) {
                std::vector<int> y = x;
                --y[i];
                rates(sid, id_of(y)) += death;
            } else {
                kill[sid] += death;  // coordinate hits zero
            }
        }
    }
    return MultiBDGenerator{AbsorbedGenerator(std::move(rates), std::move(kill)), std::move(states)};
}

WeakCooperationCheck check_weak_cooperation(const MultiBDSpec& spec) {
    if (spec.mode != MultiBDMode::Cooperative)
        throw std::invalid_argument("check_weak_cooperation: spec.mode must be Cooperative");
    const int d = spec.d;
    double beta = 0.0;
    for (int i = 0; i < d; ++i) beta += 1.0 / spec.c(i, i);
    double max_coop = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j) max_coop = std::max(max_coop, 0.5 * (spec.c(i, j) + spec.c(j, i)));
    double lhs = (1.0 - 1.0 / d) * max_coop;
    return WeakCooperationCheck{lhs < 1.0 / beta, 1.0 / beta - lhs};
}

DominationRates domination_rates(const MultiBDSpec& spec) {
    const int d = spec.d;
    if (spec.mode == MultiBDMode::Mutation) {
        double sup_lambda = spec.lambda_matrix.maxCoeff();
        double inf_mu = spec.mu.minCoeff();
        double inf_c = spec.c.minCoeff();
        return DominationRates{
            [d, sup_lambda](long long n) { return static_cast<double>(n) * d * sup_lambda; },
            [inf_mu, inf_c](long long n) {
                return static_cast<double>(n) * inf_mu + static_cast<double>(n) * n * inf_c;
            }};
    }
    double max_lambda = spec.lambda_vec.maxCoeff();
    double min_mu = spec.mu.minCoeff();
    double beta = 0.0;
    for (int i = 0; i < d; ++i) beta += 1.0 / spec.c(i, i);
    double max_coop = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            max_coop = std::max(max_coop, 0.5 * (spec.c(i, j) + spec.c(j, i)));
    double coop_coef = (1.0 - 1.0 / d) * max_coop;
    return DominationRates{
        [max_lambda, coop_coef](long long n) {
            return static_cast<double>(n) * max_lambda + static_cast<double>(n) * n * coop_coef;
        },
        [min_mu, beta](long long n) {
            return static_cast<double>(n) * min_mu + static_cast<double>(n) * n / beta;
        }};
}

}  // namespace qsdlab
