#include "qsdlab/generator.hpp"

#include <cmath>
#include <queue>

namespace qsdlab {

AbsorbedGenerator::AbsorbedGenerator(Matrix rates, Vector kill)
    : n_(static_cast<int>(kill.size())), rates_(std::move(rates)), kill_(std::move(kill)) {
    if (rates_.rows() != n_ || rates_.cols() != n_)
        throw std::invalid_argument("AbsorbedGenerator: rates must be n x n with n = kill.size()");
    if (n_ < 1) throw std::invalid_argument("AbsorbedGenerator: empty state space");
    for (int i = 0; i < n_; ++i) {
        if (!(kill_[i] >= 0.0))
            throw std::invalid_argument("AbsorbedGenerator: negative kill rate at row " + std::to_string(i));
        for (int j = 0; j < n_; ++j) {
            if (i == j) continue;
            if (!(rates_(i, j) >= 0.0))
                throw std::invalid_argument("AbsorbedGenerator: negative rate at row " + std::to_string(i));
        }
    }
    L_ = rates_;
    for (int i = 0; i < n_; ++i) {
        L_(i, i) = 0.0;
        double out = L_.row(i).sum();
        L_(i, i) = -(out + kill_[i]);
    }
    lambda_unif_ = 0.0;
    for (int i = 0; i < n_; ++i) lambda_unif_ = std::max(lambda_unif_, -L_(i, i));
    if (lambda_unif_ > 0.0) {
        K_ = Matrix::Identity(n_, n_) + L_ / lambda_unif_;
    } else {
        K_ = Matrix::Identity(n_, n_);
    }
}

ValidationReport validate(const AbsorbedGenerator& gen) {
    ValidationReport rep;
    const int n = gen.size();
    // Backward reachability from the cemetery through the rate digraph.
    std::vector<char> reaches(n, 0);
    std::queue<int> frontier;
    for (int i = 0; i < n; ++i) {
        if (gen.kill()[i] > 0.0) {
            reaches[i] = 1;
            frontier.push(i);
        }
    }
    while (!frontier.empty()) {
        int j = frontier.front();
        frontier.pop();
        for (int i = 0; i < n; ++i) {
            if (!reaches[i] && gen.rates()(i, j) > 0.0) {
                reaches[i] = 1;
                frontier.push(i);
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        if (!reaches[i]) {
            rep.ok = false;
            rep.unreachable_to_cemetery.push_back(i);
        }
    }
    if (!rep.unreachable_to_cemetery.empty()) {
        std::string msg = "cemetery unreachable from state(s):";
        for (int i : rep.unreachable_to_cemetery) msg += " " + std::to_string(i);
        rep.problems.push_back(msg);
    }
    return rep;
}

Distribution::Distribution(Vector weights, bool normalized)
    : w_(std::move(weights)), normalized_(normalized) {
    for (Eigen::Index i = 0; i < w_.size(); ++i)
        if (!(w_[i] >= 0.0)) throw std::invalid_argument("Distribution: negative weight at " + std::to_string(i));
    if (normalized_) {
        double s = w_.sum();
        if (std::abs(s - 1.0) > 1e-12)
            throw std::invalid_argument("Distribution: weights sum to " + std::to_string(s) + ", expected 1");
    }
}

Distribution Distribution::dirac(int n, int state) {
    if (state < 0 || state >= n) throw std::invalid_argument("Distribution::dirac: state out of range");
    Vector w = Vector::Zero(n);
    w[state] = 1.0;
    return Distribution(std::move(w));
}

Distribution Distribution::uniform(int n) {
    return Distribution(Vector::Constant(n, 1.0 / n));
}

double tv_distance(const Vector& mu1, const Vector& mu2) {
    if (mu1.size() != mu2.size()) throw std::invalid_argument("tv_distance: length mismatch");
    return (mu1 - mu2).cwiseAbs().sum();
}

double tv_distance(const Distribution& mu1, const Distribution& mu2) {
    return tv_distance(mu1.weights(), mu2.weights());
}

}  // namespace qsdlab
