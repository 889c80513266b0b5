#pragma once

// Shared small models used across the suites.

#include "qsdlab/generator.hpp"
#include "qsdlab/models.hpp"

namespace fixtures {

/// Two-state chain: 0 -> 1 at rate 1, 1 -> 0 at rate 2, kill = (1, 0).
/// Closed forms (characteristic polynomial x^2 + 4x + 2):
///   lambda0 = 2 - sqrt(2), alpha = (2-sqrt2, sqrt2-1),
///   eta = ((2+sqrt2)/4, (sqrt2+1)/2), gap = 2 sqrt(2), beta = (1/2, 1/2).
inline qsdlab::AbsorbedGenerator t2() {
    qsdlab::Matrix rates(2, 2);
    rates << 0.0, 1.0, 2.0, 0.0;
    qsdlab::Vector kill(2);
    kill << 1.0, 0.0;
    return qsdlab::AbsorbedGenerator(rates, kill);
}

/// 60-state logistic birth-death chain with catastrophes:
/// b_k = k, d_k = k + 0.1 k^2, a_k = 0.05.
inline qsdlab::BDSpec logistic60() {
    qsdlab::BDSpec spec;
    spec.b = qsdlab::RateSequence::expression("k");
    spec.d = qsdlab::RateSequence::expression("k + 0.1*k^2");
    spec.a = qsdlab::RateSequence(0.05);
    spec.N = 60;
    return spec;
}

/// Random valid absorbed generator on n states (dense off-diagonal rates,
/// kill > 0 somewhere), deterministic in `seed`.
inline qsdlab::AbsorbedGenerator random_generator(int n, unsigned seed) {
    // simple LCG so the fixture does not depend on library RNG choices
    uint64_t s = seed * 6364136223846793005ULL + 1442695040888963407ULL;
    auto next = [&]() {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(s >> 11) * 0x1.0p-53;
    };
    qsdlab::Matrix rates = qsdlab::Matrix::Zero(n, n);
    qsdlab::Vector kill(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            if (i != j) rates(i, j) = next();
        kill[i] = 0.2 * next();
    }
    kill[0] += 0.1;  // keep the cemetery reachable
    return qsdlab::AbsorbedGenerator(rates, kill);
}

}  // namespace fixtures
