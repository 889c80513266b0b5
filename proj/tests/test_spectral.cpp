#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "qsdlab/spectral.hpp"

using namespace qsdlab;

namespace {

AbsorbedGenerator one_state(double q) {
    Vector kill(1);
    kill << q;
    return AbsorbedGenerator(Matrix::Zero(1, 1), kill);
}

BDSpec logistic(int n) {
    BDSpec spec = fixtures::logistic60();
    spec.N = n;
    return spec;
}

}  // namespace

TEST_CASE("single killed state has the obvious triple") {
    auto triple = solve_spectral(one_state(0.9));
    CHECK(triple.lambda0 == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(triple.alpha.weights()[0] == doctest::Approx(1.0));
    CHECK(triple.eta[0] == doctest::Approx(1.0));
}

TEST_CASE("T2 closed forms") {
    auto triple = solve_spectral(fixtures::t2());
    const double s2 = std::sqrt(2.0);
    CHECK(triple.lambda0 == doctest::Approx(2.0 - s2).epsilon(1e-13));
    CHECK(triple.alpha.weights()[0] == doctest::Approx(2.0 - s2).epsilon(1e-12));
    CHECK(triple.alpha.weights()[1] == doctest::Approx(s2 - 1.0).epsilon(1e-12));
    CHECK(triple.eta[0] == doctest::Approx((2.0 + s2) / 4.0).epsilon(1e-12));
    CHECK(triple.eta[1] == doctest::Approx((s2 + 1.0) / 2.0).epsilon(1e-12));
    CHECK(triple.gap == doctest::Approx(2.0 * s2).epsilon(1e-12));
}

TEST_CASE("eigen-residuals meet tolerance on solved models") {
    for (int n : {30, 60}) {
        auto gen = build_bd(logistic(n));
        auto triple = solve_spectral(gen);
        const Matrix& L = gen.restricted();
        const Vector& a = triple.alpha.weights();
        CHECK((a.transpose() * L + triple.lambda0 * a.transpose()).cwiseAbs().sum() <= 1e-10);
        CHECK((L * triple.eta + triple.lambda0 * triple.eta).cwiseAbs().maxCoeff() <= 1e-10);
        // alpha decays super-geometrically here; entries are positive until the
        // eigensolver noise floor clamps the far tail to zero
        CHECK(triple.alpha.weights().minCoeff() >= 0.0);
        CHECK((triple.alpha.weights().head(15).array() > 0.0).all());
        CHECK(triple.eta.minCoeff() > 0.0);
        CHECK(a.dot(triple.eta) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("degenerate top eigenvalue is rejected") {
    // two identical decoupled killed states: top eigenvalue has multiplicity 2
    Matrix rates = Matrix::Zero(2, 2);
    Vector kill(2);
    kill << 1.0, 1.0;
    CHECK_THROWS_WITH_AS(solve_spectral(AbsorbedGenerator(rates, kill)),
                         doctest::Contains("QSD not unique at this truncation"), Error);
}

TEST_CASE("power iteration path agrees with the dense path") {
    auto gen = build_bd(logistic(600));
    SolveOptions dense_opts;
    dense_opts.dense_threshold = 1000;
    auto dense = solve_spectral(gen, dense_opts);
    SolveOptions power_opts;
    power_opts.dense_threshold = 100;  // force the iterative route
    power_opts.tol = 1e-8;
    auto power = solve_spectral(gen, power_opts);
    CHECK(power.lambda0 == doctest::Approx(dense.lambda0).epsilon(1e-9));
    CHECK(tv_distance(power.alpha, dense.alpha) < 1e-8);
    CHECK((power.eta - dense.eta).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("eta limit profile") {
    auto single = one_state(1.1);
    auto errs = eta_limit_profile(single, solve_spectral(single), {0.5, 1.0, 2.0});
    for (double e : errs) CHECK(e < 1e-14);

    auto gen = fixtures::t2();
    auto triple = solve_spectral(gen);
    auto errs2 = eta_limit_profile(gen, triple, {5.0, 10.0});
    // decay rate between successive errors is governed by the gap (factor-3 slack)
    CHECK(errs2[1] <= errs2[0] * 3.0 * std::exp(-triple.gap * 5.0) + 1e-14);

    // started from alpha, e^{lambda0 t} P_alpha(t < abs) = alpha(eta) = 1 exactly
    for (double t : {1.0, 4.0}) {
        double s = survival_probability(gen, triple.alpha, t);
        CHECK(std::exp(triple.lambda0 * t) * s == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("eta profile decay matches the gap on the logistic chain") {
    auto gen = build_bd(logistic(30));
    auto triple = solve_spectral(gen);
    auto errs = eta_limit_profile(gen, triple, {2.0, 4.0});
    CHECK(errs[1] <= errs[0] * 3.0 * std::exp(-triple.gap * 2.0) + 1e-13);
}

TEST_CASE("q-process generator") {
    auto single = one_state(2.0);
    auto qp1 = qprocess_generator(single, solve_spectral(single));
    CHECK(qp1.generator(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(qp1.beta.weights()[0] == doctest::Approx(1.0));

    auto gen = fixtures::t2();
    auto triple = solve_spectral(gen);
    auto qp = qprocess_generator(gen, triple);
    CHECK(qp.beta.weights()[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(qp.beta.weights()[1] == doctest::Approx(0.5).epsilon(1e-12));
    // conservative rows and invariance
    CHECK(qp.generator.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((qp.beta.weights().transpose() * qp.generator).cwiseAbs().maxCoeff() <= 1e-10);

    SpectralTriple broken = triple;
    broken.eta[0] = 0.0;
    CHECK_THROWS_AS(qprocess_generator(gen, broken), std::invalid_argument);
}

TEST_CASE("q-process transition kernel") {
    auto gen = fixtures::t2();
    auto triple = solve_spectral(gen);
    auto qp = qprocess_generator(gen, triple);

    CHECK(qprocess_transition(gen, triple, 0.0).isApprox(Matrix::Identity(2, 2)));
    for (double t : {0.5, 1.0, 5.0}) {
        Matrix Pt = qprocess_transition(gen, triple, t);
        CHECK((Pt.rowwise().sum() - Vector::Ones(2)).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((Pt - oracle::expm(Matrix(qp.generator * t))).cwiseAbs().maxCoeff() < 1e-12);
        Vector binv = (qp.beta.weights().transpose() * Pt).transpose();
        CHECK(tv_distance(binv, qp.beta.weights()) <= 1e-10);
    }
}

TEST_CASE("conjugation identity on the logistic chain") {
    auto gen = build_bd(logistic(30));
    auto triple = solve_spectral(gen);
    auto qp = qprocess_generator(gen, triple);
    for (double t : {0.5, 2.0}) {
        Matrix lhs = oracle::expm(Matrix(qp.generator * t));
        Matrix rhs = qprocess_transition(gen, triple, t);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("spectrum report classification") {
    auto single = one_state(0.4);
    auto rep1 = spectrum_report(single, solve_spectral(single), 0.1);
    REQUIRE(rep1.eigenvalues.size() == 1);
    CHECK(rep1.eigenvalues[0].cls == EigenvalueClass::Top);
    CHECK(rep1.eigenvalues[0].value.real() == doctest::Approx(-0.4).epsilon(1e-13));

    auto gen = fixtures::t2();
    auto triple = solve_spectral(gen);
    const double s2 = std::sqrt(2.0);
    auto rep = spectrum_report(gen, triple, 1.0);
    REQUIRE(rep.eigenvalues.size() == 2);
    CHECK(rep.eigenvalues[0].value.real() == doctest::Approx(-(2.0 - s2)).epsilon(1e-12));
    CHECK(rep.eigenvalues[1].value.real() == doctest::Approx(-(2.0 + s2)).epsilon(1e-12));
    CHECK(rep.eigenvalues[1].cls == EigenvalueClass::BelowBound);
    CHECK(rep.violations == 0);

    // an absurdly large claimed gamma_bound must be flagged, not silently passed
    auto flagged = spectrum_report(gen, triple, 10.0);
    CHECK(flagged.violations == 1);
    CHECK(flagged.eigenvalues[1].cls == EigenvalueClass::ViolatesBound);
}
