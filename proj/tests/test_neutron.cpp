#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "qsdlab/neutron.hpp"

using namespace qsdlab;

namespace {

NeutronSpec unit_disk(double lambda) { return NeutronSpec{Disk{Point(0, 0), 1.0}, lambda}; }

}  // namespace

TEST_CASE("free flight: with jumps suppressed the absorption time is the exit time") {
    auto spec = unit_disk(1e-12);
    CounterStream rng(1, 0);
    for (double ang = 0.1; ang < 6.0; ang += 0.9) {
        Point x(0.3, -0.2);
        auto rec = simulate_path(spec, x, ang, 50.0, rng);
        double expect = exit_time(spec.domain, x, Point(std::cos(ang), std::sin(ang)));
        CHECK(rec.absorption_time == expect);  // same code path, exact equality
    }
}

TEST_CASE("from the center of the unit disk nothing dies before t = 1") {
    auto spec = unit_disk(4.0);
    for (uint64_t i = 0; i < 2000; ++i) {
        CounterStream rng(9, i);
        auto rec = simulate_path(spec, Point(0, 0), 0.0, 0.999999, rng);
        CHECK(rec.absorption_time == std::numeric_limits<double>::infinity());
    }
}

TEST_CASE("jump counts in free space follow the Poisson law") {
    NeutronSpec huge{Disk{Point(0, 0), 1e6}, 1.5};
    const double h = 3.0;
    const int n = 100000;
    std::vector<long long> counts;
    counts.reserve(n);
    double mean = 0.0;
    for (uint64_t i = 0; i < n; ++i) {
        CounterStream rng(31, i);
        auto rec = simulate_path(huge, Point(0, 0), 0.0, h, rng);
        long long jumps = static_cast<long long>(rec.times.size()) - 1;
        counts.push_back(jumps);
        mean += static_cast<double>(jumps);
    }
    mean /= n;
    const double lam_h = 1.5 * h;
    CHECK(mean <= lam_h + 3.0 * std::sqrt(lam_h / n));
    CHECK(mean >= lam_h - 3.0 * std::sqrt(lam_h / n));
    // Kolmogorov-Smirnov against Poisson(lambda h)
    long long kmax = *std::max_element(counts.begin(), counts.end());
    std::vector<double> emp(static_cast<size_t>(kmax) + 1, 0.0);
    for (long long c : counts) emp[static_cast<size_t>(c)] += 1.0 / n;
    double ks = 0.0, emp_cdf = 0.0, pois_cdf = 0.0, pmf = std::exp(-lam_h);
    for (long long k = 0; k <= kmax; ++k) {
        emp_cdf += emp[static_cast<size_t>(k)];
        pois_cdf += pmf;
        ks = std::max(ks, std::abs(emp_cdf - pois_cdf));
        pmf *= lam_h / (k + 1);
    }
    CHECK(ks < 0.01);
}

TEST_CASE("path records interpolate states") {
    auto spec = unit_disk(2.0);
    CounterStream rng(5, 17);
    auto rec = simulate_path(spec, Point(0.1, 0.2), 1.0, 0.9, rng);
    PdmpState s = rec.state_at(0.0);
    CHECK(s.x.x() == doctest::Approx(0.1));
    CHECK(std::abs(s.u.norm() - 1.0) < 1e-12);
    if (rec.alive_at(0.5)) {
        PdmpState mid = rec.state_at(0.5);
        CHECK(domain_contains(spec.domain, mid.x));
    }
}

TEST_CASE("survival curve: exact ones before the free-flight distance, binomial CIs after") {
    auto spec = unit_disk(1.0);
    MonteCarloOptions mc;
    mc.particles = 20000;
    mc.seed = 11;
    auto init = InitLaw::dirac(Point(0, 0), 0.3);
    auto curve = estimate_survival_curve(spec, init, {0.25, 0.5, 0.9, 1.5, 2.5, 4.0}, mc);
    CHECK(curve.values[0] == 1.0);  // zero tolerance below d(x0, boundary)
    CHECK(curve.values[1] == 1.0);
    CHECK(curve.values[2] == 1.0);
    CHECK(curve.values[3] < 1.0);
    CHECK(curve.values[4] < curve.values[3]);
    for (size_t j = 0; j < curve.times.size(); ++j) {
        CHECK(curve.ci_lo[j] <= curve.values[j]);
        CHECK(curve.ci_hi[j] >= curve.values[j]);
    }
    CHECK_FALSE(curve.all_dead_warning);
}

TEST_CASE("two independent seed sets agree within 3 binomial sigma") {
    auto spec = unit_disk(1.0);
    std::vector<double> grid{0.5, 1.0, 2.0, 3.0, 4.5};
    MonteCarloOptions mc1, mc2;
    mc1.particles = mc2.particles = 50000;
    mc1.seed = 1001;
    mc2.seed = 2002;
    auto c1 = estimate_survival_curve(spec, InitLaw::uniform(), grid, mc1);
    auto c2 = estimate_survival_curve(spec, InitLaw::uniform(), grid, mc2);
    for (size_t j = 0; j < grid.size(); ++j) {
        double p = 0.5 * (c1.values[j] + c2.values[j]);
        double sigma = std::sqrt(2.0 * p * (1.0 - p) / mc1.particles);
        CHECK(std::abs(c1.values[j] - c2.values[j]) < 3.0 * std::max(sigma, 1e-9));
    }
}

TEST_CASE("a large jump rate rescues outward starts near the boundary") {
    std::vector<double> grid{0.3};
    MonteCarloOptions mc;
    mc.particles = 20000;
    mc.seed = 77;
    auto init = InitLaw::dirac(Point(0.95, 0.0), 0.0);  // pointing outward
    auto slow = estimate_survival_curve(unit_disk(0.01), init, grid, mc);
    auto fast = estimate_survival_curve(unit_disk(20.0), init, grid, mc);
    CHECK(fast.values[0] > slow.values[0] + 0.1);
}

TEST_CASE("survival curves are identical across thread counts") {
    auto spec = unit_disk(1.0);
    std::vector<double> grid{0.5, 1.5, 3.0};
    MonteCarloOptions a, b;
    a.particles = b.particles = 30000;
    a.seed = b.seed = 4242;
    a.threads = 1;
    b.threads = 4;
    auto ca = estimate_survival_curve(spec, InitLaw::uniform(), grid, a);
    auto cb = estimate_survival_curve(spec, InitLaw::uniform(), grid, b);
    CHECK(ca.counts == cb.counts);
}

TEST_CASE("lambda0 regression") {
    SurvivalCurve synth;
    for (double t = 0.0; t <= 10.0; t += 0.5) {
        synth.times.push_back(t);
        synth.values.push_back(std::exp(-0.7 * t));
    }
    auto est = estimate_lambda0(synth, 2.0, 8.0);
    CHECK(est.rate == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(est.stderr_ < 1e-12);

    SurvivalCurve tiny;
    tiny.times = {0.0, 1.0, 2.0};
    tiny.values = {1.0, 0.5, 0.25};
    CHECK_THROWS_AS(estimate_lambda0(tiny, 0.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(estimate_lambda0(synth, 5.0, 3.0), std::invalid_argument);
}

TEST_CASE("lambda0 stderr follows the CLT: quadrupling N halves it") {
    auto spec = unit_disk(1.0);
    std::vector<double> grid;
    for (double t = 0.0; t <= 5.0; t += 0.25) grid.push_back(t);
    MonteCarloOptions small, big;
    small.particles = 25000;
    big.particles = 100000;
    small.seed = big.seed = 5;
    small.threads = big.threads = 2;
    auto e1 = estimate_lambda0(estimate_survival_curve(spec, InitLaw::uniform(), grid, small), 2.0, 4.5);
    auto e2 = estimate_lambda0(estimate_survival_curve(spec, InitLaw::uniform(), grid, big), 2.0, 4.5);
    CHECK(e2.stderr_ == doctest::Approx(0.5 * e1.stderr_).epsilon(0.30));
    // the two estimates agree within 3 joint standard errors
    CHECK(std::abs(e1.rate - e2.rate) < 3.0 * std::hypot(e1.stderr_, e2.stderr_));
}

TEST_CASE("lambda0 requires 50 survivors at the window end") {
    auto spec = unit_disk(1.0);
    std::vector<double> grid;
    for (double t = 0.0; t <= 14.0; t += 0.5) grid.push_back(t);
    MonteCarloOptions mc;
    mc.particles = 2000;
    mc.seed = 3;
    auto curve = estimate_survival_curve(spec, InitLaw::uniform(), grid, mc);
    CHECK_THROWS_WITH_AS(estimate_lambda0(curve, 4.0, 6.0), doctest::Contains("50 survivors"),
                         std::invalid_argument);
}

TEST_CASE("qsd histogram: t_star = 0 returns the initial law, mass exactly 1") {
    auto spec = unit_disk(1.0);
    MonteCarloOptions mc;
    mc.particles = 20000;
    mc.seed = 8;
    auto est = estimate_qsd(spec, InitLaw::uniform(), 0.0, QsdMode::Naive, 3, 2, mc);
    CHECK(std::accumulate(est.mass.begin(), est.mass.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    // corner cells of the bounding box hold less of the disk's area
    double corner = est.mass[0 * 2 + 0];
    double center = est.mass[(1 * 3 + 1) * 2 + 0];
    CHECK(center > corner);
}

TEST_CASE("naive and Fleming-Viot histograms agree cell by cell at matched precision") {
    auto spec = unit_disk(1.0);
    MonteCarloOptions mc;
    mc.particles = 60000;
    mc.seed = 21;
    mc.threads = 2;
    const double t_star = 2.4;
    auto naive = estimate_qsd(spec, InitLaw::uniform(), t_star, QsdMode::Naive, 3, 2, mc);
    MonteCarloOptions mc2 = mc;
    mc2.seed = 22;
    auto fv = estimate_qsd(spec, InitLaw::uniform(), t_star, QsdMode::FlemingViot, 3, 2, mc2);
    CHECK(naive.effective_sample_size > 500);
    CHECK(fv.effective_sample_size > naive.effective_sample_size);
    for (size_t c = 0; c < naive.mass.size(); ++c) {
        double p = 0.5 * (naive.mass[c] + fv.mass[c]);
        double sigma = std::sqrt(p * (1.0 - p) / naive.effective_sample_size +
                                 p * (1.0 - p) / fv.effective_sample_size);
        CHECK(std::abs(naive.mass[c] - fv.mass[c]) <= 3.0 * std::max(sigma, 1e-6));
    }
}

TEST_CASE("naive mode reports a too-deep horizon; Fleming-Viot survives it") {
    NeutronSpec tiny{Disk{Point(0, 0), 0.05}, 1.0};
    MonteCarloOptions mc;
    mc.particles = 2000;
    mc.seed = 13;
    CHECK_THROWS_WITH_AS(estimate_qsd(tiny, InitLaw::uniform(), 5.0, QsdMode::Naive, 2, 2, mc),
                         doctest::Contains("t_star too deep"), Error);
    auto fv = estimate_qsd(tiny, InitLaw::uniform(), 5.0, QsdMode::FlemingViot, 2, 2, mc);
    CHECK(std::accumulate(fv.mass.begin(), fv.mass.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Fleming-Viot is deterministic across thread counts") {
    auto spec = unit_disk(1.0);
    MonteCarloOptions a, b;
    a.particles = b.particles = 5000;
    a.seed = b.seed = 99;
    a.threads = 1;
    b.threads = 4;
    auto fa = estimate_qsd(spec, InitLaw::uniform(), 2.0, QsdMode::FlemingViot, 3, 2, a);
    auto fb = estimate_qsd(spec, InitLaw::uniform(), 2.0, QsdMode::FlemingViot, 3, 2, b);
    CHECK(fa.mass == fb.mass);
    CHECK(fa.effective_sample_size == fb.effective_sample_size);
}

TEST_CASE("transport density bound: central cell value and pass table") {
    auto spec = unit_disk(1.0);
    MonteCarloOptions mc;
    mc.particles = 200000;
    mc.seed = 7;
    mc.threads = 2;
    auto table = verify_transport_density_bound(spec, Point(0, 0), 0.5, 8, 8, mc);
    REQUIRE(table.cells.size() == 8 * 8 * 8);

    // central cells integrate a density close to lambda^2 t e^{-lambda t}/(4 pi)
    const double t = 0.5;
    double density_at_center = t * std::exp(-t) / (4.0 * M_PI);
    double cell_area = (2.0 * t / 8) * (2.0 * t / 8);
    for (const auto& cell : table.cells) {
        if ((cell.ix == 3 || cell.ix == 4) && (cell.iy == 3 || cell.iy == 4)) {
            CHECK(cell.rhs == doctest::Approx(density_at_center * cell_area / 8.0).epsilon(0.05));
        }
        // cells fully outside B(x,t) carry a vanishing bound and pass trivially
        double cx = table.cells[0].rhs;  // silence unused warnings pattern
        (void)cx;
    }
    // corner cells lie outside the reachable ball
    for (const auto& cell : table.cells) {
        if ((cell.ix == 0 || cell.ix == 7) && (cell.iy == 0 || cell.iy == 7)) {
            CHECK(cell.rhs == 0.0);
            CHECK(cell.pass);
        }
    }
    CHECK(table.pass_fraction >= 0.98);

    CHECK_THROWS_AS(verify_transport_density_bound(spec, Point(0.8, 0), 0.5, 4, 4, mc),
                    std::invalid_argument);
}

TEST_CASE("disk mixing-cone parameters") {
    auto params = disk_assumption_b_params(1.0, 0.1);
    CHECK(params.s_eps > 0.0);
    CHECK(params.s_eps < params.t_eps);
    CHECK(params.sigma_lower > 0.0);
    CHECK(params.sigma_lower < 1.0);

    // shrinking epsilon widens the usable cone
    double prev = 0.0;
    for (double eps : {0.4, 0.3, 0.2, 0.1, 0.05}) {
        auto p = disk_assumption_b_params(1.0, eps);
        CHECK(p.sigma_lower > prev);
        prev = p.sigma_lower;
    }

    CHECK_THROWS_AS(disk_assumption_b_params(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(disk_assumption_b_params(1.0, 0.6), std::invalid_argument);
}
