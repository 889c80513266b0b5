#include "qsdlab/neutron.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "qsdlab/parallel.hpp"

namespace qsdlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Point unit(double angle) { return Point(std::cos(angle), std::sin(angle)); }

PdmpState sample_init(const NeutronSpec& spec, const InitLaw& init, CounterStream& rng) {
    if (init.kind == InitLaw::DiracPoint) return PdmpState{init.x, unit(init.angle), true};
    // rejection sampling of a uniform point in the bounding box
    double lox, loy, hix, hiy;
    if (const Disk* d = std::get_if<Disk>(&spec.domain)) {
        lox = d->center.x() - d->radius;
        hix = d->center.x() + d->radius;
        loy = d->center.y() - d->radius;
        hiy = d->center.y() + d->radius;
    } else {
        const auto& p = std::get<ConvexPolygon>(spec.domain);
        lox = loy = std::numeric_limits<double>::infinity();
        hix = hiy = -std::numeric_limits<double>::infinity();
        for (const Point& v : p.vertices) {
            lox = std::min(lox, v.x());
            hix = std::max(hix, v.x());
            loy = std::min(loy, v.y());
            hiy = std::max(hiy, v.y());
        }
    }
    Point x;
    do {
        x = Point(rng.uniform(lox, hix), rng.uniform(loy, hiy));
    } while (!domain_contains(spec.domain, x));
    return PdmpState{x, unit(rng.uniform_angle()), true};
}

}  // namespace

void validate_spec(const NeutronSpec& spec) {
    validate_domain(spec.domain);
    if (!(spec.lambda_jump > 0.0)) throw std::invalid_argument("NeutronSpec: lambda_jump must be > 0");
}

PdmpState PathRecord::state_at(double t) const {
    if (!(t <= horizon) || !alive_at(t))
        throw std::invalid_argument("PathRecord::state_at: not alive at the requested time");
    size_t seg = 0;
    while (seg + 1 < times.size() && times[seg + 1] <= t) ++seg;
    Point u = unit(angles[seg]);
    return PdmpState{positions[seg] + (t - times[seg]) * u, u, true};
}

PathRecord simulate_path(const NeutronSpec& spec, const Point& x0, double angle0, double horizon,
                         CounterStream& rng) {
    if (!(horizon > 0.0)) throw std::invalid_argument("simulate_path: horizon must be > 0");
    if (!domain_contains(spec.domain, x0))
        throw std::invalid_argument("simulate_path: start point outside the domain");
    PathRecord rec;
    rec.horizon = horizon;
    double t = 0.0, angle = angle0;
    Point x = x0;
    rec.times.push_back(0.0);
    rec.positions.push_back(x);
    rec.angles.push_back(angle);
    for (;;) {
        Point u = unit(angle);
        double s_exit = exit_time(spec.domain, x, u);
        double s_jump = rng.exponential(spec.lambda_jump);
        if (s_exit <= s_jump) {  // boundary first: absorbed unless past the horizon
            if (t + s_exit >= horizon) break;
            rec.absorption_time = t + s_exit;
            break;
        }
        if (t + s_jump >= horizon) break;  // alive at the horizon
        t += s_jump;
        x += s_jump * u;
        angle = rng.uniform_angle();
        rec.times.push_back(t);
        rec.positions.push_back(x);
        rec.angles.push_back(angle);
    }
    return rec;
}

SurvivalCurve estimate_survival_curve(const NeutronSpec& spec, const InitLaw& init,
                                      const std::vector<double>& t_grid, const MonteCarloOptions& mc) {
    validate_spec(spec);
    if (mc.particles < 1000) throw std::invalid_argument("estimate_survival_curve: need N >= 1000");
    if (t_grid.empty()) throw std::invalid_argument("estimate_survival_curve: empty grid");
    for (size_t i = 1; i < t_grid.size(); ++i)
        if (t_grid[i] < t_grid[i - 1]) throw std::invalid_argument("estimate_survival_curve: grid must increase");
    const double horizon = std::max(t_grid.back(), 1e-12);
    const size_t g = t_grid.size();
    const int workers = std::max(1, mc.threads);
    std::vector<std::vector<long long>> local(workers, std::vector<long long>(g, 0));
    parallel_chunks(mc.particles, workers, [&](long long lo, long long hi, int w) {
        auto& counts = local[w];
        for (long long i = lo; i < hi; ++i) {
            CounterStream rng(mc.seed, static_cast<uint64_t>(i));
            PdmpState s0 = sample_init(spec, init, rng);
            PathRecord rec = simulate_path(spec, s0.x, std::atan2(s0.u.y(), s0.u.x()), horizon, rng);
            for (size_t j = 0; j < g; ++j)
                if (rec.alive_at(t_grid[j])) ++counts[j];
        }
    });
    SurvivalCurve curve;
    curve.times = t_grid;
    curve.particles = mc.particles;
    curve.counts.assign(g, 0);
    for (const auto& c : local)
        for (size_t j = 0; j < g; ++j) curve.counts[j] += c[j];
    curve.values.resize(g);
    curve.ci_lo.resize(g);
    curve.ci_hi.resize(g);
    const double N = static_cast<double>(mc.particles);
    for (size_t j = 0; j < g; ++j) {
        double p = curve.counts[j] / N;
        double half = 1.959963984540054 * std::sqrt(std::max(p * (1.0 - p), 0.0) / N);
        curve.values[j] = p;
        curve.ci_lo[j] = std::max(0.0, p - half);
        curve.ci_hi[j] = std::min(1.0, p + half);
    }
    curve.all_dead_warning = (curve.counts[0] == 0);
    return curve;
}

Lambda0Estimate estimate_lambda0(const SurvivalCurve& curve, double t_a, double t_b) {
    if (!(t_a < t_b)) throw std::invalid_argument("estimate_lambda0: need t_a < t_b");
    auto fit = [&](double a, double b, bool enforce) -> std::pair<double, double> {
        std::vector<double> xs, ys;
        for (size_t j = 0; j < curve.times.size(); ++j) {
            double t = curve.times[j];
            if (t < a - 1e-12 || t > b + 1e-12) continue;
            if (!(curve.values[j] > 0.0)) continue;
            xs.push_back(t);
            ys.push_back(std::log(curve.values[j]));
        }
        if (xs.size() < 4) {
            if (enforce) throw std::invalid_argument("estimate_lambda0: fewer than 4 grid points in window");
            return {std::numeric_limits<double>::quiet_NaN(), 0.0};
        }
        if (enforce && !curve.counts.empty()) {
            // survivor count at the last window point
            long long at_b = 0;
            for (size_t j = 0; j < curve.times.size(); ++j)
                if (curve.times[j] <= b + 1e-12 && curve.times[j] >= a - 1e-12) at_b = curve.counts[j];
            if (at_b < 50) throw std::invalid_argument("estimate_lambda0: fewer than 50 survivors at t_b");
        }
        const size_t m = xs.size();
        double sx = 0, sy = 0;
        for (size_t i = 0; i < m; ++i) {
            sx += xs[i];
            sy += ys[i];
        }
        double mx = sx / m, my = sy / m;
        double sxx = 0, sxy = 0;
        for (size_t i = 0; i < m; ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        double slope = sxy / sxx;
        double ssr = 0;
        for (size_t i = 0; i < m; ++i) {
            double r = ys[i] - my - slope * (xs[i] - mx);
            ssr += r * r;
        }
        double se = m > 2 ? std::sqrt(ssr / (m - 2) / sxx) : 0.0;
        return {-slope, se};
    };
    auto [rate, se] = fit(t_a, t_b, true);
    Lambda0Estimate est;
    est.rate = rate;
    est.stderr_ = se;
    double len = t_b - t_a;
    double shifts[3] = {-0.25 * len, 0.25 * len, 0.5 * len};
    for (int k = 0; k < 3; ++k)
        est.window_sensitivity[k] = fit(t_a + shifts[k], t_b + shifts[k], false).first;
    return est;
}

namespace {

struct Binner {
    int ns, nd;
    double lox, loy, hix, hiy;

    int cell(const Point& x, double angle) const {
        int i = std::min(ns - 1, std::max(0, static_cast<int>((x.x() - lox) / (hix - lox) * ns)));
        int j = std::min(ns - 1, std::max(0, static_cast<int>((x.y() - loy) / (hiy - loy) * ns)));
        double a = std::fmod(angle, kTwoPi);
        if (a < 0) a += kTwoPi;
        int k = std::min(nd - 1, static_cast<int>(a / kTwoPi * nd));
        return (i * ns + j) * nd + k;
    }
};

Binner domain_binner(const Domain& domain, int ns, int nd) {
    Binner b;
    b.ns = ns;
    b.nd = nd;
    if (const Disk* d = std::get_if<Disk>(&domain)) {
        b.lox = d->center.x() - d->radius;
        b.hix = d->center.x() + d->radius;
        b.loy = d->center.y() - d->radius;
        b.hiy = d->center.y() + d->radius;
    } else {
        const auto& p = std::get<ConvexPolygon>(domain);
        b.lox = b.loy = std::numeric_limits<double>::infinity();
        b.hix = b.hiy = -std::numeric_limits<double>::infinity();
        for (const Point& v : p.vertices) {
            b.lox = std::min(b.lox, v.x());
            b.hix = std::max(b.hix, v.x());
            b.loy = std::min(b.loy, v.y());
            b.hiy = std::max(b.hiy, v.y());
        }
    }
    return b;
}

}  // namespace

QsdEstimate estimate_qsd(const NeutronSpec& spec, const InitLaw& init, double t_star, QsdMode mode,
                         int spatial_bins, int direction_bins, const MonteCarloOptions& mc) {
    validate_spec(spec);
    if (t_star < 0.0) throw std::invalid_argument("estimate_qsd: t_star must be >= 0");
    if (spatial_bins < 1 || direction_bins < 1)
        throw std::invalid_argument("estimate_qsd: need at least one bin per axis");
    const Binner binner = domain_binner(spec.domain, spatial_bins, direction_bins);
    const size_t ncells = static_cast<size_t>(spatial_bins) * spatial_bins * direction_bins;

    QsdEstimate est;
    est.spatial_bins = spatial_bins;
    est.direction_bins = direction_bins;
    est.box_lo_x = binner.lox;
    est.box_lo_y = binner.loy;
    est.box_hi_x = binner.hix;
    est.box_hi_y = binner.hiy;
    est.mass.assign(ncells, 0.0);

    if (t_star == 0.0) {
        std::vector<long long> counts(ncells, 0);
        for (long long i = 0; i < mc.particles; ++i) {
            CounterStream rng(mc.seed, static_cast<uint64_t>(i));
            PdmpState s = sample_init(spec, init, rng);
            ++counts[binner.cell(s.x, std::atan2(s.u.y(), s.u.x()))];
        }
        for (size_t c = 0; c < ncells; ++c) est.mass[c] = counts[c] / static_cast<double>(mc.particles);
        est.effective_sample_size = static_cast<double>(mc.particles);
        est.survivors = mc.particles;
        return est;
    }

    if (mode == QsdMode::Naive) {
        const int workers = std::max(1, mc.threads);
        std::vector<std::vector<long long>> local(workers, std::vector<long long>(ncells, 0));
        std::vector<long long> surv(workers, 0);
        parallel_chunks(mc.particles, workers, [&](long long lo, long long hi, int w) {
            for (long long i = lo; i < hi; ++i) {
                CounterStream rng(mc.seed, static_cast<uint64_t>(i));
                PdmpState s0 = sample_init(spec, init, rng);
                PathRecord rec = simulate_path(spec, s0.x, std::atan2(s0.u.y(), s0.u.x()), t_star, rng);
                if (rec.alive_at(t_star)) {
                    PdmpState s = rec.state_at(t_star);
                    ++local[w][binner.cell(s.x, std::atan2(s.u.y(), s.u.x()))];
                    ++surv[w];
                }
            }
        });
        long long survivors = 0;
        std::vector<long long> counts(ncells, 0);
        for (int w = 0; w < workers; ++w) {
            survivors += surv[w];
            for (size_t c = 0; c < ncells; ++c) counts[c] += local[w][c];
        }
        if (survivors == 0) throw Error("t_star too deep");
        for (size_t c = 0; c < ncells; ++c) est.mass[c] = counts[c] / static_cast<double>(survivors);
        est.effective_sample_size = static_cast<double>(survivors);
        est.survivors = survivors;
        return est;
    }

    // Fleming-Viot: absorbed particles restart from a uniformly chosen
    // survivor, events processed serially in absorption-time order.
    const long long N = mc.particles;
    if (N < 2) throw std::invalid_argument("estimate_qsd: Fleming-Viot needs N >= 2");
    struct Lineage {
        PathRecord rec;
        double t0 = 0.0;
        long long root = 0;
        double absorption() const { return t0 + rec.absorption_time; }
    };
    std::vector<Lineage> cloud(static_cast<size_t>(N));
    std::vector<CounterStream> streams;
    streams.reserve(static_cast<size_t>(N));
    for (long long i = 0; i < N; ++i) streams.emplace_back(mc.seed, static_cast<uint64_t>(i));
    const int workers = std::max(1, mc.threads);
    parallel_chunks(N, workers, [&](long long lo, long long hi, int) {
        for (long long i = lo; i < hi; ++i) {
            PdmpState s0 = sample_init(spec, init, streams[static_cast<size_t>(i)]);
            cloud[static_cast<size_t>(i)].rec = simulate_path(
                spec, s0.x, std::atan2(s0.u.y(), s0.u.x()), t_star, streams[static_cast<size_t>(i)]);
            cloud[static_cast<size_t>(i)].root = i;
        }
    });
    using Event = std::pair<double, long long>;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
    for (long long i = 0; i < N; ++i)
        if (cloud[static_cast<size_t>(i)].absorption() < t_star)
            events.emplace(cloud[static_cast<size_t>(i)].absorption(), i);
    CounterStream resample(mc.seed, 0x8000000000000000ULL);
    while (!events.empty()) {
        auto [tau, i] = events.top();
        events.pop();
        if (cloud[static_cast<size_t>(i)].absorption() != tau) continue;  // stale entry
        // uniform survivor: rejection on (index != i, alive strictly past tau).
        // Resampled copies that never jump again die at the same instant as
        // their donor up to roundoff, so "alive" carries a relative time
        // margin and a containment re-check.
        const double margin = 1e-12 * (1.0 + tau);
        long long donor;
        PdmpState s;
        for (;;) {
            donor = static_cast<long long>(resample.next_u64() % static_cast<uint64_t>(N));
            if (donor == i || !(cloud[static_cast<size_t>(donor)].absorption() > tau + margin)) continue;
            s = cloud[static_cast<size_t>(donor)].rec.state_at(tau - cloud[static_cast<size_t>(donor)].t0);
            if (domain_contains(spec.domain, s.x)) break;
        }
        const Lineage& src = cloud[static_cast<size_t>(donor)];
        Lineage& ln = cloud[static_cast<size_t>(i)];
        ln.t0 = tau;
        ln.root = src.root;
        ln.rec = simulate_path(spec, s.x, std::atan2(s.u.y(), s.u.x()), t_star - tau,
                               streams[static_cast<size_t>(i)]);
        if (ln.absorption() < t_star) events.emplace(ln.absorption(), i);
    }
    std::vector<long long> counts(ncells, 0);
    std::vector<long long> mult(static_cast<size_t>(N), 0);
    for (long long i = 0; i < N; ++i) {
        const Lineage& ln = cloud[static_cast<size_t>(i)];
        PdmpState s = ln.rec.state_at(t_star - ln.t0);
        ++counts[binner.cell(s.x, std::atan2(s.u.y(), s.u.x()))];
        ++mult[static_cast<size_t>(ln.root)];
    }
    double sum_sq = 0.0;
    for (long long m : mult) sum_sq += static_cast<double>(m) * m;
    for (size_t c = 0; c < ncells; ++c) est.mass[c] = counts[c] / static_cast<double>(N);
    est.effective_sample_size = static_cast<double>(N) * N / sum_sq;
    est.survivors = N;
    return est;
}

BoundTable verify_transport_density_bound(const NeutronSpec& spec, const Point& x, double t,
                                          int spatial_cells, int direction_arcs,
                                          const MonteCarloOptions& mc) {
    validate_spec(spec);
    if (!std::holds_alternative<Disk>(spec.domain))
        throw std::invalid_argument("verify_transport_density_bound: disk domain required");
    if (!(distance_to_boundary(spec.domain, x) > t))
        throw std::invalid_argument("verify_transport_density_bound: requires d(x, boundary) > t");
    const double lambda = spec.lambda_jump;
    const int ns = spatial_cells, nd = direction_arcs;
    const size_t ncells = static_cast<size_t>(ns) * ns * nd;

    // empirical counts over [x - t, x + t]^2 cells and direction arcs
    Binner binner{ns, nd, x.x() - t, x.y() - t, x.x() + t, x.y() + t};
    const int workers = std::max(1, mc.threads);
    std::vector<std::vector<long long>> local(workers, std::vector<long long>(ncells, 0));
    parallel_chunks(mc.particles, workers, [&](long long lo, long long hi, int w) {
        for (long long i = lo; i < hi; ++i) {
            CounterStream rng(mc.seed, static_cast<uint64_t>(i));
            PathRecord rec = simulate_path(spec, x, 0.0, t * (1.0 + 1e-12) + 1e-300, rng);
            // no absorption is possible before t by the precondition
            PdmpState s = rec.state_at(t);
            ++local[w][binner.cell(s.x, std::atan2(s.u.y(), s.u.x()))];
        }
    });
    std::vector<long long> counts(ncells, 0);
    for (int w = 0; w < workers; ++w)
        for (size_t c = 0; c < ncells; ++c) counts[c] += local[w][c];

    // cell-integrated lower bound: 32x32 midpoint quadrature of the density
    const int q = 32;
    const double coeff = lambda * lambda * std::exp(-lambda * t) / (4.0 * M_PI * t);
    const double dx = 2.0 * t / ns;
    BoundTable table;
    table.t = t;
    table.lambda = lambda;
    const double N = static_cast<double>(mc.particles);
    long long passed = 0;
    for (int i = 0; i < ns; ++i) {
        for (int j = 0; j < ns; ++j) {
            double ax = binner.lox + i * dx, ay = binner.loy + j * dx;
            double integral = 0.0;
            for (int qi = 0; qi < q; ++qi) {
                for (int qj = 0; qj < q; ++qj) {
                    Point z(ax + (qi + 0.5) * dx / q, ay + (qj + 0.5) * dx / q);
                    double r = (z - x).norm();
                    if (r < t) integral += coeff * (t - r) * (t - r) / (t + r);
                }
            }
            integral *= dx * dx / (q * q);
            for (int k = 0; k < nd; ++k) {
                BoundCell cell;
                cell.ix = i;
                cell.iy = j;
                cell.iarc = k;
                double rhs = integral / nd;  // uniform arc measure
                long long cnt = counts[(static_cast<size_t>(i) * ns + j) * nd + k];
                double p = cnt / N;
                // Poisson-floor deviation: sqrt(count+1)/N matches the binomial
                // sd for rare cells and keeps zero-count cells from reporting
                // certainty they do not have
                double sigma = std::sqrt(static_cast<double>(cnt) + 1.0) / N;
                cell.empirical = p;
                cell.sigma = sigma;
                cell.rhs = rhs;
                cell.margin = p + 3.0 * sigma - rhs;
                cell.pass = cell.margin >= 0.0;
                if (cell.pass) ++passed;
                table.cells.push_back(cell);
            }
        }
    }
    table.pass_fraction = static_cast<double>(passed) / static_cast<double>(ncells);
    return table;
}

AssumptionBParams disk_assumption_b_params(double radius, double epsilon) {
    const double R = radius;
    if (!(R > 0.0)) throw std::invalid_argument("disk_assumption_b_params: radius must be > 0");
    if (!(epsilon > 0.0 && epsilon < R / 2.0))
        throw std::invalid_argument("disk_assumption_b_params: need 0 < epsilon < radius/2");
    const double q = 2.0 * R * epsilon - epsilon * epsilon;  // R^2 - (R-eps)^2
    const double cos2 = 0.5 * (1.0 + q / (R * R));           // halfway between the minimum and 1
    const double cos_theta = std::sqrt(cos2);
    const double theta = std::acos(cos_theta);

    // shell point at distance delta from the boundary, ray at angle phi from
    // the inward normal: inside D_eps iff s in (s_lo, s_hi)
    auto s_window = [&](double delta, double phi) {
        double rr = R - delta;
        double disc = (R - epsilon) * (R - epsilon) - rr * rr * std::sin(phi) * std::sin(phi);
        double root = std::sqrt(std::max(disc, 0.0));
        return std::pair<double, double>(rr * std::cos(phi) - root, rr * std::cos(phi) + root);
    };
    const int grid = 129;
    double s_lo = 0.0, s_hi = std::numeric_limits<double>::infinity();
    double min_first_exit = std::numeric_limits<double>::infinity();
    for (int a = 0; a < grid; ++a) {
        double delta = epsilon * a / (grid - 1);
        for (int b = 0; b < grid; ++b) {
            double phi = theta * b / (grid - 1);
            auto [lo, hi] = s_window(delta, phi);
            s_lo = std::max(s_lo, lo);
            s_hi = std::min(s_hi, hi);
            min_first_exit = std::min(min_first_exit, 2.0 * (R - delta) * std::cos(phi));
        }
    }
    AssumptionBParams params;
    params.epsilon = epsilon;
    params.s_eps = s_lo + 1e-12 * R;
    params.t_eps = s_hi - 1e-12 * R;
    params.sigma_lower = theta / M_PI;
    params.cone_half_angle = theta;
    if (!(params.s_eps < params.t_eps) || !(params.s_eps < min_first_exit))
        throw Error("disk_assumption_b_params: empty cone window");

    // sampled verification of (B2) over the boundary shell
    CounterStream rng(0xB2, 0);
    Disk dd{Point(0, 0), R};
    Domain domain = dd;
    Disk inner{Point(0, 0), R - epsilon};
    for (int trial = 0; trial < 1000; ++trial) {
        double rr = rng.uniform(R - epsilon, R * (1.0 - 1e-12));
        double pos_angle = rng.uniform_angle();
        Point x(rr * std::cos(pos_angle), rr * std::sin(pos_angle));
        double normal_angle = pos_angle + M_PI;  // inward
        for (int du = 0; du < 8; ++du) {
            double u_angle = normal_angle + rng.uniform(-theta, theta);
            Point u = unit(u_angle);
            for (int si = 0; si <= 16; ++si) {
                double s = params.s_eps + (params.t_eps - params.s_eps) * si / 16.0;
                if (!((x + s * u).norm() < R - epsilon))
                    throw Error("disk_assumption_b_params: sampled (B2) check failed inside window");
            }
            for (int si = 0; si <= 16; ++si) {
                double s = params.s_eps * si / 16.0;
                if (!((x + s * u).norm() < R))
                    throw Error("disk_assumption_b_params: sampled (B2) check hit the boundary early");
            }
        }
    }
    (void)domain;
    (void)inner;
    return params;
}

}  // namespace qsdlab
