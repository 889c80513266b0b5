// qsdlab command line: quasi-stationary analysis runs driven by JSON configs,
// emitting JSON results, CSV curves, and a reproducibility manifest per run.

#include <CLI11.hpp>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qsdlab/criteria.hpp"
#include "qsdlab/neutron.hpp"
#include "qsdlab/serialize.hpp"
#include "qsdlab/version.hpp"

namespace fs = std::filesystem;
using namespace qsdlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStructural = 1;
constexpr int kExitCriteriaFail = 2;

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
    double tol = 1e-10;
};

uint64_t fnv1a(const std::string& data) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// line/column diagnostics from the byte offset of a parse error
[[noreturn]] void rethrow_parse_error(const std::string& raw, const Json::parse_error& err,
                                      const std::string& path) {
    size_t offset = err.byte > 0 ? err.byte - 1 : 0;
    size_t line = 1, col = 1;
    for (size_t i = 0; i < offset && i < raw.size(); ++i) {
        if (raw[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    throw std::invalid_argument(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                                err.what());
}

Json load_config(const std::string& path) {
    std::string raw = read_file(path);
    try {
        return Json::parse(raw);
    } catch (const Json::parse_error& e) {
        rethrow_parse_error(raw, e, path);
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& header) {
        for (size_t i = 0; i < header.size(); ++i) body_ += (i ? "," : "") + header[i];
        body_ += "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) body_ += (i ? "," : "") + cells[i];
        body_ += "\n";
    }
    void save(const fs::path& path) const { write_text(path, body_); }

private:
    std::string body_;
};

std::string fd(double v) { return format_double(v); }

// data-only plotting companion; regenerated identically on every run
const char* kPlotStub = R"(#!/usr/bin/env python3
"""Plot the CSV artifacts in this directory (requires matplotlib)."""
import csv, glob, os
import matplotlib.pyplot as plt

for path in sorted(glob.glob(os.path.join(os.path.dirname(__file__) or ".", "*.csv"))):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        continue
    cols = list(rows[0])
    fig, ax = plt.subplots()
    x = [float(r[cols[0]]) for r in rows]
    for col in cols[1:]:
        try:
            ax.plot(x, [float(r[col]) for r in rows], label=col)
        except ValueError:
            pass
    ax.set_xlabel(cols[0])
    ax.legend()
    ax.set_title(os.path.basename(path))
    fig.savefig(path.replace(".csv", ".png"), dpi=120)
    print("wrote", path.replace(".csv", ".png"))
)";

struct RunContext {
    GlobalArgs args;
    Json config;
    fs::path out;
    Json verdicts = Json::object();
    std::vector<std::string> artifacts;

    uint64_t seed() const {
        if (args.seed_set) return args.seed;
        if (config.contains("run") && config["run"].contains("seed"))
            return config["run"]["seed"].get<uint64_t>();
        return 0;
    }

    void emit_json(const std::string& name, const Json& j) {
        write_json(out / name, j);
        artifacts.push_back(name);
    }
    void emit_csv(const std::string& name, const CsvWriter& csv) {
        csv.save(out / name);
        artifacts.push_back(name);
    }

    void finish(const std::string& command, int exit_status) {
        write_text(out / "plot.py", kPlotStub);
        artifacts.push_back("plot.py");
        Json manifest{{"command", command},
                      {"config_hash", fnv1a(config.dump())},
                      {"seed", seed()},
                      {"threads", args.threads},
                      {"tol", args.tol},
                      {"version", kVersion},
                      {"artifacts", artifacts},
                      {"verdicts", verdicts},
                      {"exit_status", exit_status},
                      {"timestamp", Json::object({{"unix", static_cast<long long>(std::time(nullptr))}})}};
        write_json(out / "manifest.json", manifest);
    }
};

AbsorbedGenerator load_generator(const Json& config) {
    const Json& j = config.contains("generator") ? config.at("generator") : config;
    auto gen = generator_from_json(j);
    auto rep = validate(gen);
    if (!rep.ok) {
        std::string msg = "invalid generator:";
        for (const auto& p : rep.problems) msg += " " + p;
        throw std::invalid_argument(msg);
    }
    return gen;
}

void emit_spectral(RunContext& ctx, const SpectralTriple& triple) {
    ctx.emit_json("spectral.json", to_json(triple));
    ctx.verdicts["lambda0"] = triple.lambda0;
}

void emit_certificate(RunContext& ctx, const AbsorbedGenerator& gen, const SpectralTriple& triple,
                      const CriteriaCertificate& cert) {
    ctx.emit_json("certificate.json", to_json(cert));
    // certification curve at the chosen t0
    auto a1 = certify_a1(gen, cert.t0);
    double t_max = std::max(12.0 / triple.lambda0, 4.0 * cert.t0);
    A2Result a2;
    for (int tries = 0;; ++tries) {
        try {
            a2 = certify_a2(gen, a1.nu, triple, t_max, cert.t0 / 4.0);
            break;
        } catch (const Error&) {
            if (tries > 8) throw;
            t_max *= 2.0;
        }
    }
    CsvWriter curve({"t", "ratio"});
    for (size_t i = 0; i < a2.curve_t.size(); ++i) curve.row({fd(a2.curve_t[i]), fd(a2.curve_ratio[i])});
    ctx.emit_csv("certification_curve.csv", curve);

    auto spectrum = spectrum_report(gen, triple, cert.gamma_bound);
    ctx.emit_json("spectrum.json", to_json(spectrum));
    ctx.verdicts["c1"] = cert.c1;
    ctx.verdicts["c2"] = cert.c2;
    ctx.verdicts["gamma_bound"] = cert.gamma_bound;
    ctx.verdicts["trichotomy_violations"] = spectrum.violations;
}

void emit_tv_vs_bound(RunContext& ctx, const AbsorbedGenerator& gen, const SpectralTriple& triple,
                      const CriteriaCertificate& cert) {
    const int n = gen.size();
    Matrix P_step = transition_matrix(gen, 0.25);
    Matrix M = Matrix::Identity(n, n);
    CsvWriter csv({"t", "tv_max_over_dirac", "bound", "slack"});
    double max_excess = -2.0;
    for (double t = 0.0; t <= 20.0 + 1e-9; t += 0.25) {
        double tv_max = 0.0;
        for (int x = 0; x < n; ++x) {
            Vector row = M.row(x).transpose();
            row /= row.sum();
            tv_max = std::max(tv_max, tv_distance(row, triple.alpha.weights()));
        }
        double bound = explicit_bound(cert, t);
        csv.row({fd(t), fd(tv_max), fd(bound), fd(bound - tv_max)});
        max_excess = std::max(max_excess, tv_max - bound);
        M = M * P_step;
    }
    ctx.emit_csv("tv_vs_bound.csv", csv);
    ctx.verdicts["max_tv_minus_bound"] = max_excess;
    ctx.verdicts["master_bound_holds"] = max_excess <= 1e-9;
}

int cmd_solve(RunContext& ctx) {
    auto gen = load_generator(ctx.config);
    SolveOptions opts;
    opts.tol = ctx.args.tol;
    emit_spectral(ctx, solve_spectral(gen, opts));
    return kExitOk;
}

int cmd_certify(RunContext& ctx) {
    auto gen = load_generator(ctx.config);
    SolveOptions opts;
    opts.tol = ctx.args.tol;
    auto triple = solve_spectral(gen, opts);
    emit_spectral(ctx, triple);
    auto cert = certify(gen, triple);
    emit_certificate(ctx, gen, triple, cert);
    emit_tv_vs_bound(ctx, gen, triple, cert);
    return kExitOk;
}

int cmd_bd(RunContext& ctx) {
    BDSpec spec = bdspec_from_json(ctx.config.at("bd"));
    auto gen = build_bd(spec);
    long long k_max = 10000;
    if (ctx.config.contains("run") && ctx.config["run"].contains("series_k_max"))
        k_max = ctx.config["run"]["series_k_max"].get<long long>();
    auto series = s_series(spec, k_max);
    ctx.emit_json("series.json", to_json(series));
    ctx.verdicts["series"] = to_string(series.verdict);

    SolveOptions opts;
    opts.tol = ctx.args.tol;
    auto triple = solve_spectral(gen, opts);
    emit_spectral(ctx, triple);
    auto cert = certify(gen, triple);
    emit_certificate(ctx, gen, triple, cert);
    emit_tv_vs_bound(ctx, gen, triple, cert);
    return kExitOk;
}

int cmd_multibd(RunContext& ctx) {
    MultiBDSpec spec = multibdspec_from_json(ctx.config.at("multibd"));
    MultiBDGenerator built = spec.mode == MultiBDMode::Mutation ? build_multibd_mutation(spec)
                                                                : build_multibd_cooperative(spec);
    CsvWriter states({"state", "coordinates"});
    for (size_t sid = 0; sid < built.states.size(); ++sid) {
        std::string coords;
        for (size_t i = 0; i < built.states[sid].size(); ++i)
            coords += (i ? " " : "") + std::to_string(built.states[sid][i]);
        states.row({std::to_string(sid), coords});
    }
    ctx.emit_csv("states.csv", states);

    if (spec.mode == MultiBDMode::Cooperative) {
        auto weak = check_weak_cooperation(spec);
        ctx.emit_json("weak_cooperation.json", Json{{"holds", weak.holds}, {"margin", weak.margin}});
        ctx.verdicts["weak_cooperation"] = weak.holds;
    }
    auto dom = domination_rates(spec);
    auto series = s_series(dom.b, dom.d, 10000);
    ctx.emit_json("domination_series.json", to_json(series));
    ctx.verdicts["domination_series"] = to_string(series.verdict);

    SolveOptions opts;
    opts.tol = ctx.args.tol;
    auto triple = solve_spectral(built.gen, opts);
    emit_spectral(ctx, triple);
    auto cert = certify(built.gen, triple);
    emit_certificate(ctx, built.gen, triple, cert);
    return kExitOk;
}

int cmd_neutron(RunContext& ctx) {
    NeutronSpec spec = neutronspec_from_json(ctx.config.at("neutron"));
    const Json run = ctx.config.value("run", Json::object());
    MonteCarloOptions mc;
    mc.particles = run.value("N", 100000LL);
    mc.seed = ctx.seed();
    mc.threads = ctx.args.threads;

    double grid_max = run.value("t_grid_max", 8.0);
    double grid_step = run.value("t_grid_step", 0.25);
    std::vector<double> grid;
    for (double t = 0.0; t <= grid_max + 1e-12; t += grid_step) grid.push_back(t);

    InitLaw init = InitLaw::uniform();
    if (run.contains("init") && run["init"].contains("dirac")) {
        const Json& dj = run["init"]["dirac"];
        init = InitLaw::dirac(Point(dj.at("x").at(0).get<double>(), dj.at("x").at(1).get<double>()),
                              dj.at("angle").get<double>());
    }

    auto curve = estimate_survival_curve(spec, init, grid, mc);
    CsvWriter surv({"t", "survivors", "survival", "ci_lo", "ci_hi"});
    for (size_t j = 0; j < curve.times.size(); ++j)
        surv.row({fd(curve.times[j]), std::to_string(curve.counts[j]), fd(curve.values[j]),
                  fd(curve.ci_lo[j]), fd(curve.ci_hi[j])});
    ctx.emit_csv("survival.csv", surv);

    double wa = run.value("window_a", 0.25 * grid_max);
    double wb = run.value("window_b", 0.75 * grid_max);
    double lam0_hat = 1.0;
    Json lam;
    try {
        auto est = estimate_lambda0(curve, wa, wb);
        lam = Json{{"rate", est.rate},
                   {"stderr", est.stderr_},
                   {"window", {wa, wb}},
                   {"window_sensitivity", est.window_sensitivity}};
        ctx.verdicts["lambda0_hat"] = est.rate;
        lam0_hat = est.rate;
    } catch (const std::invalid_argument& e) {
        lam = Json{{"error", e.what()}};
        ctx.verdicts["lambda0_hat"] = "unavailable";
    }
    ctx.emit_json("lambda0.json", lam);

    if (run.value("qsd", true)) {
        double t_star = run.value("t_star", 3.0 / lam0_hat);
        int sb = run.value("spatial_bins", 4);
        int db = run.value("direction_bins", 4);
        for (QsdMode mode : {QsdMode::Naive, QsdMode::FlemingViot}) {
            const char* name = mode == QsdMode::Naive ? "qsd_naive.csv" : "qsd_fleming_viot.csv";
            const char* ess_key = mode == QsdMode::Naive ? "qsd_naive_ess" : "qsd_fv_ess";
            try {
                auto est = estimate_qsd(spec, init, t_star, mode, sb, db, mc);
                CsvWriter csv({"x_lo", "x_hi", "y_lo", "y_hi", "arc_lo", "arc_hi", "mass"});
                double dx = (est.box_hi_x - est.box_lo_x) / sb, dy = (est.box_hi_y - est.box_lo_y) / sb;
                for (int i = 0; i < sb; ++i)
                    for (int j = 0; j < sb; ++j)
                        for (int k = 0; k < db; ++k)
                            csv.row({fd(est.box_lo_x + i * dx), fd(est.box_lo_x + (i + 1) * dx),
                                     fd(est.box_lo_y + j * dy), fd(est.box_lo_y + (j + 1) * dy),
                                     fd(k * 2.0 * M_PI / db), fd((k + 1) * 2.0 * M_PI / db),
                                     fd(est.mass[(static_cast<size_t>(i) * sb + j) * db + k])});
                ctx.emit_csv(name, csv);
                ctx.verdicts[ess_key] = est.effective_sample_size;
            } catch (const Error& e) {
                ctx.verdicts[ess_key] = e.what();
            }
        }
    }

    if (ctx.config.contains("bound")) {
        const Json& bj = ctx.config["bound"];
        Point x(bj.at("x").at(0).get<double>(), bj.at("x").at(1).get<double>());
        auto table = verify_transport_density_bound(spec, x, bj.at("t").get<double>(),
                                                    bj.value("cells", 8), bj.value("arcs", 8), mc);
        CsvWriter csv({"ix", "iy", "arc", "empirical", "sigma", "rhs", "margin", "pass"});
        for (const auto& c : table.cells)
            csv.row({std::to_string(c.ix), std::to_string(c.iy), std::to_string(c.iarc), fd(c.empirical),
                     fd(c.sigma), fd(c.rhs), fd(c.margin), c.pass ? "1" : "0"});
        ctx.emit_csv("bound_table.csv", csv);
        ctx.verdicts["bound_pass_fraction"] = table.pass_fraction;
    }
    return kExitOk;
}

int cmd_report(const GlobalArgs& args) {
    // one summary row per run directory found directly under --dir
    CsvWriter csv({"run", "command", "lambda0", "c1", "c2", "gamma_bound", "max_tv_slack", "verdicts"});
    std::string text = "qsdlab report\n=============\n";
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(args.config_path)) {
        if (entry.is_directory()) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
        fs::path mpath = dir / "manifest.json";
        if (!fs::exists(mpath)) {
            csv.row({dir.filename().string(), "incomplete", "", "", "", "", "", ""});
            text += dir.filename().string() + ": incomplete (no manifest)\n";
            continue;
        }
        Json m = Json::parse(read_file(mpath.string()));
        const Json v = m.value("verdicts", Json::object());
        auto get = [&](const char* key) {
            return v.contains(key) && v[key].is_number() ? fd(v[key].get<double>()) : std::string();
        };
        std::string verdict_text;
        if (v.contains("series")) verdict_text += "series=" + v["series"].get<std::string>() + " ";
        if (v.contains("master_bound_holds"))
            verdict_text += std::string("master_bound=") +
                            (v["master_bound_holds"].get<bool>() ? "ok" : "VIOLATED") + " ";
        if (m.value("exit_status", 0) == kExitCriteriaFail) verdict_text += "A1-FAIL ";
        csv.row({dir.filename().string(), m.value("command", std::string()), get("lambda0"), get("c1"),
                 get("c2"), get("gamma_bound"), get("max_tv_minus_bound"), verdict_text});
        text += dir.filename().string() + ": " + m.value("command", std::string()) +
                (v.contains("lambda0") ? " lambda0=" + get("lambda0") : "") + " " + verdict_text + "\n";
    }
    fs::path out = args.out_dir.empty() ? fs::path(args.config_path) : fs::path(args.out_dir);
    fs::create_directories(out);
    csv.save(out / "summary.csv");
    write_text(out / "summary.txt", text);
    return kExitOk;
}

int dispatch(const std::string& command, GlobalArgs args) {
    if (const char* env = std::getenv("QSDLAB_THREADS"); env && args.threads == 1) {
        args.threads = std::max(1, std::atoi(env));
    }
    if (command == "report") return cmd_report(args);

    RunContext ctx;
    ctx.args = args;
    ctx.config = load_config(args.config_path);
    ctx.out = args.out_dir;
    fs::create_directories(ctx.out);
    int status = kExitOk;
    try {
        if (command == "solve") status = cmd_solve(ctx);
        else if (command == "certify") status = cmd_certify(ctx);
        else if (command == "bd") status = cmd_bd(ctx);
        else if (command == "multibd") status = cmd_multibd(ctx);
        else if (command == "neutron") status = cmd_neutron(ctx);
        else throw std::invalid_argument("unknown command " + command);
    } catch (const Error& e) {
        // a mathematical negative (failed certification, degenerate spectrum)
        ctx.verdicts["failure"] = e.what();
        std::cerr << "criteria failure: " << e.what() << "\n";
        status = kExitCriteriaFail;
    }
    ctx.finish(command, status);
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quasi-stationary distribution laboratory"};
    app.require_subcommand(1);

    GlobalArgs args;
    std::string command;
    for (const char* name : {"solve", "certify", "bd", "multibd", "neutron"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", args.config_path, "JSON config path")->required();
        sub->add_option("--out", args.out_dir, "output directory")->required();
        sub->add_option("--seed", args.seed, "RNG seed override")->each([&](const std::string&) {
            args.seed_set = true;
        });
        sub->add_option("--threads", args.threads, "worker threads");
        sub->add_option("--tol", args.tol, "solver tolerance");
        sub->callback([&command, name] { command = name; });
    }
    auto* rep = app.add_subcommand("report");
    rep->add_option("--dir", args.config_path, "directory of runs")->required();
    rep->add_option("--out", args.out_dir, "summary output directory (defaults to --dir)");
    rep->callback([&command] { command = "report"; });

    CLI11_PARSE(app, argc, argv);
    try {
        return dispatch(command, args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStructural;
    }
}
