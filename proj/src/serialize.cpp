#include "qsdlab/serialize.hpp"

#include <cstdio>

namespace qsdlab {

namespace {

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j) {
    const auto rows = j.size();
    if (rows == 0) return Matrix(0, 0);
    const auto cols = j.at(0).size();
    Matrix m(rows, cols);
    for (size_t i = 0; i < rows; ++i) {
        if (j.at(i).size() != cols) throw std::invalid_argument("json: ragged matrix");
        for (size_t c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
    }
    return m;
}

Json vector_to_json(const Vector& v) {
    Json arr = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Vector vector_from_json(const Json& j) {
    Vector v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v[i] = j.at(i).get<double>();
    return v;
}

}  // namespace

Json to_json(const AbsorbedGenerator& gen) {
    return Json{{"n", gen.size()}, {"rates", matrix_to_json(gen.rates())}, {"kill", vector_to_json(gen.kill())}};
}

AbsorbedGenerator generator_from_json(const Json& j) {
    int n = j.at("n").get<int>();
    Matrix rates = matrix_from_json(j.at("rates"));
    Vector kill = vector_from_json(j.at("kill"));
    if (rates.rows() != n || kill.size() != n) throw std::invalid_argument("generator json: size mismatch");
    return AbsorbedGenerator(std::move(rates), std::move(kill));
}

Json to_json(const Distribution& mu) { return vector_to_json(mu.weights()); }

Distribution distribution_from_json(const Json& j) { return Distribution(vector_from_json(j)); }

Json to_json(const SpectralTriple& triple) {
    return Json{{"lambda0", triple.lambda0},
                {"alpha", vector_to_json(triple.alpha.weights())},
                {"eta", vector_to_json(triple.eta)},
                {"gap", triple.gap}};
}

SpectralTriple triple_from_json(const Json& j) {
    SpectralTriple t;
    t.lambda0 = j.at("lambda0").get<double>();
    t.alpha = Distribution(vector_from_json(j.at("alpha")));
    t.eta = vector_from_json(j.at("eta"));
    t.gap = j.at("gap").get<double>();
    return t;
}

Json to_json(const QProcess& qp) {
    return Json{{"generator", matrix_to_json(qp.generator)}, {"beta", vector_to_json(qp.beta.weights())}};
}

QProcess qprocess_from_json(const Json& j) {
    return QProcess{matrix_from_json(j.at("generator")), Distribution(vector_from_json(j.at("beta")))};
}

Json to_json(const CriteriaCertificate& cert) {
    return Json{{"t0", cert.t0},
                {"nu", vector_to_json(cert.nu.weights())},
                {"c1", cert.c1},
                {"c2", cert.c2},
                {"c2_argmin_t", std::isfinite(cert.c2_argmin_t) ? Json(cert.c2_argmin_t) : Json("inf")},
                {"c2_alpha", cert.c2_alpha},
                {"gamma_bound", cert.gamma_bound},
                {"C_bound", cert.C_bound}};
}

CriteriaCertificate certificate_from_json(const Json& j) {
    CriteriaCertificate cert;
    cert.t0 = j.at("t0").get<double>();
    cert.nu = Distribution(vector_from_json(j.at("nu")));
    cert.c1 = j.at("c1").get<double>();
    cert.c2 = j.at("c2").get<double>();
    cert.c2_argmin_t = j.at("c2_argmin_t").is_string() ? std::numeric_limits<double>::infinity()
                                                       : j.at("c2_argmin_t").get<double>();
    cert.c2_alpha = j.at("c2_alpha").get<double>();
    cert.gamma_bound = j.at("gamma_bound").get<double>();
    cert.C_bound = j.at("C_bound").get<double>();
    return cert;
}

Json to_json(const SeriesReport& rep) {
    Json j{{"verdict", to_string(rep.verdict)},
           {"first_k", rep.first_k},
           {"partial_sums", rep.partial_sums},
           {"last_term", rep.last_term}};
    if (rep.tail_bound) j["tail_bound"] = *rep.tail_bound;
    return j;
}

SeriesReport series_from_json(const Json& j) {
    SeriesReport rep;
    rep.first_k = j.at("first_k").get<long long>();
    rep.partial_sums = j.at("partial_sums").get<std::vector<double>>();
    rep.last_term = j.at("last_term").get<double>();
    std::string v = j.at("verdict").get<std::string>();
    rep.verdict = v == "converged"   ? SeriesVerdict::Converged
                  : v == "diverging" ? SeriesVerdict::Diverging
                                     : SeriesVerdict::Inconclusive;
    if (j.contains("tail_bound")) rep.tail_bound = j.at("tail_bound").get<double>();
    return rep;
}

Json to_json(const SpectrumReport& rep) {
    Json eigs = Json::array();
    for (const auto& e : rep.eigenvalues) {
        const char* cls = e.cls == EigenvalueClass::Top           ? "top"
                          : e.cls == EigenvalueClass::BelowBound  ? "below_bound"
                                                                  : "violates_bound";
        eigs.push_back(Json{{"re", e.value.real()}, {"im", e.value.imag()}, {"class", cls},
                            {"complex_pair", e.complex_pair}});
    }
    return Json{{"lambda0", rep.lambda0},
                {"gamma_bound", rep.gamma_bound},
                {"violations", rep.violations},
                {"eigenvalues", std::move(eigs)}};
}

Json to_json(const RateSequence& seq) {
    if (seq.is_constant()) return Json(seq.constant());
    if (seq.is_expression()) return Json(seq.expr().source());
    return Json(seq.values());
}

RateSequence rate_sequence_from_json(const Json& j) {
    if (j.is_number()) return RateSequence(j.get<double>());
    if (j.is_string()) {
        // a plain numeric string is a constant
        const std::string s = j.get<std::string>();
        try {
            size_t used = 0;
            double v = std::stod(s, &used);
            while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
            if (used == s.size()) return RateSequence(v);
        } catch (const std::exception&) {
        }
        return RateSequence::expression(s);
    }
    if (j.is_array()) return RateSequence::table(j.get<std::vector<double>>());
    throw std::invalid_argument("rate sequence json: expected number, string, or array");
}

Json to_json(const BDSpec& spec) {
    return Json{{"b", to_json(spec.b)}, {"d", to_json(spec.d)}, {"a", to_json(spec.a)}, {"N", spec.N}};
}

BDSpec bdspec_from_json(const Json& j) {
    BDSpec spec;
    spec.b = rate_sequence_from_json(j.at("b"));
    spec.d = rate_sequence_from_json(j.at("d"));
    if (j.contains("a")) spec.a = rate_sequence_from_json(j.at("a"));
    spec.N = j.at("N").get<int>();
    return spec;
}

Json to_json(const MultiBDSpec& spec) {
    Json j{{"mode", spec.mode == MultiBDMode::Mutation ? "mutation" : "cooperative"},
           {"d", spec.d},
           {"mu", vector_to_json(spec.mu)},
           {"c", matrix_to_json(spec.c)},
           {"cap", spec.cap}};
    if (spec.mode == MultiBDMode::Mutation) j["lambda"] = matrix_to_json(spec.lambda_matrix);
    else j["lambda"] = vector_to_json(spec.lambda_vec);
    return j;
}

MultiBDSpec multibdspec_from_json(const Json& j) {
    MultiBDSpec spec;
    std::string mode = j.at("mode").get<std::string>();
    if (mode == "mutation") spec.mode = MultiBDMode::Mutation;
    else if (mode == "cooperative") spec.mode = MultiBDMode::Cooperative;
    else throw std::invalid_argument("multibd json: mode must be 'mutation' or 'cooperative'");
    spec.d = j.at("d").get<int>();
    spec.mu = vector_from_json(j.at("mu"));
    spec.c = matrix_from_json(j.at("c"));
    spec.cap = j.at("cap").get<int>();
    if (spec.mode == MultiBDMode::Mutation) spec.lambda_matrix = matrix_from_json(j.at("lambda"));
    else spec.lambda_vec = vector_from_json(j.at("lambda"));
    if (j.contains("state_budget")) spec.state_budget = j.at("state_budget").get<long long>();
    return spec;
}

Json to_json(const NeutronSpec& spec) {
    Json domain;
    if (const Disk* d = std::get_if<Disk>(&spec.domain)) {
        domain = Json{{"disk", {{"center", {d->center.x(), d->center.y()}}, {"radius", d->radius}}}};
    } else {
        const auto& p = std::get<ConvexPolygon>(spec.domain);
        Json verts = Json::array();
        for (const Point& v : p.vertices) verts.push_back({v.x(), v.y()});
        domain = Json{{"polygon", std::move(verts)}};
    }
    return Json{{"domain", std::move(domain)}, {"lambda", spec.lambda_jump}};
}

NeutronSpec neutronspec_from_json(const Json& j) {
    NeutronSpec spec;
    const Json& dom = j.at("domain");
    if (dom.contains("disk")) {
        Disk d;
        const Json& dj = dom.at("disk");
        d.center = Point(dj.at("center").at(0).get<double>(), dj.at("center").at(1).get<double>());
        d.radius = dj.at("radius").get<double>();
        spec.domain = d;
    } else if (dom.contains("polygon")) {
        ConvexPolygon p;
        for (const Json& v : dom.at("polygon"))
            p.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
        spec.domain = p;
    } else {
        throw std::invalid_argument("neutron json: domain must be 'disk' or 'polygon'");
    }
    spec.lambda_jump = j.at("lambda").get<double>();
    validate_spec(spec);
    return spec;
}

Json to_json(const AssumptionBParams& params) {
    return Json{{"epsilon", params.epsilon},
                {"s_eps", params.s_eps},
                {"t_eps", params.t_eps},
                {"sigma_lower", params.sigma_lower},
                {"cone_half_angle", params.cone_half_angle}};
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace qsdlab
