#pragma once

#include <json.hpp>

#include "qsdlab/criteria.hpp"
#include "qsdlab/models.hpp"
#include "qsdlab/neutron.hpp"
#include "qsdlab/spectral.hpp"

namespace qsdlab {

using Json = nlohmann::json;

// AbsorbedGenerator <-> {"n": ..., "rates": [[...]], "kill": [...]}
Json to_json(const AbsorbedGenerator& gen);
AbsorbedGenerator generator_from_json(const Json& j);

Json to_json(const Distribution& mu);
Distribution distribution_from_json(const Json& j);

Json to_json(const SpectralTriple& triple);
SpectralTriple triple_from_json(const Json& j);

Json to_json(const QProcess& qp);
QProcess qprocess_from_json(const Json& j);

Json to_json(const CriteriaCertificate& cert);
CriteriaCertificate certificate_from_json(const Json& j);

Json to_json(const SeriesReport& rep);
SeriesReport series_from_json(const Json& j);

Json to_json(const SpectrumReport& rep);

// BDSpec <-> {"b": "k", "d": "k + 0.1*k^2", "a": 0.05 | "0.05" | [..], "N": 60}
Json to_json(const RateSequence& seq);
RateSequence rate_sequence_from_json(const Json& j);
Json to_json(const BDSpec& spec);
BDSpec bdspec_from_json(const Json& j);

Json to_json(const MultiBDSpec& spec);
MultiBDSpec multibdspec_from_json(const Json& j);

// NeutronSpec <-> {"domain": {"disk": {"center": [x,y], "radius": r}} |
//                            {"polygon": [[x,y], ...]}, "lambda": ...}
Json to_json(const NeutronSpec& spec);
NeutronSpec neutronspec_from_json(const Json& j);

Json to_json(const AssumptionBParams& params);

/// Number formatting used by all artifact writers: shortest round-trip decimal,
/// byte-stable across runs.
std::string format_double(double v);

}  // namespace qsdlab
