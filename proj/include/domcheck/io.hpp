#pragma once

#include "domcheck/certificate.hpp"
#include "domcheck/criteria.hpp"
#include "domcheck/model.hpp"
#include "domcheck/rates.hpp"
#include "domcheck/splitting.hpp"
#include "domcheck/torsion.hpp"

#include <json.hpp>

#include <string>

namespace domcheck::io {

using Json = nlohmann::ordered_json;

/// { dimension, structure, points, base_map, generators (row-major) }.
/// Segment base maps list the P-1 defined images.
Json to_json(const OrbitModel& model);
OrbitModel model_from_json(const Json& j);

/// { dimension, dims, points, bases[point][block] (row-major d x n_block) }.
Json to_json(const Splitting& s);
Splitting splitting_from_json(const Json& j);

/// { lambda, provenance, points, p[i][point] }.
Json to_json(const ScalingFamily& s);
ScalingFamily scaling_from_json(const Json& j);

Json to_json(const Thresholds& t);
Json to_json(const DominationCertificate& c);
Json to_json(const ReducibilityCertificate& c);
Json to_json(const HyperbolicityCertificate& c);
Json to_json(const Lemma2Report& r);
Json to_json(const PairsReport& r);
Json to_json(const FunctionCheck& c);
Json to_json(const SlopeReport& r);
Json to_json(const SlopeDomination& r);
Json to_json(const GapCheck& r);
Json to_json(const SeparationCertificate& c);
Json to_json(const TorsionForward& r);
Json to_json(const TorsionReverse& r);
Json to_json(const InvarianceReport& r);

/// Columns point,i,rho_plus,rho_minus,N with i the 1-based bundle; rho_minus
/// is the lower rate computed from that bundle's projector.
std::string rates_csv(const RateFunctionTable& t);

/// Fixed rendering used for every emitted document (2-space indent, newline).
std::string dump(const Json& j);

Json parse(const std::string& text);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace domcheck::io
