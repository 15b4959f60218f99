#pragma once

#include <string>

#include <json.hpp>

#include "epictrl/allocation.hpp"
#include "epictrl/gp.hpp"
#include "epictrl/temporal.hpp"

namespace epictrl {

using nlohmann::json;

// graph file format: {"n": int, "edges": [[i,j], ...]}
json graph_to_json(const StaticGraph& g);
StaticGraph graph_from_json(const json& j);

// {"configs": [graph, ...], "rates": [[...]]}
json markov_to_json(const MarkovTemporalNet& net);
MarkovTemporalNet markov_from_json(const json& j);

// {"n": int, "pairs": [{"i","j","M","Q","active"} | {"i","j","p","q"}]}
json amei_to_json(const AmeiNet& net);
AmeiNet amei_from_json(const json& j);

// {"g0": graph, "phi": [...], "psi": [{"i","j","rate"}]}
json asis_to_json(const AsisModel& m);
AsisModel asis_from_json(const json& j);

enum class ModelKind { Static, Markov, Amei, Asis };
ModelKind detect_model_kind(const json& j);

json allocation_to_json(const AllocationResult& r);

// GP problem dump: variables plus coefficient/exponent maps per term
json gp_to_json(const GpProblem& gp);
GpProblem gp_from_json(const json& j);
json gp_solution_to_json(const GpProblem& gp, const GpSolution& s);

json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace epictrl
