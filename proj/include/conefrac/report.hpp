#pragma once

#include <string>

#include <json.hpp>

#include "conefrac/mtransform.hpp"
#include "conefrac/operators.hpp"
#include "conefrac/pdcore.hpp"
#include "conefrac/sampling.hpp"

namespace conefrac {

// Shortest round-trip decimal representation (bit-exact report diffing).
std::string format_double(double v);

// {"p": n, "data": [row-major]}
nlohmann::json matrix_to_json(const SymMatrix& m);
SymMatrix matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EstimatorResult& r);
nlohmann::json to_json(const OperatorEvaluation& e);
nlohmann::json to_json(const VerificationCase& c);
nlohmann::json to_json(const VerificationReport& r);

// One row per case: suite,index,params,lhs,rhs,se,pass
std::string report_csv(const VerificationReport& r);

}  // namespace conefrac
