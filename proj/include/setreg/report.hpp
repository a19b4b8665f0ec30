#pragma once

#include <string>

#include "json.hpp"
#include "setreg/coincidence.hpp"
#include "setreg/ekeland.hpp"
#include "setreg/implicit.hpp"

namespace setreg {

using json = nlohmann::json;

// Report serialization. Points become arrays, +inf becomes the string "inf",
// and field names follow the struct members.

json to_json(const Point& p);
json to_json(const ExtReal& v);
json to_json(const NeighborhoodConfig& c);
json to_json(const RateConstants& k);
json to_json(const Witness& w);
json to_json(const ModulusReport& r);
json to_json(const EquivalenceReport& r);
json to_json(const HypothesisResult& h);
json to_json(const ConclusionResult& c);
json to_json(const CompositionCertificate& c);
json to_json(const EstimateRow& r);
json to_json(const ImplicitEstimateReport& r);
json to_json(const SolutionBound& b);
json to_json(const GammaCheck& c);
json to_json(const GammaReport& r);
json to_json(const EkelandPoint& e);
json to_json(const SolveResult& r);
json to_json(const ProofConstraint& c);
json to_json(const FixpRow& r);
json to_json(const FixpReport& r);

/// CSV table x,lhs,rhs,ratio,status with one row per swept point.
std::string fixp_csv(const FixpReport& r);

/// Human-readable rendering of a stored report (envelope or bare payload).
std::string pretty_report(const json& report);

}  // namespace setreg
