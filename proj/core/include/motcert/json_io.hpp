#pragma once

#include <string>

#include <json.hpp>

#include "motcert/discretization.hpp"
#include "motcert/experiments.hpp"
#include "motcert/monotonicity.hpp"
#include "motcert/solvers.hpp"

namespace motcert::io {

using json = nlohmann::json;

json measure_to_json(const DiscreteMeasure& m);
DiscreteMeasure measure_from_json(const json& j);

json coupling_to_json(const DiscreteCoupling& c);
DiscreteCoupling coupling_from_json(const json& j, MassPolicy policy = MassPolicy::probability);

json cost_to_json(const CostSpec& c);
CostSpec cost_from_json(const json& j);

json instance_to_json(const MotInstance& inst);
MotInstance instance_from_json(const json& j);

json solution_to_json(const Solution& sol);

json certificate_to_json(const Certificate& cert);
Certificate certificate_from_json(const json& j);

json partition_to_json(const Partition& part);

json finite_optimality_to_json(const FiniteOptimalityReport& report);
json gamma_run_to_json(const GammaRun& run);
json verdict_to_json(const OptimalityVerdict& verdict);
json counterexample_to_json(const CounterexampleRun& run);
json rationalized_to_json(const RationalizedPair& pair);

std::string convergence_csv(const std::vector<ConvergenceRow>& rows);
std::string gamma_csv(const GammaRun& run);

/// Switches every weight of a loaded object to the requested mode; rational ->
/// float truncates to doubles, float -> rational converts each double exactly.
DiscreteCoupling coupling_with_mode(const DiscreteCoupling& c, WeightMode mode);
DiscreteMeasure measure_with_mode(const DiscreteMeasure& m, WeightMode mode);

}  // namespace motcert::io
