#ifndef FMC_SERIALIZE_HPP
#define FMC_SERIALIZE_HPP

#include <json.hpp>

#include "fmc/derivation.hpp"
#include "fmc/perpetual.hpp"

namespace fmc {

// All serialization uses one canonical key order (insertion order below) so
// repeated invocations are byte-identical.
using Json = nlohmann::ordered_json;

Json memory_json(const Memory& m);
Memory memory_from_json(const Json& j);

Json state_json(const MachineState& s);
MachineState state_from_json(const Json& j);

Json run_json(const RunResult& r);
Json eval_tree_json(const EvalTreePtr& t);
Json reduction_trace_json(const ReductionTrace& t);
Json perp_tree_json(const PerpPtr& p);

Json derivation_json(const DerivPtr& d);
// Inverse of derivation_json; throws std::invalid_argument on malformed input.
DerivPtr derivation_from_json(const Json& j);

} // namespace fmc

#endif
